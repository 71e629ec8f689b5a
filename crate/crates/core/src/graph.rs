//! Undirected simple graphs, vertex partitions and modularity.

use std::collections::HashSet;

use crate::error::{domain, Error, Result};

/// An undirected simple graph with dense vertex ids `0..vertex_count`.
///
/// Every edge is stored as an ordered pair `(tail, head)`. The orientation only
/// fixes the sign convention of the coboundary; nothing downstream depends on
/// it. [`Graph::new`] orients every edge as `(smaller id, larger id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, orienting every edge from its smaller to its larger endpoint.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v)));
        Self::with_orientation(vertex_count, edges)
    }

    /// Builds a graph keeping every edge in the orientation given.
    pub fn with_orientation(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut neighbors = vec![Vec::new(); vertex_count];
        let mut incident = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: w, count: vertex_count });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
            incident[u].push(id);
            incident[v].push(id);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph { vertex_count, edges, neighbors, incident })
    }

    /// Returns a copy of the graph with the stored orientation of edge `e` reversed.
    pub fn with_edge_flipped(&self, e: usize) -> Result<Self> {
        self.check_edge(e)?;
        let mut g = self.clone();
        let (u, v) = g.edges[e];
        g.edges[e] = (v, u);
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Ids of the edges incident to `v`, in ascending edge order.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.neighbors[v].len())
    }

    /// Degree without the range check, for hot loops over known-valid vertices.
    pub(crate) fn deg(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Number of vertices adjacent to both `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return domain("common neighbors need two distinct vertices");
        }
        let (a, b) = (&self.neighbors[u], &self.neighbors[v]);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(count)
    }

    pub fn isolated_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count).filter(|&v| self.neighbors[v].is_empty())
    }

    /// Connected components of `(V, active)`, where `active[e]` selects edge `e`.
    /// Vertices touched by no active edge end up as singletons.
    pub fn connected_components(&self, active: &[bool]) -> Result<Partition> {
        if active.len() != self.edges.len() {
            return Err(Error::Shape(format!(
                "edge mask has {} entries, graph has {} edges",
                active.len(),
                self.edges.len()
            )));
        }
        let mut sets = DisjointSets::new(self.vertex_count);
        for (&(u, v), _) in self.edges.iter().zip(active).filter(|(_, &on)| on) {
            sets.union(u, v);
        }
        let labels = (0..self.vertex_count).map(|v| sets.find(v)).collect();
        Ok(Partition::from_labels(labels))
    }

    /// Connected components using every edge.
    pub fn components(&self) -> Partition {
        self.connected_components(&vec![true; self.edges.len()])
            .expect("mask length matches edge count")
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, count: self.vertex_count })
        }
    }

    fn check_edge(&self, e: usize) -> Result<()> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(Error::EdgeOutOfRange { edge: e, count: self.edges.len() })
        }
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Assignment of every vertex to exactly one cluster.
///
/// Cluster ids are contiguous from zero and numbered by their smallest member,
/// so two partitions describing the same grouping compare equal regardless of
/// the labels they were built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    cluster_of: Vec<usize>,
    cluster_count: usize,
}

impl Partition {
    /// Builds a partition from arbitrary per-vertex labels; equal labels share a cluster.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let mut remap = std::collections::HashMap::new();
        let cluster_of: Vec<usize> = labels
            .into_iter()
            .map(|label| {
                let next = remap.len();
                *remap.entry(label).or_insert(next)
            })
            .collect();
        Partition { cluster_count: remap.len(), cluster_of }
    }

    /// Every vertex in one cluster.
    pub fn single_cluster(vertex_count: usize) -> Self {
        Self::from_labels(vec![0; vertex_count])
    }

    /// Every vertex in its own cluster.
    pub fn singletons(vertex_count: usize) -> Self {
        Self::from_labels((0..vertex_count).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_of[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.cluster_of
    }

    /// Members of every cluster, in ascending cluster id and ascending vertex order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut clusters = vec![Vec::new(); self.cluster_count];
        for (v, &c) in self.cluster_of.iter().enumerate() {
            clusters[c].push(v);
        }
        clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for &c in &self.cluster_of {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Newman modularity of a partition.
///
/// Intra-cluster edge counts are gathered in a single pass over the edge list.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.vertex_count() != g.vertex_count() {
        return Err(Error::PartitionMismatch { expected: g.vertex_count(), found: p.vertex_count() });
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let mut internal = vec![0usize; p.cluster_count()];
    let mut degree_sum = vec![0usize; p.cluster_count()];
    for &(u, v) in g.edges() {
        let c = p.cluster_of(u);
        if c == p.cluster_of(v) {
            internal[c] += 1;
        }
    }
    for v in 0..g.vertex_count() {
        degree_sum[p.cluster_of(v)] += g.deg(v);
    }
    let m = g.edge_count() as f64;
    Ok(internal
        .iter()
        .zip(&degree_sum)
        .map(|(&k, &d)| {
            let share = d as f64 / (2.0 * m);
            k as f64 / m - share * share
        })
        .sum())
}

/// Parses a whitespace-separated edge list.
///
/// Blank lines and lines starting with `#` are skipped. An optional `V <count>`
/// line declares the vertex count, which otherwise is one more than the largest
/// id seen.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut declared = None;
    let mut edges = Vec::new();
    let mut lines = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a non-negative integer, found {s:?}"),
            })
        };
        match fields.as_slice() {
            ["V", count] => {
                if declared.is_some() || !edges.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "vertex count header must precede all edges and appear once".into(),
                    });
                }
                declared = Some(parse(count)?);
            }
            [u, v] => {
                edges.push((parse(u)?, parse(v)?));
                lines.push(line_no);
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected two vertex ids, found {} fields", fields.len()),
                })
            }
        }
    }
    let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let vertex_count = match declared {
        Some(n) if n < inferred => {
            let line = edges.iter().zip(&lines).find(|((u, v), _)| *u.max(v) >= n).map(|(_, &l)| l);
            return Err(Error::Parse {
                line: line.unwrap_or(0),
                message: format!("vertex id exceeds declared count {n}"),
            });
        }
        Some(n) => n,
        None => inferred,
    };
    Graph::new(vertex_count, edges)
}

/// Zachary's karate club: 34 members, 78 ties observed outside the club.
pub fn karate_club() -> Graph {
    Graph::new(34, KARATE_EDGES.iter().copied()).expect("builtin karate club data is a simple graph")
}

const KARATE_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13),
    (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16),
    (6, 16),
    (8, 30), (8, 32), (8, 33),
    (9, 33),
    (13, 33),
    (14, 32), (14, 33),
    (15, 32), (15, 33),
    (18, 32), (18, 33),
    (19, 33),
    (20, 32), (20, 33),
    (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31),
    (25, 31),
    (26, 29), (26, 33),
    (27, 33),
    (28, 31), (28, 33),
    (29, 32), (29, 33),
    (30, 32), (30, 33),
    (31, 32), (31, 33),
    (32, 33),
];
