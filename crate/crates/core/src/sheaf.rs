//! Cellular sheaves on graphs: coboundary, sheaf Laplacian and cohomology.
//!
//! Cochains are laid out block by block: vertex stalks in ascending vertex
//! order for `C⁰`, edge stalks in ascending edge order for `C¹`.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};
use crate::graph::Graph;

/// A cellular sheaf of real vector spaces over a graph.
///
/// `restrictions[e]` holds the maps from the tail and head vertex stalks of
/// edge `e` (in its stored orientation) into the edge stalk.
#[derive(Debug, Clone)]
pub struct CellularSheaf<'g> {
    graph: &'g Graph,
    vertex_dims: Vec<usize>,
    edge_dims: Vec<usize>,
    restrictions: Vec<[DMatrix<f64>; 2]>,
    vertex_offsets: Vec<usize>,
    edge_offsets: Vec<usize>,
}

impl<'g> CellularSheaf<'g> {
    /// Builds a sheaf from explicit stalk dimensions and restriction maps.
    ///
    /// `restrictions[e] = [F_{tail ⊂ e}, F_{head ⊂ e}]`, each of shape `n_e × n_v`.
    pub fn new(
        graph: &'g Graph,
        vertex_dims: Vec<usize>,
        edge_dims: Vec<usize>,
        restrictions: Vec<[DMatrix<f64>; 2]>,
    ) -> Result<Self> {
        if vertex_dims.len() != graph.vertex_count() {
            return Err(Error::Shape(format!(
                "{} vertex stalks for {} vertices",
                vertex_dims.len(),
                graph.vertex_count()
            )));
        }
        if edge_dims.len() != graph.edge_count() || restrictions.len() != graph.edge_count() {
            return Err(Error::Shape(format!(
                "{} edge stalks and {} restriction pairs for {} edges",
                edge_dims.len(),
                restrictions.len(),
                graph.edge_count()
            )));
        }
        for (e, (&(u, v), maps)) in graph.edges().iter().zip(&restrictions).enumerate() {
            for (end, (&w, map)) in [u, v].iter().zip(maps).enumerate() {
                if map.shape() != (edge_dims[e], vertex_dims[w]) {
                    return Err(Error::Shape(format!(
                        "restriction {end} of edge {e} is {:?}, expected {:?}",
                        map.shape(),
                        (edge_dims[e], vertex_dims[w])
                    )));
                }
            }
        }
        let vertex_offsets = prefix_sums(&vertex_dims);
        let edge_offsets = prefix_sums(&edge_dims);
        Ok(CellularSheaf { graph, vertex_dims, edge_dims, restrictions, vertex_offsets, edge_offsets })
    }

    /// The constant sheaf `ℝⁿ`: every stalk `ℝⁿ`, every restriction the identity.
    pub fn constant(graph: &'g Graph, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("constant sheaf dimension must be positive");
        }
        let id = DMatrix::identity(n, n);
        let restrictions = vec![[id.clone(), id]; graph.edge_count()];
        Self::new(graph, vec![n; graph.vertex_count()], vec![n; graph.edge_count()], restrictions)
    }

    /// Vertex stalks `ℝ^{deg v}` with one coordinate per incident edge, edge
    /// stalks `ℝ`, restrictions projecting onto the coordinate of that edge.
    ///
    /// Coordinates of a vertex stalk follow the vertex's incident edges in
    /// ascending edge id.
    pub fn edge_projection(graph: &'g Graph) -> Self {
        let vertex_dims: Vec<usize> =
            (0..graph.vertex_count()).map(|v| graph.incident_edges(v).len()).collect();
        let restrictions = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| {
                [u, v].map(|w| {
                    let slot = graph
                        .incident_edges(w)
                        .iter()
                        .position(|&f| f == e)
                        .expect("edge is incident to its endpoints");
                    let mut row = DMatrix::zeros(1, vertex_dims[w]);
                    row[(0, slot)] = 1.0;
                    row
                })
            })
            .collect();
        Self::new(graph, vertex_dims, vec![1; graph.edge_count()], restrictions)
            .expect("projection shapes are consistent by construction")
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn vertex_dim(&self, v: usize) -> usize {
        self.vertex_dims[v]
    }

    pub fn edge_dim(&self, e: usize) -> usize {
        self.edge_dims[e]
    }

    /// `dim C⁰ = Σ_v n_v`.
    pub fn c0_dim(&self) -> usize {
        *self.vertex_offsets.last().unwrap()
    }

    /// `dim C¹ = Σ_e n_e`.
    pub fn c1_dim(&self) -> usize {
        *self.edge_offsets.last().unwrap()
    }

    /// Coordinates of the stalk of `v` inside `C⁰`.
    pub fn vertex_range(&self, v: usize) -> Range<usize> {
        self.vertex_offsets[v]..self.vertex_offsets[v + 1]
    }

    /// Coordinates of the stalk of `e` inside `C¹`.
    pub fn edge_range(&self, e: usize) -> Range<usize> {
        self.edge_offsets[e]..self.edge_offsets[e + 1]
    }

    /// `[F_{tail ⊂ e}, F_{head ⊂ e}]` for edge `e`.
    pub fn restrictions(&self, e: usize) -> &[DMatrix<f64>; 2] {
        &self.restrictions[e]
    }

    /// Restriction map of the incidence `v ⊂ e`, if `v` is an endpoint of `e`.
    pub fn restriction(&self, v: usize, e: usize) -> Option<&DMatrix<f64>> {
        let (u, w) = self.graph.edge(e);
        if v == u {
            Some(&self.restrictions[e][0])
        } else if v == w {
            Some(&self.restrictions[e][1])
        } else {
            None
        }
    }

    /// The same sheaf over a graph whose edge `e` is stored in the opposite
    /// orientation. The restriction attached to each incidence is unchanged.
    pub fn reoriented<'h>(&self, flipped: &'h Graph, e: usize) -> Result<CellularSheaf<'h>> {
        let (u, v) = self.graph.edge(e);
        if flipped.edge(e) != (v, u) || flipped.edge_count() != self.graph.edge_count() {
            return Err(Error::Shape(format!("graph does not flip edge {e}")));
        }
        let mut restrictions = self.restrictions.clone();
        restrictions[e].swap(0, 1);
        CellularSheaf::new(flipped, self.vertex_dims.clone(), self.edge_dims.clone(), restrictions)
    }
}

fn prefix_sums(dims: &[usize]) -> Vec<usize> {
    std::iter::once(0)
        .chain(dims.iter().scan(0, |acc, &d| {
            *acc += d;
            Some(*acc)
        }))
        .collect()
}

/// Signed incidence matrix `B` (`V × E`): `+1` at the tail of an edge, `−1` at its head.
pub fn signed_incidence(g: &Graph) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(g.vertex_count(), g.edge_count());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        b[(u, e)] = 1.0;
        b[(v, e)] = -1.0;
    }
    b
}

/// Coboundary `δ: C⁰ → C¹`, `(δx)_e = F_{head ⊂ e} x_head − F_{tail ⊂ e} x_tail`.
pub fn coboundary(s: &CellularSheaf) -> DMatrix<f64> {
    let mut delta = DMatrix::zeros(s.c1_dim(), s.c0_dim());
    for (e, &(u, v)) in s.graph().edges().iter().enumerate() {
        let rows = s.edge_range(e);
        let [tail, head] = s.restrictions(e);
        let (r0, nr) = (rows.start, rows.len());
        let tail_cols = s.vertex_range(u);
        let head_cols = s.vertex_range(v);
        delta.view_mut((r0, tail_cols.start), (nr, tail_cols.len())).copy_from(&(-tail));
        delta.view_mut((r0, head_cols.start), (nr, head_cols.len())).copy_from(head);
    }
    delta
}

/// Sheaf Laplacian `L = δᵀδ`.
pub fn sheaf_laplacian(s: &CellularSheaf) -> DMatrix<f64> {
    let delta = coboundary(s);
    delta.tr_mul(&delta)
}

/// Dimensions of `H⁰ = ker δ` and `H¹ = coker δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cohomology {
    pub h0: usize,
    pub h1: usize,
}

/// Cohomology dimensions with the default relative rank tolerance.
pub fn cohomology_dims(s: &CellularSheaf) -> Cohomology {
    let delta = coboundary(s);
    let rank = numerical_rank(&delta, None);
    Cohomology { h0: s.c0_dim() - rank, h1: s.c1_dim() - rank }
}

/// Cohomology dimensions treating singular values below `rank_tolerance` as zero.
pub fn cohomology_dims_with_tolerance(s: &CellularSheaf, rank_tolerance: f64) -> Result<Cohomology> {
    if rank_tolerance.is_nan() || rank_tolerance <= 0.0 {
        return domain("rank tolerance must be positive");
    }
    let rank = numerical_rank(&coboundary(s), Some(rank_tolerance));
    Ok(Cohomology { h0: s.c0_dim() - rank, h1: s.c1_dim() - rank })
}

/// Number of singular values above the tolerance.
///
/// Without an explicit tolerance the cutoff is `1e-9 · σ_max · max(rows, cols)`.
pub fn numerical_rank(m: &DMatrix<f64>, tolerance: Option<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let cutoff = tolerance.unwrap_or(1e-9 * largest * m.nrows().max(m.ncols()) as f64);
    sv.iter().filter(|&&s| s > cutoff).count()
}
