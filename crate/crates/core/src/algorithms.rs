//! Community detection by sheaf opinion dynamics, random edge retention and a
//! deterministic common-neighbor rule, each followed by singleton resolution.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::{evolve, FlowParams, OpinionState, Status};
use crate::error::{domain, Error, Result};
use crate::graph::{modularity, Graph, Partition};
use crate::sheaf::CellularSheaf;

/// Parameters of detection with the constant sheaf `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSheafParams {
    /// Stalk dimension.
    pub n: usize,
    /// Initial opinions are drawn uniformly from the ball of diameter `d`.
    pub d: f64,
    pub flow: FlowParams,
}

impl Default for ConstantSheafParams {
    fn default() -> Self {
        ConstantSheafParams { n: 1, d: 1.0, flow: FlowParams::default() }
    }
}

impl ConstantSheafParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("stalk dimension must be positive");
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return domain(format!("diameter must be non-negative, got {}", self.d));
        }
        self.flow.validate()
    }
}

/// One singleton absorbed into a neighboring cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub vertex: usize,
    /// Cluster id in the labeling the merge was applied to.
    pub target: usize,
    /// Modularity gain of this merge.
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub status: Status,
    /// `None` for aborted runs.
    pub partition: Option<Partition>,
    pub modularity: Option<f64>,
    /// Clusters before singleton resolution.
    pub primary_cluster_count: Option<usize>,
    pub merges: Vec<Merge>,
}

impl DetectionResult {
    fn aborted() -> Self {
        DetectionResult {
            status: Status::Aborted,
            partition: None,
            modularity: None,
            primary_cluster_count: None,
            merges: Vec::new(),
        }
    }

    fn from_primary(g: &Graph, primary: Partition) -> Result<Self> {
        let primary_cluster_count = primary.cluster_count();
        let (partition, merges) = resolve_singletons(g, &primary)?;
        let q = modularity(g, &partition)?;
        Ok(DetectionResult {
            status: Status::Converged,
            partition: Some(partition),
            modularity: Some(q),
            primary_cluster_count: Some(primary_cluster_count),
            merges,
        })
    }
}

/// Uniform sample from the closed Euclidean ball of `radius` in `ℝⁿ`.
///
/// A Gaussian direction scaled by `radius · U^{1/n}`.
pub fn sample_ball<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = loop {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if x.iter().any(|&c| c != 0.0) {
            break x;
        }
    };
    let len = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    for c in &mut x {
        *c *= r / len;
    }
    x
}

fn reject_isolated(g: &Graph) -> Result<()> {
    match g.isolated_vertices().next() {
        Some(v) => Err(Error::IsolatedVertex(v)),
        None => Ok(()),
    }
}

/// Score maximized when placing a singleton `v` into an adjacent cluster `C`:
/// `2|E|·k_C − deg(v)·Σ_{w∈C} deg(w)`, with `k_C` the neighbors of `v` in `C`.
/// It equals `2|E|²` times the modularity gain of the move.
pub fn singleton_merge_score(edge_count: usize, degree: usize, links: usize, cluster_degree: usize) -> f64 {
    2.0 * edge_count as f64 * links as f64 - degree as f64 * cluster_degree as f64
}

/// Merges every single-vertex cluster into its best adjacent cluster.
///
/// Singletons are taken in ascending vertex order, rescanning after every
/// merge; score ties go to the lowest cluster id. Every merge strictly
/// increases modularity.
pub fn resolve_singletons(g: &Graph, p: &Partition) -> Result<(Partition, Vec<Merge>)> {
    if p.vertex_count() != g.vertex_count() {
        return Err(Error::PartitionMismatch { expected: g.vertex_count(), found: p.vertex_count() });
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    reject_isolated(g)?;

    let m = g.edge_count();
    let mut label = p.labels().to_vec();
    let mut size = p.cluster_sizes();
    let mut degree_sum = vec![0usize; p.cluster_count()];
    for v in 0..g.vertex_count() {
        degree_sum[label[v]] += g.deg(v);
    }
    let mut links = vec![0usize; p.cluster_count()];
    let mut merges = Vec::new();

    while let Some(v) = (0..g.vertex_count()).find(|&v| size[label[v]] == 1) {
        let dv = g.deg(v);
        for &w in g.neighbors(v) {
            links[label[w]] += 1;
        }
        let mut best: Option<(usize, f64)> = None;
        for &w in g.neighbors(v) {
            let c = label[w];
            let score = singleton_merge_score(m, dv, links[c], degree_sum[c]);
            best = match best {
                Some((bc, bs)) if bs > score || (bs == score && bc < c) => Some((bc, bs)),
                _ => Some((c, score)),
            };
        }
        for &w in g.neighbors(v) {
            links[label[w]] = 0;
        }
        let (target, score) = best.expect("non-isolated vertex has a neighbor");
        let own = label[v];
        size[own] = 0;
        degree_sum[own] = 0;
        label[v] = target;
        size[target] += 1;
        degree_sum[target] += dv;
        merges.push(Merge { vertex: v, target, gain: score / (2.0 * (m * m) as f64) });
    }
    Ok((Partition::from_labels(label), merges))
}

/// Opinion dynamics on the constant sheaf `ℝⁿ` from a random start in the ball
/// of diameter `d`; consensus components, then singleton resolution.
pub fn detect_constant<R: Rng + ?Sized>(
    g: &Graph,
    params: &ConstantSheafParams,
    rng: &mut R,
) -> Result<DetectionResult> {
    params.validate()?;
    reject_isolated(g)?;
    let sheaf = CellularSheaf::constant(g, params.n)?;
    let radius = params.d / 2.0;
    let values = (0..g.vertex_count()).flat_map(|_| sample_ball(params.n, radius, rng)).collect();
    detect_with_flow(g, &sheaf, OpinionState::new(&sheaf, values)?, &params.flow)
}

/// Opinion dynamics on the edge-projection sheaf, each vertex coordinate drawn
/// uniformly from `[−d/2, d/2]`; consensus components, then singleton resolution.
///
/// Distributionally the same as [`detect_nonconstant`] with
/// `p = edge_keep_probability(d)`.
pub fn detect_edge_projection<R: Rng + ?Sized>(
    g: &Graph,
    d: f64,
    flow: &FlowParams,
    rng: &mut R,
) -> Result<DetectionResult> {
    if !(d >= 0.0 && d.is_finite()) {
        return domain(format!("diameter must be non-negative, got {d}"));
    }
    flow.validate()?;
    reject_isolated(g)?;
    let sheaf = CellularSheaf::edge_projection(g);
    let values = (0..sheaf.c0_dim()).map(|_| d * (rng.random::<f64>() - 0.5)).collect();
    detect_with_flow(g, &sheaf, OpinionState::new(&sheaf, values)?, flow)
}

fn detect_with_flow(
    g: &Graph,
    sheaf: &CellularSheaf,
    x0: OpinionState,
    flow: &FlowParams,
) -> Result<DetectionResult> {
    let outcome = evolve(sheaf, &x0, flow)?;
    if outcome.status == Status::Aborted {
        return Ok(DetectionResult::aborted());
    }
    let primary = g.connected_components(&outcome.consensus_mask(g.edge_count()))?;
    DetectionResult::from_primary(g, primary)
}

/// Keeps every edge independently with probability `p`; components of the kept
/// edges, then singleton resolution.
pub fn detect_nonconstant<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Result<DetectionResult> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("edge probability must lie in [0, 1], got {p}"));
    }
    reject_isolated(g)?;
    let keep: Vec<bool> = (0..g.edge_count()).map(|_| rng.random_bool(p)).collect();
    DetectionResult::from_primary(g, g.connected_components(&keep)?)
}

/// Probability that two independent uniforms on an interval of width `d` are
/// closer than the unit threshold.
pub fn edge_keep_probability(d: f64) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return domain(format!("diameter must be positive, got {d}"));
    }
    if d <= 1.0 {
        Ok(1.0)
    } else {
        let miss = 1.0 - 1.0 / d;
        Ok(1.0 - miss * miss)
    }
}

/// Edge mask of the common-neighbor rule `a·(deg u + deg v) < b + N_{u,v}`.
pub fn deterministic_edges(g: &Graph, a: f64, b: f64) -> Vec<bool> {
    g.edges()
        .iter()
        .map(|&(u, v)| {
            let common = g.common_neighbors(u, v).expect("edge endpoints are distinct and valid");
            a * ((g.deg(u) + g.deg(v)) as f64) < b + common as f64
        })
        .collect()
}

/// Keeps the edges passing the common-neighbor rule; components, then
/// singleton resolution.
pub fn detect_deterministic(g: &Graph, a: f64, b: f64) -> Result<DetectionResult> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("a must lie in [0, 1], got {a}"));
    }
    if !b.is_finite() {
        return domain(format!("b must be finite, got {b}"));
    }
    reject_isolated(g)?;
    DetectionResult::from_primary(g, g.connected_components(&deterministic_edges(g, a, b))?)
}
