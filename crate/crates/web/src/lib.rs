//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The plain Rust functions behind them
//! are public so they can be tested natively.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sheaf_communities::dynamics::evolve_observed;
use sheaf_communities::{
    detect_deterministic, detect_nonconstant, karate_club, modularity, resolve_singletons, sample_ball,
    CellularSheaf, FlowParams, Graph, OpinionState, Status,
};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct GraphView {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize)]
pub struct PartitionView {
    pub labels: Vec<usize>,
    pub clusters: usize,
    pub modularity: f64,
    /// Edge mask before singleton resolution.
    pub kept: Vec<bool>,
}

#[derive(Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row of vertex opinions per sampled time.
    pub opinions: Vec<Vec<f64>>,
    pub status: String,
    pub partition: Option<PartitionView>,
}

#[derive(Debug, Serialize)]
pub struct ModularityCurve {
    pub p: Vec<f64>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

fn partition_view(g: &Graph, kept: Vec<bool>) -> Result<PartitionView, String> {
    let primary = g.connected_components(&kept).map_err(|e| e.to_string())?;
    let (p, _) = resolve_singletons(g, &primary).map_err(|e| e.to_string())?;
    let q = modularity(g, &p).map_err(|e| e.to_string())?;
    Ok(PartitionView { clusters: p.cluster_count(), labels: p.labels().to_vec(), modularity: q, kept })
}

pub fn karate_view() -> GraphView {
    let g = karate_club();
    GraphView { vertices: g.vertex_count(), edges: g.edges().to_vec() }
}

pub fn deterministic_view(a: f64, b: f64) -> Result<PartitionView, String> {
    let g = karate_club();
    let res = detect_deterministic(&g, a, b).map_err(|e| e.to_string())?;
    let p = res.partition.expect("deterministic detection always converges");
    let kept = sheaf_communities::algorithms::deterministic_edges(&g, a, b);
    Ok(PartitionView { clusters: p.cluster_count(), labels: p.labels().to_vec(), modularity: res.modularity.unwrap(), kept })
}

/// Scalar opinion flow on karate from a seeded start of diameter `d`,
/// sampled every `every` steps.
pub fn constant_trajectory(d: f64, seed: u64, t_max: f64, every: usize) -> Result<Trajectory, String> {
    if every == 0 {
        return Err("sampling interval must be positive".into());
    }
    let g = karate_club();
    let s = CellularSheaf::constant(&g, 1).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..g.vertex_count()).flat_map(|_| sample_ball(1, d / 2.0, &mut rng)).collect();
    let x0 = OpinionState::new(&s, x0).map_err(|e| e.to_string())?;
    let params = FlowParams { t_max, ..Default::default() };
    let (mut times, mut opinions) = (Vec::new(), Vec::new());
    let mut step = 0usize;
    let out = evolve_observed(&s, &x0, &params, |t, x| {
        if step.is_multiple_of(every) {
            times.push(t);
            opinions.push(x.to_vec());
        }
        step += 1;
    })
    .map_err(|e| e.to_string())?;
    if opinions.last() != Some(&out.state.values) {
        times.push(out.state.time);
        opinions.push(out.state.values.clone());
    }
    let partition = match out.status {
        Status::Converged => Some(partition_view(&g, out.consensus_mask(g.edge_count()))?),
        Status::Aborted => None,
    };
    Ok(Trajectory { times, opinions, status: out.status.to_string(), partition })
}

/// Mean and population standard deviation of modularity under random edge
/// retention, `runs` draws per probability.
pub fn nonconstant_curve(p: &[f64], runs: usize, seed: u64) -> Result<ModularityCurve, String> {
    if runs == 0 {
        return Err("runs must be positive".into());
    }
    let g = karate_club();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = ModularityCurve { p: p.to_vec(), mean: Vec::new(), sd: Vec::new() };
    for &pi in p {
        let qs = (0..runs)
            .map(|_| detect_nonconstant(&g, pi, &mut rng).map(|r| r.modularity.unwrap()))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?;
        let mean = qs.iter().sum::<f64>() / runs as f64;
        let var = qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / runs as f64;
        curve.mean.push(mean);
        curve.sd.push(var.sqrt());
    }
    Ok(curve)
}

fn to_json<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = karateGraph)]
pub fn karate_graph() -> Result<String, JsError> {
    to_json(Ok(karate_view()))
}

#[wasm_bindgen(js_name = deterministicPartition)]
pub fn deterministic_partition(a: f64, b: f64) -> Result<String, JsError> {
    to_json(deterministic_view(a, b))
}

#[wasm_bindgen(js_name = constantFlow)]
pub fn constant_flow(d: f64, seed: u32, t_max: f64, every: u32) -> Result<String, JsError> {
    to_json(constant_trajectory(d, seed as u64, t_max, every as usize))
}

#[wasm_bindgen(js_name = modularityCurve)]
pub fn modularity_curve(p: Vec<f64>, runs: u32, seed: u32) -> Result<String, JsError> {
    to_json(nonconstant_curve(&p, runs as usize, seed as u64))
}
