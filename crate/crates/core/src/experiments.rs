//! Seeded Monte Carlo parameter sweeps over the three detectors.
//!
//! Every run draws from its own ChaCha stream, seeded by hashing the master
//! seed with the grid point index and run index, so results do not depend on
//! scheduling or on which other points are in the grid.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::algorithms::{detect_constant, detect_deterministic, detect_nonconstant, ConstantSheafParams, DetectionResult};
use crate::dynamics::{BumpFunction, FlowParams, Status};
use crate::error::{domain, Result};
use crate::graph::{Graph, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    Constant,
    Nonconstant,
    Deterministic,
}

impl AlgorithmKind {
    fn parameter_columns(self) -> &'static [&'static str] {
        match self {
            AlgorithmKind::Constant => &["d", "phi", "n"],
            AlgorithmKind::Nonconstant => &["p"],
            AlgorithmKind::Deterministic => &["a", "b"],
        }
    }
}

/// Parameter grid of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// Points ordered by `phi`, then `n`, then `d`.
    Constant { d: Vec<f64>, phi: Vec<BumpFunction>, n: Vec<usize>, flow: FlowParams },
    Nonconstant { p: Vec<f64> },
    /// Points ordered by `a`, then `b`.
    Deterministic { a: Vec<f64>, b: Vec<f64> },
}

impl Grid {
    /// `d ∈ {0.5, 1.0, …, 6.0}` with `φ₁` and `n = 1`.
    pub fn default_constant() -> Self {
        Grid::Constant {
            d: (1..=12).map(|i| i as f64 / 2.0).collect(),
            phi: vec![BumpFunction::Phi1],
            n: vec![1],
            flow: FlowParams::default(),
        }
    }

    /// `p ∈ {0, 0.02, …, 0.7}`.
    pub fn default_nonconstant() -> Self {
        Grid::Nonconstant { p: (0..=35).map(|i| i as f64 / 50.0).collect() }
    }

    /// `a ∈ {0, 0.05, …, 1}`, `b ∈ {−2, −1.75, …, 5}`.
    pub fn default_deterministic() -> Self {
        Grid::Deterministic {
            a: (0..=20).map(|i| i as f64 / 20.0).collect(),
            b: (0..=28).map(|i| -2.0 + i as f64 / 4.0).collect(),
        }
    }

    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Grid::Constant { .. } => AlgorithmKind::Constant,
            Grid::Nonconstant { .. } => AlgorithmKind::Nonconstant,
            Grid::Deterministic { .. } => AlgorithmKind::Deterministic,
        }
    }

    pub fn points(&self) -> Vec<GridPoint> {
        match self {
            Grid::Constant { d, phi, n, flow } => phi
                .iter()
                .flat_map(|&phi| {
                    n.iter().flat_map(move |&n| {
                        d.iter().map(move |&d| GridPoint::Constant(ConstantSheafParams {
                            n,
                            d,
                            flow: FlowParams { phi, ..*flow },
                        }))
                    })
                })
                .collect(),
            Grid::Nonconstant { p } => p.iter().map(|&p| GridPoint::Nonconstant { p }).collect(),
            Grid::Deterministic { a, b } => a
                .iter()
                .flat_map(|&a| b.iter().map(move |&b| GridPoint::Deterministic { a, b }))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Constant(ConstantSheafParams),
    Nonconstant { p: f64 },
    Deterministic { a: f64, b: f64 },
}

impl GridPoint {
    pub fn detect(&self, g: &Graph, seed: u64) -> Result<DetectionResult> {
        match *self {
            GridPoint::Constant(params) => detect_constant(g, &params, &mut ChaCha8Rng::seed_from_u64(seed)),
            GridPoint::Nonconstant { p } => detect_nonconstant(g, p, &mut ChaCha8Rng::seed_from_u64(seed)),
            GridPoint::Deterministic { a, b } => detect_deterministic(g, a, b),
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        match self {
            GridPoint::Constant(c) => vec![c.d.to_string(), c.flow.phi.to_string(), c.n.to_string()],
            GridPoint::Nonconstant { p } => vec![p.to_string()],
            GridPoint::Deterministic { a, b } => vec![a.to_string(), b.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: Grid,
    /// Runs per grid point; deterministic sweeps always use one.
    pub runs: usize,
    pub master_seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return domain("runs per point must be at least 1");
        }
        let empty = match &self.grid {
            Grid::Constant { d, phi, n, flow } => {
                flow.validate()?;
                d.is_empty() || phi.is_empty() || n.is_empty()
            }
            Grid::Nonconstant { p } => p.is_empty(),
            Grid::Deterministic { a, b } => a.is_empty() || b.is_empty(),
        };
        if empty {
            return domain("parameter grid is empty");
        }
        Ok(())
    }

    fn effective_runs(&self) -> usize {
        match self.grid {
            Grid::Deterministic { .. } => 1,
            _ => self.runs,
        }
    }
}

/// Seed of run `run` at grid point `point`.
pub fn derive_seed(master: u64, point: usize, run: usize) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ point as u64);
    splitmix64(h.rotate_left(29) ^ run as u64)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome of a single converged run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub partition: Partition,
    pub modularity: f64,
}

impl RunRecord {
    pub fn cluster_count(&self) -> usize {
        self.partition.cluster_count()
    }
}

/// Descriptive statistics over the converged runs of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub mean_clusters: f64,
    pub sd_clusters: f64,
    pub clusters_error: f64,
    pub mean_modularity: f64,
    pub sd_modularity: f64,
    pub modularity_error: f64,
    /// Most frequent partition and its share of all runs, aborted ones included.
    pub modal_partition: Partition,
    pub pmax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub point: GridPoint,
    pub runs: usize,
    pub aborts: usize,
    /// `None` for aborted runs, in run order.
    pub records: Vec<Option<RunRecord>>,
    /// `None` when every run aborted.
    pub stats: Option<PointStats>,
}

impl PointResult {
    fn new(point: GridPoint, records: Vec<Option<RunRecord>>) -> Self {
        let runs = records.len();
        let done: Vec<&RunRecord> = records.iter().flatten().collect();
        let aborts = runs - done.len();
        let stats = (!done.is_empty()).then(|| {
            let clusters: Vec<f64> = done.iter().map(|r| r.cluster_count() as f64).collect();
            let qs: Vec<f64> = done.iter().map(|r| r.modularity).collect();
            let (mean_clusters, sd_clusters) = mean_sd(&clusters);
            let (mean_modularity, sd_modularity) = mean_sd(&qs);
            let partitions: Vec<Partition> = done.iter().map(|r| r.partition.clone()).collect();
            let (modal_partition, share) =
                most_likely_partition_frequency(&partitions).expect("at least one converged run");
            PointStats {
                mean_clusters,
                sd_clusters,
                clusters_error: error_radius(mean_clusters, sd_clusters, aborts, runs),
                mean_modularity,
                sd_modularity,
                modularity_error: error_radius(mean_modularity, sd_modularity, aborts, runs),
                modal_partition,
                pmax: share * done.len() as f64 / runs as f64,
            }
        });
        PointResult { point, runs, aborts, records, stats }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: AlgorithmKind,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn abort_fraction(&self, index: usize) -> f64 {
        let p = &self.points[index];
        p.aborts as f64 / p.runs as f64
    }
}

/// Runs every grid point `runs` times (once for deterministic grids).
///
/// Aborted runs are counted but excluded from means and standard deviations.
pub fn run_sweep(g: &Graph, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let points = cfg.grid.points();
    let runs = cfg.effective_runs();
    let jobs: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..runs).map(move |r| (p, r))).collect();
    let run_one = |&(p, r): &(usize, usize)| -> Result<Option<RunRecord>> {
        let res = points[p].detect(g, derive_seed(cfg.master_seed, p, r))?;
        Ok(match res.status {
            Status::Converged => Some(RunRecord {
                partition: res.partition.expect("converged runs carry a partition"),
                modularity: res.modularity.expect("converged runs carry a modularity"),
            }),
            Status::Aborted => None,
        })
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Option<RunRecord>> = jobs.par_iter().map(run_one).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Option<RunRecord>> = jobs.iter().map(run_one).collect::<Result<_>>()?;

    let mut outcomes = outcomes.into_iter();
    let points = points
        .into_iter()
        .map(|point| PointResult::new(point, outcomes.by_ref().take(runs).collect()))
        .collect();
    Ok(SweepResult { kind: cfg.grid.kind(), points })
}

/// Population mean and standard deviation.
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `σ + (aborts / N) · mean`.
pub fn error_radius(mean: f64, sigma: f64, aborts: usize, runs: usize) -> f64 {
    sigma + aborts as f64 / runs as f64 * mean
}

/// Most frequent partition and its relative frequency. Ties go to the
/// partition seen first.
pub fn most_likely_partition_frequency(partitions: &[Partition]) -> Result<(Partition, f64)> {
    if partitions.is_empty() {
        return domain("no partitions to count");
    }
    let mut counts: HashMap<&Partition, (usize, usize)> = HashMap::new();
    for (i, p) in partitions.iter().enumerate() {
        counts.entry(p).or_insert((0, i)).0 += 1;
    }
    let (best, (count, _)) = counts
        .into_iter()
        .max_by(|(_, (ca, fa)), (_, (cb, fb))| ca.cmp(cb).then(fb.cmp(fa)))
        .expect("non-empty");
    Ok((best.clone(), count as f64 / partitions.len() as f64))
}

/// Summary CSV: parameter columns, then `num,numerr,qav,qaverr,aborts,pmax`.
/// Points where every run aborted leave the statistics columns empty.
pub fn write_csv(result: &SweepResult, mut out: impl Write) -> Result<()> {
    out.write_all(csv_string(result).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut s = String::new();
    let mut header: Vec<&str> = result.kind.parameter_columns().to_vec();
    header.extend(["num", "numerr", "qav", "qaverr", "aborts", "pmax"]);
    s.push_str(&header.join(","));
    s.push('\n');
    for point in &result.points {
        let mut fields = point.point.csv_fields();
        match &point.stats {
            Some(st) => fields.extend([
                st.mean_clusters.to_string(),
                st.clusters_error.to_string(),
                st.mean_modularity.to_string(),
                st.modularity_error.to_string(),
                point.aborts.to_string(),
                st.pmax.to_string(),
            ]),
            None => fields.extend([
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                point.aborts.to_string(),
                String::new(),
            ]),
        }
        let _ = writeln!(s, "{}", fields.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::karate_club;

    #[test]
    fn error_radius_formula() {
        assert!((error_radius(2.0, 0.1, 50, 1000) - 0.2).abs() < 1e-15);
        assert_eq!(error_radius(3.7, 0.4, 0, 10), 0.4);
        assert_eq!(error_radius(0.0, 0.0, 10, 10), 0.0);
    }

    #[test]
    fn modal_partition() {
        let a = Partition::single_cluster(4);
        let b = Partition::singletons(4);
        let (p, f) = most_likely_partition_frequency(&[a.clone(), a.clone()]).unwrap();
        assert_eq!((p, f), (a.clone(), 1.0));
        let mut list = vec![b.clone(); 4];
        list.extend(vec![a.clone(); 6]);
        let (p, f) = most_likely_partition_frequency(&list).unwrap();
        assert_eq!(p, a);
        assert!((f - 0.6).abs() < 1e-15);
        // relabeled copies count as one partition
        let relabeled = Partition::from_labels(vec![5, 5, 2, 2]);
        let same = Partition::from_labels(vec![0, 0, 1, 1]);
        let (_, f) = most_likely_partition_frequency(&[relabeled, same, b]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert!(most_likely_partition_frequency(&[]).is_err());
    }

    #[test]
    fn default_grids() {
        assert_eq!(Grid::default_constant().points().len(), 12);
        let p = Grid::default_nonconstant().points();
        assert_eq!(p.len(), 36);
        assert_eq!(p[3], GridPoint::Nonconstant { p: 0.06 });
        assert_eq!(p[35], GridPoint::Nonconstant { p: 0.7 });
        let g = Grid::default_deterministic().points();
        assert_eq!(g.len(), 21 * 29);
        assert_eq!(g[0], GridPoint::Deterministic { a: 0.0, b: -2.0 });
        assert_eq!(g[g.len() - 1], GridPoint::Deterministic { a: 1.0, b: 5.0 });
    }

    #[test]
    fn seeds_differ_and_are_stable() {
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        let mut seen = std::collections::HashSet::new();
        for p in 0..50 {
            for r in 0..50 {
                assert!(seen.insert(derive_seed(9, p, r)));
            }
        }
        assert_ne!(derive_seed(0, 0, 1), derive_seed(0, 1, 0));
    }

    #[test]
    fn deterministic_sweep_never_aborts() {
        let g = karate_club();
        let cfg = SweepConfig {
            grid: Grid::Deterministic { a: vec![0.0, 0.3], b: vec![0.0, 1.0] },
            runs: 50,
            master_seed: 0,
        };
        let res = run_sweep(&g, &cfg).unwrap();
        assert_eq!(res.points.len(), 4);
        for p in &res.points {
            assert_eq!((p.runs, p.aborts), (1, 0));
            assert_eq!(p.stats.as_ref().unwrap().pmax, 1.0);
        }
    }

    #[test]
    fn certain_edges_give_zero_modularity() {
        let g = karate_club();
        let cfg = SweepConfig { grid: Grid::Nonconstant { p: vec![1.0] }, runs: 25, master_seed: 3 };
        let res = run_sweep(&g, &cfg).unwrap();
        let st = res.points[0].stats.as_ref().unwrap();
        assert_eq!((st.mean_modularity, st.sd_modularity), (0.0, 0.0));
        assert_eq!((st.mean_clusters, st.sd_clusters), (1.0, 0.0));
    }

    #[test]
    fn invalid_configs() {
        let g = karate_club();
        let empty = SweepConfig { grid: Grid::Nonconstant { p: vec![] }, runs: 1, master_seed: 0 };
        assert!(run_sweep(&g, &empty).is_err());
        let no_runs = SweepConfig { grid: Grid::default_nonconstant(), runs: 0, master_seed: 0 };
        assert!(run_sweep(&g, &no_runs).is_err());
    }

    #[test]
    fn all_aborted_point_has_no_statistics() {
        let point = GridPoint::Nonconstant { p: 0.5 };
        let res = PointResult::new(point, vec![None, None, None]);
        assert_eq!(res.aborts, 3);
        assert!(res.stats.is_none());
        let sweep = SweepResult { kind: AlgorithmKind::Nonconstant, points: vec![res] };
        assert_eq!(csv_string(&sweep), "p,num,numerr,qav,qaverr,aborts,pmax\n0.5,,,,,3,\n");
    }

    #[test]
    fn csv_shapes() {
        let empty = SweepResult { kind: AlgorithmKind::Constant, points: vec![] };
        assert_eq!(csv_string(&empty), "d,phi,n,num,numerr,qav,qaverr,aborts,pmax\n");
        let g = karate_club();
        let cfg = SweepConfig {
            grid: Grid::Deterministic { a: vec![0.1], b: vec![0.0, 1.0, 2.0] },
            runs: 1,
            master_seed: 0,
        };
        let mut buf = Vec::new();
        write_csv(&run_sweep(&g, &cfg).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("a,b,num,numerr,qav,qaverr,aborts,pmax\n0.1,0,"));
    }
}
