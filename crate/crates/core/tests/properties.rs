mod common;

use std::collections::HashMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sheaf_communities::algorithms::deterministic_edges;
use sheaf_communities::dynamics::evolve_observed;
use sheaf_communities::experiments::{csv_string, derive_seed};
use sheaf_communities::sheaf::numerical_rank;
use sheaf_communities::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::rng;

fn graph_from_mask(n: usize, mask: &[bool], patch_isolated: bool) -> Graph {
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .zip(mask)
        .filter_map(|(e, &keep)| keep.then_some(e))
        .collect();
    if patch_isolated {
        for v in 0..n {
            if !edges.iter().any(|&(a, b)| a == v || b == v) {
                let w = (v + 1) % n;
                edges.push((v.min(w), v.max(w)));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn arb_graph(patch_isolated: bool) -> impl Strategy<Value = Graph> {
    (2usize..12).prop_flat_map(move |n| {
        proptest::collection::vec(proptest::bool::weighted(0.3), n * (n - 1) / 2)
            .prop_map(move |mask| graph_from_mask(n, &mask, patch_isolated))
    })
}

fn arb_graph_with_labels() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    arb_graph(true).prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), proptest::collection::vec(0..n, n))
    })
}

fn random_sheaf<'g>(g: &'g Graph, seed: u64) -> CellularSheaf<'g> {
    let mut r = rng(seed);
    let vertex_dims: Vec<usize> = (0..g.vertex_count()).map(|_| r.random_range(1..=3)).collect();
    let edge_dims: Vec<usize> = (0..g.edge_count()).map(|_| r.random_range(1..=3)).collect();
    let maps = g
        .edges()
        .iter()
        .zip(&edge_dims)
        .map(|(&(u, v), &k)| {
            // integer entries make rank deficiencies likely
            let mut m = |cols| DMatrix::from_fn(k, cols, |_, _| r.random_range(-1..=1) as f64);
            [m(vertex_dims[u]), m(vertex_dims[v])]
        })
        .collect();
    CellularSheaf::new(g, vertex_dims, edge_dims, maps).unwrap()
}

fn permuted(g: &Graph, perm: &[usize]) -> Graph {
    Graph::new(g.vertex_count(), g.edges().iter().map(|&(u, v)| (perm[u], perm[v]))).unwrap()
}

proptest! {
    #[test]
    fn modularity_is_bounded_and_label_invariant((g, labels) in arb_graph_with_labels(), shift in 1usize..50) {
        let p = Partition::from_labels(labels.clone());
        let q = modularity(&g, &p).unwrap();
        prop_assert!((-1.0..=1.0).contains(&q));
        let relabeled = Partition::from_labels(labels.iter().map(|&l| l * 7 + shift).collect());
        prop_assert_eq!(&relabeled, &p);
        prop_assert_eq!(modularity(&g, &relabeled).unwrap(), q);
        prop_assert_eq!(modularity(&g, &Partition::single_cluster(g.vertex_count())).unwrap(), 0.0);
    }

    #[test]
    fn components_are_idempotent(g in arb_graph(false)) {
        let comps = g.components();
        let all = vec![true; g.edge_count()];
        prop_assert_eq!(&g.connected_components(&all).unwrap(), &comps);
        let inside: Vec<bool> =
            g.edges().iter().map(|&(u, v)| comps.cluster_of(u) == comps.cluster_of(v)).collect();
        prop_assert_eq!(&g.connected_components(&inside).unwrap(), &comps);
        let none = vec![false; g.edge_count()];
        prop_assert_eq!(g.connected_components(&none).unwrap(), Partition::singletons(g.vertex_count()));
    }

    #[test]
    fn cohomology_obeys_rank_nullity(g in arb_graph(false), seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let s = random_sheaf(&g, seed);
        let h = cohomology_dims(&s);
        prop_assert_eq!(h.h0 as i64 - h.h1 as i64, s.c0_dim() as i64 - s.c1_dim() as i64);
        prop_assert_eq!(numerical_rank(&sheaf_laplacian(&s), None), numerical_rank(&coboundary(&s), None));
    }

    #[test]
    fn constant_sheaf_cohomology_counts_cycles(g in arb_graph(false), n in 1usize..4) {
        prop_assume!(g.edge_count() > 0);
        let s = CellularSheaf::constant(&g, n).unwrap();
        let comps = g.components().cluster_count();
        let h = cohomology_dims(&s);
        prop_assert_eq!(h.h0, n * comps);
        prop_assert_eq!(h.h1, n * (g.edge_count() + comps - g.vertex_count()));
    }

    #[test]
    fn laplacian_ignores_edge_orientation(g in arb_graph(false), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let s = random_sheaf(&g, seed);
        let e = pick.index(g.edge_count());
        let flipped_graph = g.with_edge_flipped(e).unwrap();
        let flipped = s.reoriented(&flipped_graph, e).unwrap();
        let diff = (sheaf_laplacian(&flipped) - sheaf_laplacian(&s)).abs().max();
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn deterministic_retention_is_monotone(
        g in arb_graph(true),
        a in 0.0f64..1.0,
        da in 0.0f64..0.5,
        b in -3.0f64..6.0,
        db in 0.0f64..2.0,
    ) {
        let base = deterministic_edges(&g, a, b);
        let stricter = deterministic_edges(&g, (a + da).min(1.0), b);
        let looser = deterministic_edges(&g, a, b + db);
        for e in 0..g.edge_count() {
            prop_assert!(!stricter[e] || base[e]);
            prop_assert!(!base[e] || looser[e]);
        }
    }

    #[test]
    fn relabeling_vertices_commutes_with_retention(g in arb_graph(true), a in 0.0f64..1.0, b in -2.0f64..5.0, seed in any::<u64>()) {
        let n = g.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut r = rng(seed);
        for i in (1..n).rev() {
            perm.swap(i, r.random_range(0..=i));
        }
        let h = permuted(&g, &perm);
        let kept = deterministic_edges(&g, a, b);
        let kept_h = deterministic_edges(&h, a, b);
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let (pu, pv) = (perm[u].min(perm[v]), perm[u].max(perm[v]));
            let f = h.edges().iter().position(|&x| x == (pu, pv)).unwrap();
            prop_assert_eq!(kept[e], kept_h[f]);
        }
        let p = g.components();
        let mut moved = vec![0; n];
        for v in 0..n {
            moved[perm[v]] = p.cluster_of(v);
        }
        let q = modularity(&g, &p).unwrap();
        let qh = modularity(&h, &Partition::from_labels(moved)).unwrap();
        prop_assert!((q - qh).abs() <= 1e-12);
        prop_assert_eq!(cohomology_dims(&CellularSheaf::constant(&g, 1).unwrap()), cohomology_dims(&CellularSheaf::constant(&h, 1).unwrap()));
    }

    #[test]
    fn merge_scores_rank_like_modularity_gains(edge_count in 1usize..200, degree in 1usize..20, seed in any::<u64>()) {
        let mut r = rng(seed);
        let options: Vec<(usize, usize)> = (0..5).map(|_| (r.random_range(1..=degree), r.random_range(1..400))).collect();
        let m = edge_count as f64;
        let score = |k, s| sheaf_communities::algorithms::singleton_merge_score(edge_count, degree, k, s);
        let gain = |k: usize, s: usize| k as f64 / m - 2.0 * degree as f64 * s as f64 / (4.0 * m * m);
        for &(k, s) in &options {
            prop_assert!((score(k, s) / (2.0 * m * m) - gain(k, s)).abs() <= 1e-12);
        }
        let by_score = options.iter().map(|&(k, s)| score(k, s)).fold(f64::NEG_INFINITY, f64::max);
        let by_gain = options.iter().map(|&(k, s)| gain(k, s)).fold(f64::NEG_INFINITY, f64::max);
        for &(k, s) in &options {
            prop_assert_eq!(score(k, s) == by_score, (gain(k, s) - by_gain).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_preserves_the_mean(g in arb_graph(true), seed in any::<u64>(), phi in 1u32..=4) {
        let s = CellularSheaf::constant(&g, 1).unwrap();
        let mut r = rng(seed);
        let x0: Vec<f64> = (0..g.vertex_count()).map(|_| r.random_range(-1.5..1.5)).collect();
        let total: f64 = x0.iter().sum();
        let x0 = OpinionState::new(&s, x0).unwrap();
        let params = FlowParams { phi: BumpFunction::from_index(phi).unwrap(), t_max: 100.0, ..Default::default() };
        let mut drift = 0.0f64;
        evolve_observed(&s, &x0, &params, |_, x| drift = drift.max((x.iter().sum::<f64>() - total).abs())).unwrap();
        prop_assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn same_seed_same_detection(seed in any::<u64>(), d in 0.5f64..6.0) {
        let g = karate_club();
        let params = ConstantSheafParams { d, ..Default::default() };
        let a = detect_constant(&g, &params, &mut rng(seed)).unwrap();
        let b = detect_constant(&g, &params, &mut rng(seed)).unwrap();
        prop_assert_eq!(a.partition, b.partition);
        prop_assert_eq!(a.modularity, b.modularity);
    }
}

#[test]
fn derived_seeds_do_not_collide_on_small_grids() {
    let mut seen = std::collections::HashSet::new();
    for point in 0..100 {
        for run in 0..100 {
            assert!(seen.insert(derive_seed(1, point, run)));
        }
    }
}

#[test]
fn csv_rows_recompute_from_raw_records() {
    let g = karate_club();
    let cfg = SweepConfig {
        grid: Grid::Constant {
            d: vec![1.0, 3.0, 5.0],
            phi: vec![BumpFunction::Phi1, BumpFunction::Phi3],
            n: vec![1, 2],
            flow: FlowParams::default(),
        },
        runs: 15,
        master_seed: 11,
    };
    let result = run_sweep(&g, &cfg).unwrap();
    let csv = csv_string(&result);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "d,phi,n,num,numerr,qav,qaverr,aborts,pmax");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    for (row, point) in rows.iter().zip(&result.points) {
        let done: Vec<_> = point.records.iter().flatten().collect();
        let aborts = point.records.len() - done.len();
        assert_eq!(row[7].parse::<usize>().unwrap(), aborts);
        if done.is_empty() {
            assert!(row[3..7].iter().all(|f| f.is_empty()));
            continue;
        }
        let n = done.len() as f64;
        let num = done.iter().map(|r| r.cluster_count() as f64).sum::<f64>() / n;
        let qav = done.iter().map(|r| r.modularity).sum::<f64>() / n;
        let sd = (done.iter().map(|r| (r.modularity - qav).powi(2)).sum::<f64>() / n).sqrt();
        let qaverr = sd + aborts as f64 / point.runs as f64 * qav;
        let mut counts: HashMap<&Partition, usize> = HashMap::new();
        for r in &done {
            *counts.entry(&r.partition).or_default() += 1;
        }
        let pmax = *counts.values().max().unwrap() as f64 / point.runs as f64;
        let field = |i: usize| row[i].parse::<f64>().unwrap();
        assert!((field(3) - num).abs() <= 1e-12);
        assert!((field(5) - qav).abs() <= 1e-12);
        assert!((field(6) - qaverr).abs() <= 1e-12);
        assert!((field(8) - pmax).abs() <= 1e-12);
    }
}

#[test]
fn random_retention_matches_edge_projection_flow() {
    let g = Graph::new(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap();
    let d = 1.7;
    let p = edge_keep_probability(d).unwrap();
    let flow = FlowParams::default();
    let runs = 10_000;
    let mut counts: HashMap<Partition, [u64; 2]> = HashMap::new();
    let mut r = rng(12);
    for _ in 0..runs {
        let a = detect_nonconstant(&g, p, &mut r).unwrap().partition.unwrap();
        counts.entry(a).or_default()[0] += 1;
        let b = detect_edge_projection(&g, d, &flow, &mut r).unwrap().partition.unwrap();
        counts.entry(b).or_default()[1] += 1;
    }
    // pool sparse categories so every expected count is at least 5
    let mut cells: Vec<[u64; 2]> = Vec::new();
    let mut rest = [0u64; 2];
    for c in counts.values() {
        if c[0] + c[1] >= 20 {
            cells.push(*c);
        } else {
            rest[0] += c[0];
            rest[1] += c[1];
        }
    }
    if rest[0] + rest[1] > 0 {
        cells.push(rest);
    }
    let total = 2.0 * runs as f64;
    let stat: f64 = cells
        .iter()
        .map(|c| {
            let row = (c[0] + c[1]) as f64;
            c.iter().map(|&o| (o as f64 - row / 2.0).powi(2) / (row / 2.0)).sum::<f64>()
        })
        .sum();
    let dof = (cells.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    assert!(total > 0.0 && p_value > 1e-3, "chi2 = {stat}, dof = {dof}, p = {p_value}");
}
