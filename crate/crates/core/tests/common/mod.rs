#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheaf_communities::{Graph, Partition};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi graph on `n ≥ 2` vertices, patched so that no vertex is isolated.
pub fn random_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let mut deg = vec![0usize; n];
    for &(u, v) in &edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    for v in 0..n {
        if deg[v] == 0 {
            let others: Vec<usize> = (0..n).filter(|&w| w != v).collect();
            let w = *others.choose(rng).unwrap();
            edges.push((v.min(w), v.max(w)));
            deg[v] += 1;
            deg[w] += 1;
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Graph that may contain isolated vertices and several components.
pub fn sparse_graph<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let density = rng.random_range(0.0..0.5);
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(density)).collect();
    Graph::new(n, edges).unwrap()
}

pub fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Partition {
    let k = rng.random_range(1..=n);
    Partition::from_labels((0..n).map(|_| rng.random_range(0..k)).collect())
}
