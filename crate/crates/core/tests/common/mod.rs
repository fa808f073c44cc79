#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use ssmtsp_core::{
    derive_seed, gen_adversarial_no_savings, gen_random_instance, GenParams, Instance, InstanceMeta,
};

pub const ADVERSARIAL_COUNT: usize = 50;

fn build(adj: Vec<Vec<(usize, f64)>>, source: usize, targets: &[usize]) -> Instance {
    let mut is_target = vec![false; adj.len()];
    for &t in targets {
        is_target[t] = true;
    }
    Instance::from_adjacency(adj, source, is_target, InstanceMeta::default()).unwrap()
}

/// Layered graph where every edge has the same weight, so labels tie everywhere.
fn ties(layers: usize, width: usize, w: f64) -> Instance {
    let n = 1 + layers * width;
    let mut adj = vec![Vec::new(); n];
    let id = |l: usize, i: usize| 1 + l * width + i;
    for i in 0..width {
        adj[0].push((id(0, i), w));
    }
    for l in 0..layers - 1 {
        for i in 0..width {
            for j in 0..width {
                adj[id(l, i)].push((id(l + 1, j), w));
            }
        }
    }
    let targets: Vec<usize> = (0..width).map(|i| id(layers - 1, i)).collect();
    build(adj, 0, &targets)
}

/// A light chain of `len` edges to one target next to a heavy direct edge to
/// another, with a fan of heavy edges hanging off every chain node.
fn lure(len: usize, fan: usize, heavy: f64) -> Instance {
    let n = 2 + len + len * fan;
    let mut adj = vec![Vec::new(); n];
    let chain_end = len;
    let decoy = len + 1;
    let mut next = len + 2;
    adj[0].push((decoy, heavy));
    for (u, edges) in adj.iter_mut().enumerate().take(len) {
        edges.push((u + 1, 0.9 / len as f64));
        for _ in 0..fan {
            edges.push((next, heavy * 0.5 + 0.01 * u as f64));
            next += 1;
        }
    }
    build(adj, 0, &[chain_end, decoy])
}

/// Random sparse graph with all weights zero.
fn zero_weights(n: usize, seed: u64) -> Instance {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    for (u, out) in adj.iter_mut().enumerate() {
        for v in 0..n {
            if v != u && rng.random::<f64>() < 3.0 / n as f64 {
                out.push((v, 0.0));
            }
        }
    }
    let t = n - 1;
    adj[0].push((1, 0.0));
    adj[1].push((t, 0.0));
    build(dedup(adj), 0, &[t])
}

fn dedup(mut adj: Vec<Vec<(usize, f64)>>) -> Vec<Vec<(usize, f64)>> {
    for out in &mut adj {
        out.sort_by_key(|e| e.0);
        out.dedup_by_key(|e| e.0);
    }
    adj
}

fn degenerate(k: usize) -> Instance {
    match k {
        0 => build(vec![vec![(1, 0.3)], vec![]], 0, &[0]),
        1 => build(vec![vec![(1, 0.3)], vec![]], 0, &[]),
        2 => build(vec![vec![(1, 0.3)], vec![], vec![]], 0, &[2]),
        3 => build(vec![vec![]], 0, &[]),
        _ => build(
            vec![vec![(1, 1.0), (2, 0.0)], vec![], vec![(1, 1.0)]],
            0,
            &[1],
        ),
    }
}

/// Fifty hand-made instances: the no-savings family, tie-heavy layers, lure
/// chains, zero-weight graphs and degenerate sources.
pub fn adversarial_fixtures() -> Vec<Instance> {
    let mut out = Vec::with_capacity(ADVERSARIAL_COUNT);
    for k in 0..20 {
        out.push(gen_adversarial_no_savings(0.045 * k as f64, 1 + 3 * k).unwrap());
    }
    for k in 0..10 {
        let w = [0.0, 0.25, 0.5, 1.0][k % 4];
        out.push(ties(2 + k % 4, 2 + k / 2, w));
    }
    for k in 0..10 {
        out.push(lure(2 + k, 1 + k % 4, 0.5 + 0.05 * k as f64));
    }
    for k in 0..5 {
        out.push(zero_weights(10 + 8 * k, k as u64));
    }
    for k in 0..5 {
        out.push(degenerate(k));
    }
    assert_eq!(out.len(), ADVERSARIAL_COUNT);
    out
}

/// Unfiltered random instance with `n <= 200` and seeded `c`, `f`.
pub fn small_random(base: u64, stream: u64, k: u64) -> Instance {
    let seed = derive_seed(base, stream, k);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = rng.random_range(2..=200usize);
    let c = rng.random_range(0.5..8.0f64).min(n as f64 - 0.5);
    let f = rng
        .random_range(0.5..(n as f64 / 5.0).max(1.0))
        .min(n as f64);
    gen_random_instance(&GenParams::new(n, c, f, seed)).unwrap()
}
