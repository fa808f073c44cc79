//! Problem instances: random generation, the no-savings adversarial family,
//! acceptance filtering and the line-oriented text format.
//!
//! Random instances follow the directed G(n, p) model with `p = c / n`, every
//! node a target with probability `q = f / n`, and edge weights drawn
//! uniformly from `[0, 1)`. All randomness comes from [`Xoshiro256PlusPlus`]
//! seeded through SplitMix64 (`seed_from_u64`), which is fully specified and
//! produces the same stream on every platform.
//!
//! Draw order for one instance: `n` target draws (node 0 first), then for
//! every tail `u` in increasing order and every head `v != u` in increasing
//! order one Bernoulli draw, followed by one weight draw if the edge exists.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

use crate::sssp;

pub type InstanceRng = Xoshiro256PlusPlus;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("line {line}: {msg} (`{record}`)")]
    Parse {
        line: usize,
        record: String,
        msg: String,
    },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
}

/// Generation provenance. `c` and `f` are unknown for loaded instances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InstanceMeta {
    pub c: Option<f64>,
    pub f: Option<f64>,
    pub seed: u64,
}

/// Directed graph with weights in `[0, 1]`, a source and a target set.
///
/// Adjacency is stored in compressed rows: the out-edges of `u` occupy
/// `offsets[u]..offsets[u + 1]` of `heads` and `weights`.
#[derive(Debug, Clone)]
pub struct Instance {
    n: usize,
    offsets: Vec<u32>,
    heads: Vec<u32>,
    weights: Vec<f64>,
    source: usize,
    is_target: Vec<bool>,
    pub meta: InstanceMeta,
}

impl PartialEq for Instance {
    // c and f are provenance only; the text format does not carry them.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.offsets == other.offsets
            && self.heads == other.heads
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.source == other.source
            && self.is_target == other.is_target
            && self.meta.seed == other.meta.seed
    }
}

impl Instance {
    /// Builds an instance from per-node out-edge lists, checking every invariant
    /// except target reachability (that one is a property of accepted instances).
    pub fn from_adjacency(
        adjacency: Vec<Vec<(usize, f64)>>,
        source: usize,
        is_target: Vec<bool>,
        meta: InstanceMeta,
    ) -> Result<Self, InstanceError> {
        let n = adjacency.len();
        if n == 0 {
            return Err(InstanceError::Invalid("graph has no nodes".into()));
        }
        if n > u32::MAX as usize {
            return Err(InstanceError::Invalid(format!("{n} nodes exceed u32 ids")));
        }
        if source >= n {
            return Err(InstanceError::Invalid(format!(
                "source {source} out of range for {n} nodes"
            )));
        }
        if is_target.len() != n {
            return Err(InstanceError::Invalid(format!(
                "{} target flags for {n} nodes",
                is_target.len()
            )));
        }
        let m: usize = adjacency.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut heads = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let mut seen = vec![usize::MAX; n];
        offsets.push(0);
        for (u, out) in adjacency.into_iter().enumerate() {
            for (v, w) in out {
                if v >= n {
                    return Err(InstanceError::Invalid(format!(
                        "edge {u}->{v} head out of range"
                    )));
                }
                if v == u {
                    return Err(InstanceError::Invalid(format!("self-loop at node {u}")));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(InstanceError::Invalid(format!(
                        "edge {u}->{v} weight {w} outside [0, 1]"
                    )));
                }
                if seen[v] == u {
                    return Err(InstanceError::Invalid(format!("duplicate edge {u}->{v}")));
                }
                seen[v] = u;
                heads.push(v as u32);
                weights.push(w);
            }
            offsets.push(heads.len() as u32);
        }
        Ok(Self {
            n,
            offsets,
            heads,
            weights,
            source,
            is_target,
            meta,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.heads.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.is_target[v]
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.is_target
            .iter()
            .enumerate()
            .filter_map(|(v, &t)| t.then_some(v))
    }

    pub fn target_count(&self) -> usize {
        self.is_target.iter().filter(|&&t| t).count()
    }

    #[inline]
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.offsets[u] as usize;
        let hi = self.offsets[u + 1] as usize;
        self.heads[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&v, &w)| (v as usize, w))
    }

    pub fn out_degree(&self, u: usize) -> usize {
        (self.offsets[u + 1] - self.offsets[u]) as usize
    }

    /// All edges as `(tail, head, weight)` in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| self.out_edges(u).map(move |(v, w)| (u, v, w)))
    }

    /// Whether some target can be reached from the source (plain BFS).
    pub fn target_reachable(&self) -> bool {
        min_hops_to_target(self).is_some()
    }
}

/// Smallest number of edges on any source-to-target path.
pub fn min_hops_to_target(inst: &Instance) -> Option<usize> {
    let mut hops = vec![usize::MAX; inst.n];
    let mut queue = VecDeque::new();
    hops[inst.source] = 0;
    queue.push_back(inst.source);
    while let Some(u) = queue.pop_front() {
        if inst.is_target[u] {
            return Some(hops[u]);
        }
        for (v, _) in inst.out_edges(u) {
            if hops[v] == usize::MAX {
                hops[v] = hops[u] + 1;
                queue.push_back(v);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub c: f64,
    pub f: f64,
    pub seed: u64,
    pub min_iterations: usize,
}

impl GenParams {
    pub fn new(n: usize, c: f64, f: f64, seed: u64) -> Self {
        Self {
            n,
            c,
            f,
            seed,
            min_iterations: 10,
        }
    }

    /// The experiment parameters: n = 1000, c = 8, f = 20.
    pub fn standard(seed: u64) -> Self {
        Self::new(1000, 8.0, 20.0, seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::InvalidParams(m));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.c.is_nan() || self.c <= 0.0 || self.c >= self.n as f64 {
            return bad(format!("c = {} must lie in (0, n)", self.c));
        }
        if self.f.is_nan() || self.f <= 0.0 || self.f > self.n as f64 {
            return bad(format!("f = {} must lie in (0, n]", self.f));
        }
        Ok(())
    }
}

/// Threshold `t` such that `next_u64() < t` has probability `p` (to 2^-64).
fn bernoulli_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

#[inline]
fn bernoulli(rng: &mut InstanceRng, threshold: Option<u64>) -> bool {
    match threshold {
        None => {
            rng.next_u64();
            true
        }
        Some(t) => rng.next_u64() < t,
    }
}

pub fn gen_random_instance(params: &GenParams) -> Result<Instance, InstanceError> {
    params.validate()?;
    let n = params.n;
    let mut rng = InstanceRng::seed_from_u64(params.seed);
    let target_t = bernoulli_threshold(params.f / n as f64);
    let edge_t = bernoulli_threshold(params.c / n as f64);

    let is_target: Vec<bool> = (0..n).map(|_| bernoulli(&mut rng, target_t)).collect();

    let expected_m = (params.c * (n - 1) as f64 * 1.1) as usize + 16;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut heads = Vec::with_capacity(expected_m);
    let mut weights = Vec::with_capacity(expected_m);
    offsets.push(0u32);
    for u in 0..n {
        for v in 0..n {
            if v == u {
                continue;
            }
            if bernoulli(&mut rng, edge_t) {
                heads.push(v as u32);
                weights.push(rng.random::<f64>());
            }
        }
        offsets.push(heads.len() as u32);
    }
    Ok(Instance {
        n,
        offsets,
        heads,
        weights,
        source: 0,
        is_target,
        meta: InstanceMeta {
            c: Some(params.c),
            f: Some(params.f),
            seed: params.seed,
        },
    })
}

/// True iff a target is reachable and Dijkstra-Pruning removes strictly more
/// than `min_iterations` nodes from its queue (the final target included).
pub fn accept_instance(inst: &Instance, min_iterations: usize) -> bool {
    if !inst.target_reachable() {
        return false;
    }
    let run = sssp::dijkstra_pruning(inst, 0);
    run.stats.settled > min_iterations as u64
}

/// Mixes a base seed with a stream tag and an index into a fresh 64-bit seed.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(base) ^ stream) ^ index)
}

/// Iterator over accepted random instances for seeds `derive_seed(base, stream, k)`,
/// `k = 0, 1, ...`. Rejected candidates are skipped.
pub struct AcceptedInstances {
    params: GenParams,
    base: u64,
    stream: u64,
    next_index: u64,
}

impl AcceptedInstances {
    pub fn new(params: GenParams, base: u64, stream: u64) -> Result<Self, InstanceError> {
        params.validate()?;
        Ok(Self {
            params,
            base,
            stream,
            next_index: 0,
        })
    }

    /// Number of candidates drawn so far (accepted and rejected).
    pub fn candidates_drawn(&self) -> u64 {
        self.next_index
    }
}

impl Iterator for AcceptedInstances {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        loop {
            let seed = derive_seed(self.base, self.stream, self.next_index);
            self.next_index += 1;
            let inst = gen_random_instance(&self.params.with_seed(seed)).ok()?;
            if accept_instance(&inst, self.params.min_iterations) {
                return Some(inst);
            }
        }
    }
}

/// The no-savings family: `s -> u1` (weight `eps`), `u1 -> v_i` (weight
/// `1 - eps/2`, `fan_out` non-target heads), and `s -> u2 -> t` with total
/// weight exactly 1, `t` the only target. `u1` settles before `u2`, so the
/// fan edges are scanned while `B` is still infinite, and every fan head ends
/// at distance `1 + eps/2 < D + eps`.
///
/// Node ids: s = 0, u1 = 1, u2 = 2, t = 3, v_i = 4 + i. `eps = 0` gives the
/// perfect-prediction case where fan heads tie with `D`.
pub fn gen_adversarial_no_savings(eps: f64, fan_out: usize) -> Result<Instance, InstanceError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(InstanceError::InvalidParams(format!(
            "eps = {eps} must lie in [0, 1)"
        )));
    }
    let n = 4 + fan_out;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let s_u2 = (1.0 + eps) / 2.0;
    // s_u2 lies in [0.5, 1), so 1 - s_u2 is exact and the path sums to 1.0
    let u2_t = 1.0 - s_u2;
    adj[0].push((1, eps));
    adj[0].push((2, s_u2));
    adj[2].push((3, u2_t));
    let fan_w = 1.0 - eps / 2.0;
    for i in 0..fan_out {
        adj[1].push((4 + i, fan_w));
    }
    let mut is_target = vec![false; n];
    is_target[3] = true;
    Instance::from_adjacency(
        adj,
        0,
        is_target,
        InstanceMeta {
            c: None,
            f: None,
            seed: 0,
        },
    )
}

/// Formats `x` with 17 significant decimal digits in positional notation.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn save_instance(inst: &Instance) -> String {
    let mut out = String::with_capacity(32 * inst.edge_count() + 64);
    writeln!(
        out,
        "ssmtsp 1 {} {} {} {}",
        inst.n,
        inst.edge_count(),
        inst.source,
        inst.meta.seed
    )
    .unwrap();
    for t in inst.targets() {
        writeln!(out, "t {t}").unwrap();
    }
    for (u, v, w) in inst.edges() {
        writeln!(out, "e {u} {v} {}", format_sig17(w)).unwrap();
    }
    out
}

pub fn load_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, record: &str, msg: &str| InstanceError::Parse {
        line: line + 1,
        record: record.to_string(),
        msg: msg.to_string(),
    };

    let (hline, header) = lines
        .next()
        .ok_or_else(|| InstanceError::Truncated("missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "ssmtsp" {
        return Err(perr(
            hline,
            header,
            "expected `ssmtsp 1 <n> <m> <source> <seed>`",
        ));
    }
    if fields[1] != "1" {
        return Err(perr(hline, header, "unsupported format version"));
    }
    let num = |s: &str, what: &str| -> Result<u64, InstanceError> {
        s.parse::<u64>()
            .map_err(|_| perr(hline, header, &format!("bad {what}")))
    };
    let n = num(fields[2], "node count")? as usize;
    let m = num(fields[3], "edge count")? as usize;
    let source = num(fields[4], "source")? as usize;
    let seed = num(fields[5], "seed")?;
    if n == 0 || source >= n {
        return Err(perr(hline, header, "source out of range"));
    }

    let mut is_target = vec![false; n];
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut seen_edges = 0usize;
    let mut in_edges = false;
    let mut last_tail = 0usize;
    let mut seen_heads = vec![usize::MAX; n];
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let node = |s: &str| -> Result<usize, InstanceError> {
            let v = s
                .parse::<usize>()
                .map_err(|_| perr(ln, line, "bad node id"))?;
            if v >= n {
                return Err(perr(ln, line, "node id out of range"));
            }
            Ok(v)
        };
        match parts.as_slice() {
            ["t", id] => {
                if in_edges {
                    return Err(perr(ln, line, "target record after edge records"));
                }
                let v = node(id)?;
                if is_target[v] {
                    return Err(perr(ln, line, "duplicate target"));
                }
                is_target[v] = true;
            }
            ["e", tail, head, weight] => {
                in_edges = true;
                let u = node(tail)?;
                let v = node(head)?;
                let w: f64 = weight.parse().map_err(|_| perr(ln, line, "bad weight"))?;
                if u == v {
                    return Err(perr(ln, line, "self-loop"));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(perr(ln, line, "weight outside [0, 1]"));
                }
                if u < last_tail {
                    return Err(perr(ln, line, "edges not grouped by tail"));
                }
                last_tail = u;
                if seen_heads[v] == u {
                    return Err(perr(ln, line, "duplicate edge"));
                }
                seen_heads[v] = u;
                adj[u].push((v, w));
                seen_edges += 1;
                if seen_edges > m {
                    return Err(perr(ln, line, "more edges than the header declares"));
                }
            }
            _ => return Err(perr(ln, line, "unrecognised record")),
        }
    }
    if seen_edges != m {
        return Err(InstanceError::Truncated(format!(
            "header declares {m} edges, found {seen_edges}"
        )));
    }
    Instance::from_adjacency(
        adj,
        source,
        is_target,
        InstanceMeta {
            c: None,
            f: None,
            seed,
        },
    )
}
