//! Empirical checks of the savings analysis: relevant-edge identification,
//! the prune-probability lemma, inserted-but-never-removed counts and the
//! closed-form bounds on them, and the uniform order-statistics lemma.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::instances::{AcceptedInstances, GenParams, Instance, InstanceError};
use crate::predict::{
    dijkstra_prediction, dijkstra_prediction_observed, PredictConfig, PredictError, RestartMode,
};
use crate::predictors::ConstantPredictor;
use crate::sssp::{
    bellman_ford_oracle, dijkstra, dijkstra_pruning, min_target_distance, IterEvent, Observer,
};

/// The prose values quoted for the INRR and INRP bounds at `c = 8`,
/// `q = 0.02`, `D = 0.55`, `eps = 0.1`.
pub const QUOTED_INRR_BOUND: f64 = 137.0;
pub const QUOTED_INRP_BOUND: f64 = 63.0;
/// The quoted expectation of INRS for `c = 8`, `q = 0.02`.
pub const QUOTED_INRS: f64 = 350.0;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

/// Additive prediction error `eps` (so `P = D + eps`) and the threshold
/// multiplier `gamma` defining `theta = D + gamma * eps - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsParams {
    pub gamma: f64,
    pub eps: f64,
}

impl BoundsParams {
    pub fn new(gamma: f64, eps: f64) -> Result<Self, BoundsError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(BoundsError::Domain(format!(
                "eps = {eps} must lie in (0, 1]"
            )));
        }
        if gamma.is_nan() || gamma <= 1.0 || gamma * eps > 1.0 + 1e-12 {
            return Err(BoundsError::Domain(format!(
                "gamma = {gamma} must lie in (1, 1/eps = {}]",
                1.0 / eps
            )));
        }
        Ok(Self { gamma, eps })
    }

    pub fn theta(&self, d: f64) -> f64 {
        d + self.gamma * self.eps - 1.0
    }

    /// Lower bound `1 - 1/gamma` on the prune probability of a relevant edge.
    pub fn prune_bound(&self) -> f64 {
        1.0 - 1.0 / self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelevantEdge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
    /// Exact distance of the tail.
    pub tail_dist: f64,
}

/// Edges with `theta <= dist[u] <= d` and `dist[u] + w > d`.
pub fn identify_l_theta(inst: &Instance, dist: &[f64], theta: f64, d: f64) -> Vec<RelevantEdge> {
    inst.edges()
        .filter(|&(u, _, w)| theta <= dist[u] && dist[u] <= d && dist[u] + w > d)
        .map(|(u, v, w)| RelevantEdge {
            tail: u,
            head: v,
            weight: w,
            tail_dist: dist[u],
        })
        .collect()
}

#[derive(Default)]
struct PruneRecorder {
    pruned: HashSet<(usize, usize)>,
    settled: Vec<usize>,
}

impl Observer for PruneRecorder {
    fn on_iteration(&mut self, event: &IterEvent) {
        self.settled.push(event.node);
    }

    fn on_prune(&mut self, tail: usize, head: usize, _tent: f64) {
        self.pruned.insert((tail, head));
    }
}

/// Relevant edges of one instance whose tail was scanned, each flagged with
/// whether the prediction run with `P = D + eps` pruned it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstancePrunes {
    pub d: f64,
    pub edges: Vec<(RelevantEdge, bool)>,
}

/// Runs the naive-mode prediction search with the constant prediction
/// `D + eps` in force from the first scan (`i0 = 1`, `alpha = 1`) and reports
/// which relevant edges it pruned. Edges leaving the settled target are never
/// scanned and are left out.
pub fn lemma1_instance(
    inst: &Instance,
    bounds: &BoundsParams,
) -> Result<InstancePrunes, BoundsError> {
    let dist = bellman_ford_oracle(inst);
    let d = min_target_distance(inst, &dist);
    if !d.is_finite() {
        return Err(BoundsError::Domain(
            "instance has no reachable target".into(),
        ));
    }
    let mut rec = PruneRecorder::default();
    let cfg = PredictConfig::new(1, 1.0, 2.0, RestartMode::Naive);
    dijkstra_prediction_observed(inst, &ConstantPredictor(d + bounds.eps), cfg, &mut rec)?;
    let mut scanned = vec![false; inst.node_count()];
    for &u in &rec.settled {
        scanned[u] = !inst.is_target(u);
    }
    let edges = identify_l_theta(inst, &dist, bounds.theta(d), d)
        .into_iter()
        .filter(|e| scanned[e.tail])
        .map(|e| (e, rec.pruned.contains(&(e.tail, e.head))))
        .collect();
    Ok(InstancePrunes { d, edges })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub runs: usize,
    pub gamma: f64,
    pub eps: f64,
    /// Pooled number of relevant edges.
    pub edges: usize,
    pub pruned: usize,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub std_err: f64,
    pub bound: f64,
    /// Fewer than 30 pooled edges: the frequency is not meaningful.
    pub insufficient: bool,
    pub pass: bool,
    /// Chi-squared statistic and p-value of `(tent - D) / (d(u) + 1 - D)`
    /// against `U[0, 1]` over 10 bins; absent with fewer than 50 edges.
    pub uniform_chi2: Option<f64>,
    pub uniform_p: Option<f64>,
    /// Runs whose relevant-edge count meets `(1 - 1/gamma)|L| >= 8 ln n`,
    /// and how many of them pruned at least half the expected number.
    pub chernoff_eligible: usize,
    pub chernoff_successes: usize,
}

pub const MIN_LEMMA1_EDGES: usize = 30;
pub const UNIFORMITY_BINS: usize = 10;

pub fn lemma1_monte_carlo(
    params: &GenParams,
    bounds: &BoundsParams,
    runs: usize,
    base_seed: u64,
) -> Result<Lemma1Report, BoundsError> {
    let instances = AcceptedInstances::new(*params, base_seed, 0x4c31)?.take(runs);
    lemma1_over(instances, params.n, bounds)
}

/// Pools [`lemma1_instance`] over the given instances.
pub fn lemma1_over<I>(
    instances: I,
    n: usize,
    bounds: &BoundsParams,
) -> Result<Lemma1Report, BoundsError>
where
    I: IntoIterator<Item = Instance>,
{
    let mut runs = 0;
    let mut edges = 0;
    let mut pruned = 0;
    let mut bins = [0u64; UNIFORMITY_BINS];
    let mut eligible = 0;
    let mut successes = 0;
    let half_bound = 0.5 * bounds.prune_bound();
    for inst in instances {
        let rep = lemma1_instance(&inst, bounds)?;
        runs += 1;
        let l = rep.edges.len();
        let x = rep.edges.iter().filter(|(_, p)| *p).count();
        edges += l;
        pruned += x;
        if bounds.prune_bound() * l as f64 >= 8.0 * (n as f64).ln() {
            eligible += 1;
            if x as f64 >= half_bound * l as f64 {
                successes += 1;
            }
        }
        for (e, _) in &rep.edges {
            let z = (e.tail_dist + e.weight - rep.d) / (e.tail_dist + 1.0 - rep.d);
            let b = ((z * UNIFORMITY_BINS as f64) as usize).min(UNIFORMITY_BINS - 1);
            bins[b] += 1;
        }
    }
    let frequency = if edges > 0 {
        pruned as f64 / edges as f64
    } else {
        f64::NAN
    };
    let std_err = if edges > 0 {
        (frequency * (1.0 - frequency) / edges as f64).sqrt()
    } else {
        f64::NAN
    };
    let bound = bounds.prune_bound();
    let insufficient = edges < MIN_LEMMA1_EDGES;
    let (uniform_chi2, uniform_p) = if edges >= 5 * UNIFORMITY_BINS {
        let expected = edges as f64 / UNIFORMITY_BINS as f64;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        let dist =
            ChiSquared::new((UNIFORMITY_BINS - 1) as f64).expect("positive degrees of freedom");
        (Some(chi2), Some(1.0 - dist.cdf(chi2)))
    } else {
        (None, None)
    };
    Ok(Lemma1Report {
        runs,
        gamma: bounds.gamma,
        eps: bounds.eps,
        edges,
        pruned,
        frequency,
        std_err,
        bound,
        insufficient,
        pass: !insufficient && frequency >= bound - 3.0 * std_err,
        uniform_chi2,
        uniform_p,
        chernoff_eligible: eligible,
        chernoff_successes: successes,
    })
}

/// `(1/q)(1 + ln(c - 1))`.
pub fn inrr_bound(c: f64, q: f64) -> Result<f64, BoundsError> {
    check_cq(c, q)?;
    Ok((1.0 + (c - 1.0).ln()) / q)
}

/// `(1/q)(1 + ln(c - 1) - ln((1 - D) / eps))`.
pub fn inrp_bound(c: f64, q: f64, d: f64, eps: f64) -> Result<f64, BoundsError> {
    check_cq(c, q)?;
    if !(0.0..1.0).contains(&d) {
        return Err(BoundsError::Domain(format!("D = {d} must lie in [0, 1)")));
    }
    if !(eps > 0.0 && eps <= 1.0 - d) {
        return Err(BoundsError::Domain(format!(
            "eps = {eps} must lie in (0, 1 - D = {}]",
            1.0 - d
        )));
    }
    Ok((1.0 + (c - 1.0).ln() - ((1.0 - d) / eps).ln()) / q)
}

fn check_cq(c: f64, q: f64) -> Result<(), BoundsError> {
    if c.is_nan() || c <= 1.0 || !c.is_finite() {
        return Err(BoundsError::Domain(format!("c = {c} must exceed 1")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(BoundsError::Domain(format!("q = {q} must lie in (0, 1)")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InrReport {
    pub runs: usize,
    pub eps: f64,
    pub c: f64,
    pub q: f64,
    pub inrs: Vec<u64>,
    pub inrr: Vec<u64>,
    pub inrp: Vec<u64>,
    pub mean_d: f64,
    pub mean_inrs: f64,
    pub mean_inrr: f64,
    pub mean_inrp: f64,
    pub inrr_bound: f64,
    /// `inrp_bound` evaluated at the sample mean of `D`.
    pub inrp_bound: f64,
    /// Instances violating `INRP <= INRR <= INRS`.
    pub ordering_violations: usize,
}

/// Inserted-but-never-removed counts per instance for Dijkstra, Dijkstra-Pruning
/// and smart Dijkstra-Prediction with `P = D + eps` from the first scan.
pub fn inr_for_instance(inst: &Instance, eps: f64) -> Result<(f64, u64, u64, u64), BoundsError> {
    let plain = dijkstra(inst);
    let d = plain.distance;
    let pruning = dijkstra_pruning(inst, 0);
    let cfg = PredictConfig::new(1, 1.0, 2.0, RestartMode::Smart);
    let pred = dijkstra_prediction(inst, &ConstantPredictor(d + eps), cfg)?;
    Ok((d, plain.stats.inr, pruning.stats.inr, pred.stats.inr))
}

pub fn measure_inr(
    params: &GenParams,
    eps: f64,
    runs: usize,
    base_seed: u64,
) -> Result<InrReport, BoundsError> {
    let instances = AcceptedInstances::new(*params, base_seed, 0x494e52)?.take(runs);
    measure_inr_over(instances, params.c, params.f / params.n as f64, eps)
}

pub fn measure_inr_over<I>(instances: I, c: f64, q: f64, eps: f64) -> Result<InrReport, BoundsError>
where
    I: IntoIterator<Item = Instance>,
{
    let mut inrs = Vec::new();
    let mut inrr = Vec::new();
    let mut inrp = Vec::new();
    let mut sum_d = 0.0;
    let mut violations = 0;
    for inst in instances {
        let (d, s, r, p) = inr_for_instance(&inst, eps)?;
        sum_d += d;
        if !(p <= r && r <= s) {
            violations += 1;
        }
        inrs.push(s);
        inrr.push(r);
        inrp.push(p);
    }
    let runs = inrs.len();
    if runs == 0 {
        return Err(BoundsError::Domain("no runs".into()));
    }
    let mean = |v: &[u64]| v.iter().sum::<u64>() as f64 / runs as f64;
    let mean_d = sum_d / runs as f64;
    Ok(InrReport {
        runs,
        eps,
        c,
        q,
        mean_d,
        mean_inrs: mean(&inrs),
        mean_inrr: mean(&inrr),
        mean_inrp: mean(&inrp),
        inrr_bound: inrr_bound(c, q)?,
        inrp_bound: inrp_bound(c, q, mean_d, eps.min(1.0 - mean_d))?,
        ordering_violations: violations,
        inrs,
        inrr,
        inrp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaReport {
    pub k: usize,
    pub trials: u64,
    pub estimate: f64,
    pub std_err: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Closed-form bound `(1/(k+1))(1 - (1 - (P-a)/(b_k-a))^(k+1))` for
/// `bs = [b_1, ..., b_{k+1}]`; `k = 0` uses `b_1` in place of `b_0`.
pub fn key_lemma_bound(a: f64, bs: &[f64], p: f64) -> Result<f64, BoundsError> {
    check_key_lemma(a, bs, p)?;
    let k = bs.len() - 1;
    let bk = if k == 0 { bs[0] } else { bs[k - 1] };
    let r = 1.0 - (p - a) / (bk - a);
    Ok((1.0 - r.powi(k as i32 + 1)) / (k + 1) as f64)
}

fn check_key_lemma(a: f64, bs: &[f64], p: f64) -> Result<(), BoundsError> {
    let first = *bs
        .first()
        .ok_or_else(|| BoundsError::Domain("no upper ends given".into()))?;
    if !(a < p && p < first) {
        return Err(BoundsError::Domain(format!(
            "need a < P < b_1, got a = {a}, P = {p}, b_1 = {first}"
        )));
    }
    if bs.windows(2).any(|w| w[0].is_nan() || w[0] > w[1]) || bs.iter().any(|b| !b.is_finite()) {
        return Err(BoundsError::Domain(
            "upper ends must be finite and non-decreasing".into(),
        ));
    }
    Ok(())
}

/// Monte-Carlo estimate of `Pr[X_{k+1} <= X_j for all j <= k, X_{k+1} <= P]`
/// with `X_j ~ U[a, b_j]`, compared against [`key_lemma_bound`] plus three
/// standard errors.
pub fn key_lemma_check(
    a: f64,
    bs: &[f64],
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<KeyLemmaReport, BoundsError> {
    let bound = key_lemma_bound(a, bs, p)?;
    if trials == 0 {
        return Err(BoundsError::Domain("trials must be positive".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let (last, rest) = bs.split_last().expect("validated non-empty");
    let mut hits = 0u64;
    for _ in 0..trials {
        let x = a + rng.random::<f64>() * (last - a);
        if x > p {
            continue;
        }
        if rest.iter().all(|&b| x <= a + rng.random::<f64>() * (b - a)) {
            hits += 1;
        }
    }
    let estimate = hits as f64 / trials as f64;
    let std_err = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(KeyLemmaReport {
        k: bs.len() - 1,
        trials,
        estimate,
        std_err,
        bound,
        pass: estimate <= bound + 3.0 * std_err,
    })
}
