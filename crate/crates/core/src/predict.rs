//! Dijkstra-Prediction with naive and smart restarts, and the lockstep
//! verifier that compares the smart variant against Dijkstra-Pruning.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::Instance;
use crate::pq::AddressablePq;
use crate::predictors::{Predictor, PredictorError};
use crate::sssp::{IterEvent, Observer, PruningSearch, RunStats, Step, Trace};

/// Predictions at or below zero are replaced by this value.
pub const PREDICTION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestartMode {
    Naive,
    Smart,
}

impl fmt::Display for RestartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestartMode::Naive => "naive",
            RestartMode::Smart => "smart",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictConfig {
    pub i0: usize,
    /// Inflation applied to the first prediction.
    pub alpha: f64,
    /// Inflation applied at every restart.
    pub beta: f64,
    pub restart: RestartMode,
}

impl PredictConfig {
    pub fn new(i0: usize, alpha: f64, beta: f64, restart: RestartMode) -> Self {
        Self {
            i0,
            alpha,
            beta,
            restart,
        }
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        if self.i0 == 0 {
            return Err(PredictError::Config("i0 must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha < 1.0 || !self.alpha.is_finite() {
            return Err(PredictError::Config(format!(
                "alpha = {} must be finite and at least 1",
                self.alpha
            )));
        }
        if self.beta.is_nan() || self.beta <= 1.0 || !self.beta.is_finite() {
            return Err(PredictError::Config(format!(
                "beta = {} must be finite and greater than 1",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("prediction failed: {0}")]
    Predictor(#[from] PredictorError),
}

/// Nodes with a finite label that are held back from the queue.
#[derive(Debug, Clone)]
pub struct ReserveSet {
    members: Vec<usize>,
    pos: Vec<usize>,
}

impl ReserveSet {
    const ABSENT: usize = usize::MAX;

    pub fn with_capacity(n: usize) -> Self {
        Self {
            members: Vec::new(),
            pos: vec![Self::ABSENT; n],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.pos[v] != Self::ABSENT
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Returns false if `v` was already present.
    pub fn insert(&mut self, v: usize) -> bool {
        if self.contains(v) {
            return false;
        }
        self.pos[v] = self.members.len();
        self.members.push(v);
        true
    }

    /// Returns false if `v` was absent.
    pub fn remove(&mut self, v: usize) -> bool {
        let at = self.pos[v];
        if at == Self::ABSENT {
            return false;
        }
        self.members.swap_remove(at);
        if let Some(&moved) = self.members.get(at) {
            self.pos[moved] = at;
        }
        self.pos[v] = Self::ABSENT;
        true
    }
}

#[derive(Debug, Clone)]
pub struct PredictionRun {
    pub distance: f64,
    pub stats: RunStats,
    /// Raw predictor output, if the run lasted `i0` iterations.
    pub raw_prediction: Option<f64>,
    /// The pruning prediction in force when the run ended.
    pub final_prediction: f64,
}

/// Dijkstra-Prediction advanced one Remove-Min at a time.
pub struct PredictionSearch<'a> {
    inst: &'a Instance,
    predictor: &'a dyn Predictor,
    cfg: PredictConfig,
    d: Vec<f64>,
    pq: AddressablePq,
    reserve: ReserveSet,
    bound: f64,
    prediction: f64,
    raw_prediction: Option<f64>,
    i: usize,
    trace: Trace,
    trials: u64,
    removals: u64,
    settled_in_trial: u64,
    discarded_by_p: bool,
    rrm1: u64,
    rrm2: u64,
    ris: u64,
    rdp: u64,
    pruned: u64,
    outcome: Option<f64>,
}

impl<'a> PredictionSearch<'a> {
    pub fn new(
        inst: &'a Instance,
        predictor: &'a dyn Predictor,
        cfg: PredictConfig,
    ) -> Result<Self, PredictError> {
        cfg.validate()?;
        let n = inst.node_count();
        let mut search = Self {
            inst,
            predictor,
            cfg,
            d: vec![f64::INFINITY; n],
            pq: AddressablePq::with_capacity(n),
            reserve: ReserveSet::with_capacity(n),
            bound: f64::INFINITY,
            prediction: f64::INFINITY,
            raw_prediction: None,
            i: 0,
            trace: Trace::new(Vec::with_capacity(cfg.i0)),
            trials: 1,
            removals: 0,
            settled_in_trial: 0,
            discarded_by_p: false,
            rrm1: 0,
            rrm2: 0,
            ris: 0,
            rdp: 0,
            pruned: 0,
            outcome: None,
        };
        search.seed_source();
        Ok(search)
    }

    fn seed_source(&mut self) {
        let s = self.inst.source();
        self.d[s] = 0.0;
        self.pq
            .insert(s, 0.0)
            .expect("source enters an empty queue");
    }

    pub fn labels(&self) -> &[f64] {
        &self.d
    }

    pub fn queue(&self) -> &AddressablePq {
        &self.pq
    }

    pub fn reserve(&self) -> &ReserveSet {
        &self.reserve
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn step(&mut self) -> Result<Step, PredictError> {
        self.step_observed(&mut ())
    }

    /// Performs restarts until the loop condition holds, then one Remove-Min
    /// with its edge scan.
    pub fn step_observed<O: Observer + ?Sized>(
        &mut self,
        obs: &mut O,
    ) -> Result<Step, PredictError> {
        if self.outcome.is_some() {
            return Ok(Step::Exhausted);
        }
        while !self.loop_condition() {
            if self.hopeless() {
                self.outcome = Some(f64::INFINITY);
                return Ok(Step::Exhausted);
            }
            self.restart();
            obs.on_restart(self.trials, self.prediction);
        }
        let (u, du) = self
            .pq
            .remove_min()
            .expect("loop condition implies a non-empty queue");
        self.removals += 1;
        self.settled_in_trial += 1;
        if self.inst.is_target(u) {
            self.pq.sample_size();
            self.outcome = Some(du);
            self.emit(obs, u, du);
            return Ok(Step::Reached { node: u, dist: du });
        }
        self.i += 1;
        if self.i <= self.cfg.i0 {
            self.trace.push(du, self.bound);
        }
        if self.i == self.cfg.i0 {
            let raw = self.predictor.predict(&self.trace)?;
            if raw.is_nan() {
                return Err(PredictorError::NotANumber.into());
            }
            self.raw_prediction = Some(raw);
            self.prediction = self.cfg.alpha * raw.max(PREDICTION_FLOOR);
        }
        match self.cfg.restart {
            RestartMode::Naive => self.scan_naive(obs, u, du),
            RestartMode::Smart => self.scan_smart(obs, u, du),
        }
        self.pq.sample_size();
        self.emit(obs, u, du);
        Ok(Step::Settled { node: u, dist: du })
    }

    fn loop_condition(&self) -> bool {
        self.pq.min_prio().is_ok_and(|m| m <= self.prediction)
    }

    /// True when no sequence of restarts can ever bring a node into the queue.
    fn hopeless(&self) -> bool {
        if !self.pq.is_empty() {
            return false;
        }
        match self.cfg.restart {
            RestartMode::Naive => !self.discarded_by_p,
            RestartMode::Smart => !self
                .reserve
                .members()
                .iter()
                .any(|&v| self.d[v] <= self.bound),
        }
    }

    fn restart(&mut self) {
        self.trials += 1;
        self.prediction *= self.cfg.beta;
        match self.cfg.restart {
            RestartMode::Naive => {
                self.d.iter_mut().for_each(|x| *x = f64::INFINITY);
                self.pq.clear();
                self.discarded_by_p = false;
                self.settled_in_trial = 0;
                self.seed_source();
            }
            RestartMode::Smart => {
                let limit = self.bound.min(self.prediction);
                let moving: Vec<usize> = self
                    .reserve
                    .members()
                    .iter()
                    .copied()
                    .filter(|&v| self.d[v] <= limit)
                    .collect();
                for v in moving {
                    self.reserve.remove(v);
                    self.pq
                        .insert(v, self.d[v])
                        .expect("reserve nodes are not queued");
                    self.rrm2 += 1;
                }
            }
        }
    }

    fn scan_naive<O: Observer + ?Sized>(&mut self, obs: &mut O, u: usize, du: f64) {
        for (v, w) in self.inst.out_edges(u) {
            let tent = du + w;
            if tent > self.bound.min(self.prediction) {
                self.pruned += 1;
                if tent <= self.bound {
                    self.discarded_by_p = true;
                }
                obs.on_prune(u, v, tent);
                continue;
            }
            if self.inst.is_target(v) && tent < self.bound {
                self.bound = tent;
            }
            let dv = self.d[v];
            if dv > tent {
                if dv == f64::INFINITY {
                    self.pq
                        .insert(v, tent)
                        .expect("unlabelled node is not queued");
                } else {
                    self.pq
                        .decrease_prio(v, tent)
                        .expect("labelled node is queued");
                }
                self.d[v] = tent;
            }
        }
    }

    fn scan_smart<O: Observer + ?Sized>(&mut self, obs: &mut O, u: usize, du: f64) {
        for (v, w) in self.inst.out_edges(u) {
            let tent = du + w;
            if tent > self.bound {
                self.pruned += 1;
                obs.on_prune(u, v, tent);
                continue;
            }
            if self.inst.is_target(v) && tent < self.bound {
                self.bound = tent;
            }
            self.relax_smart(v, tent);
        }
    }

    fn relax_smart(&mut self, v: usize, tent: f64) {
        let dv = self.d[v];
        if dv <= tent {
            return;
        }
        if dv == f64::INFINITY {
            if tent <= self.prediction {
                self.pq
                    .insert(v, tent)
                    .expect("unlabelled node is not queued");
            } else {
                self.reserve.insert(v);
                self.ris += 1;
            }
        } else if !self.reserve.contains(v) {
            self.pq
                .decrease_prio(v, tent)
                .expect("labelled node outside the reserve is queued");
        } else if tent > self.prediction {
            self.rdp += 1;
        } else {
            self.reserve.remove(v);
            self.pq
                .insert(v, tent)
                .expect("reserve nodes are not queued");
            self.rrm1 += 1;
        }
        self.d[v] = tent;
    }

    fn emit<O: Observer + ?Sized>(&self, obs: &mut O, node: usize, d_u: f64) {
        obs.on_iteration(&IterEvent {
            iter: self.removals,
            trial: self.trials,
            node,
            d_u,
            bound: self.bound,
            prediction: self.prediction,
            q_size: self.pq.size(),
            r_size: self.reserve.len(),
        });
    }

    pub fn run_to_end<O: Observer + ?Sized>(
        mut self,
        obs: &mut O,
    ) -> Result<PredictionRun, PredictError> {
        while matches!(self.step_observed(obs)?, Step::Settled { .. }) {}
        Ok(self.finish())
    }

    pub fn finish(self) -> PredictionRun {
        let c = self.pq.counters();
        let stats = RunStats {
            rm: c.remove_mins,
            is: c.inserts,
            dp: c.decrease_prios,
            inr: c.inserts - c.remove_mins,
            rrm1: self.rrm1,
            rrm2: self.rrm2,
            ris: self.ris,
            rdp: self.rdp,
            trials: self.trials,
            cum_q: c.cumulative_size,
            distance: self.outcome.unwrap_or(f64::INFINITY),
            settled: self.settled_in_trial,
            pruned: self.pruned,
        };
        PredictionRun {
            distance: stats.distance,
            stats,
            raw_prediction: self.raw_prediction,
            final_prediction: self.prediction,
        }
    }
}

pub fn dijkstra_prediction(
    inst: &Instance,
    predictor: &dyn Predictor,
    cfg: PredictConfig,
) -> Result<PredictionRun, PredictError> {
    PredictionSearch::new(inst, predictor, cfg)?.run_to_end(&mut ())
}

pub fn dijkstra_prediction_observed<O: Observer + ?Sized>(
    inst: &Instance,
    predictor: &dyn Predictor,
    cfg: PredictConfig,
    obs: &mut O,
) -> Result<PredictionRun, PredictError> {
    PredictionSearch::new(inst, predictor, cfg)?.run_to_end(obs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockstepProperty {
    /// Both searches settle the same node.
    SameNode,
    /// The pruning queue equals the prediction queue plus the reserve set,
    /// and every reserve node lies above the prediction or the bound.
    QueueSplit,
    /// Identical tentative distances.
    EqualLabels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockstepFailure {
    pub iteration: u64,
    pub property: LockstepProperty,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockstepReport {
    pub iterations: u64,
    pub failure: Option<LockstepFailure>,
}

impl LockstepReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs the smart prediction search and Dijkstra-Pruning side by side and
/// checks their states after every Remove-Min.
pub fn lockstep_check(
    inst: &Instance,
    predictor: &dyn Predictor,
    cfg: PredictConfig,
) -> Result<LockstepReport, PredictError> {
    let cfg = PredictConfig {
        restart: RestartMode::Smart,
        ..cfg
    };
    let mut smart = PredictionSearch::new(inst, predictor, cfg)?;
    let mut plain = PruningSearch::pruning(inst, f64::INFINITY, 0);
    let mut iteration = 0;
    let fail = |iteration, property, detail| {
        Ok(LockstepReport {
            iterations: iteration,
            failure: Some(LockstepFailure {
                iteration,
                property,
                detail,
            }),
        })
    };
    loop {
        let a = smart.step()?;
        let b = plain.step();
        let done = !matches!(a, Step::Settled { .. });
        if done && matches!(a, Step::Exhausted) && matches!(b, Step::Exhausted) {
            break;
        }
        iteration += 1;
        if a != b {
            return fail(
                iteration,
                LockstepProperty::SameNode,
                format!("{a:?} vs {b:?}"),
            );
        }
        if done {
            break;
        }
        let queued: HashSet<usize> = smart.queue().keys().collect();
        for &v in smart.reserve().members() {
            if queued.contains(&v) {
                return fail(
                    iteration,
                    LockstepProperty::QueueSplit,
                    format!("node {v} is both queued and reserved"),
                );
            }
            let dv = smart.labels()[v];
            if dv <= smart.prediction() && dv <= smart.bound() {
                return fail(
                    iteration,
                    LockstepProperty::QueueSplit,
                    format!(
                        "reserve node {v} has d = {dv} within P = {}",
                        smart.prediction()
                    ),
                );
            }
        }
        let expected: HashSet<usize> = plain.queue().keys().collect();
        let split_len = queued.len() + smart.reserve().len();
        if split_len != expected.len()
            || !queued
                .iter()
                .chain(smart.reserve().members())
                .all(|v| expected.contains(v))
        {
            return fail(
                iteration,
                LockstepProperty::QueueSplit,
                format!(
                    "queue {} + reserve {} vs pruning queue {}",
                    queued.len(),
                    smart.reserve().len(),
                    expected.len()
                ),
            );
        }
        if let Some(v) = (0..inst.node_count()).find(|&v| smart.labels()[v] != plain.labels()[v]) {
            return fail(
                iteration,
                LockstepProperty::EqualLabels,
                format!("node {v}: {} vs {}", smart.labels()[v], plain.labels()[v]),
            );
        }
    }
    Ok(LockstepReport {
        iterations: iteration,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{
        gen_adversarial_no_savings, gen_random_instance, GenParams, InstanceMeta,
    };
    use crate::predictors::ConstantPredictor;
    use crate::sssp::{dijkstra, dijkstra_pruning};

    fn small(seed: u64) -> Instance {
        gen_random_instance(&GenParams::new(300, 8.0, 6.0, seed)).unwrap()
    }

    fn cfg(mode: RestartMode) -> PredictConfig {
        PredictConfig::new(10, 1.0, 1.05, mode)
    }

    fn inst(n: usize, edges: &[(usize, usize, f64)], targets: &[usize]) -> Instance {
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            adj[u].push((v, w));
        }
        let mut is_t = vec![false; n];
        for &t in targets {
            is_t[t] = true;
        }
        Instance::from_adjacency(adj, 0, is_t, InstanceMeta::default()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(cfg(RestartMode::Smart).validate().is_ok());
        assert!(PredictConfig::new(0, 1.0, 1.05, RestartMode::Smart)
            .validate()
            .is_err());
        assert!(PredictConfig::new(10, 0.9, 1.05, RestartMode::Smart)
            .validate()
            .is_err());
        assert!(PredictConfig::new(10, 1.0, 1.0, RestartMode::Naive)
            .validate()
            .is_err());
        assert!(PredictConfig::new(10, 1.0, f64::NAN, RestartMode::Naive)
            .validate()
            .is_err());
    }

    #[test]
    fn reserve_set_bookkeeping() {
        let mut r = ReserveSet::with_capacity(5);
        assert!(r.insert(3));
        assert!(r.insert(1));
        assert!(!r.insert(3));
        assert!(r.insert(4));
        assert!(r.remove(3));
        assert!(!r.remove(3));
        assert!(r.contains(1) && r.contains(4) && !r.contains(3));
        let mut m = r.members().to_vec();
        m.sort();
        assert_eq!(m, vec![1, 4]);
        assert!(r.remove(1) && r.remove(4));
        assert!(r.is_empty());
    }

    #[test]
    fn infinite_prediction_matches_pruning() {
        for seed in 0..500 {
            let g = small(seed);
            let base = dijkstra_pruning(&g, 0).stats;
            for mode in [RestartMode::Naive, RestartMode::Smart] {
                let run =
                    dijkstra_prediction(&g, &ConstantPredictor(f64::INFINITY), cfg(mode)).unwrap();
                let s = run.stats;
                assert_eq!(
                    (s.rm, s.is, s.dp),
                    (base.rm, base.is, base.dp),
                    "seed {seed}"
                );
                assert_eq!(s.distance.to_bits(), base.distance.to_bits());
                assert_eq!(s.trials, 1);
                assert_eq!((s.ris, s.rrm1, s.rrm2, s.rdp), (0, 0, 0, 0));
            }
        }
    }

    #[test]
    fn exact_under_gross_underestimates() {
        for mode in [RestartMode::Naive, RestartMode::Smart] {
            for seed in 0..500 {
                let g = small(seed);
                let d = dijkstra(&g).distance;
                let run = dijkstra_prediction(&g, &ConstantPredictor(0.001), cfg(mode)).unwrap();
                assert_eq!(run.distance.to_bits(), d.to_bits(), "{mode} seed {seed}");
            }
        }
    }

    #[test]
    fn exact_under_overestimates_and_nonpositive_predictions() {
        for seed in 0..100 {
            let g = small(seed);
            let d = dijkstra(&g).distance;
            for p in [-3.0, 0.0, 0.3, 0.7, 2.0, 50.0] {
                for mode in [RestartMode::Naive, RestartMode::Smart] {
                    let run = dijkstra_prediction(&g, &ConstantPredictor(p), cfg(mode)).unwrap();
                    assert_eq!(run.distance.to_bits(), d.to_bits());
                }
            }
        }
    }

    #[test]
    fn smart_is_never_worse_than_pruning() {
        for seed in 0..300 {
            let g = small(seed);
            let base = dijkstra_pruning(&g, 0).stats;
            for p in [0.05, 0.4, 0.8, 3.0] {
                let s = dijkstra_prediction(&g, &ConstantPredictor(p), cfg(RestartMode::Smart))
                    .unwrap()
                    .stats;
                assert_eq!(s.rm, base.rm, "seed {seed} p {p}");
                assert!(s.is <= base.is, "seed {seed} p {p}");
                assert_eq!(s.inr, s.is - s.rm);
            }
        }
    }

    #[test]
    fn restarts_are_bounded() {
        for seed in 0..200 {
            let g = small(seed);
            let d = dijkstra(&g).distance;
            if !d.is_finite() {
                continue;
            }
            for mode in [RestartMode::Naive, RestartMode::Smart] {
                for (p0, alpha, beta) in [(0.01, 1.0, 1.05), (0.2, 1.1, 1.5), (0.5, 1.0, 2.0)] {
                    let c = PredictConfig::new(10, alpha, beta, mode);
                    let run = dijkstra_prediction(&g, &ConstantPredictor(p0), c).unwrap();
                    if run.raw_prediction.is_none() {
                        assert_eq!(run.stats.trials, 1);
                        continue;
                    }
                    let limit = ((d / (alpha * p0)).ln() / beta.ln()).ceil().max(0.0) as u64 + 1;
                    assert!(
                        run.stats.trials <= limit,
                        "{mode} seed {seed}: {} > {limit}",
                        run.stats.trials
                    );
                    assert!(run.final_prediction >= d);
                }
            }
        }
    }

    #[test]
    fn relax_smart_branches() {
        // 0 -> 1 (0.1), 0 -> 2 (0.9), 1 -> 2 (0.2), 2 -> 3 target (0.5), 0 -> 4 (0.05)
        // i0 = 1 with P = 0.5: after settling 0, node 2 (tent 0.9) goes to R
        let g = inst(
            5,
            &[
                (0, 1, 0.1),
                (0, 2, 0.9),
                (0, 4, 0.05),
                (1, 2, 0.2),
                (2, 3, 0.5),
                (4, 1, 0.3),
            ],
            &[3],
        );
        let p = ConstantPredictor(0.5);
        let c = PredictConfig::new(1, 1.0, 2.0, RestartMode::Smart);
        let mut s = PredictionSearch::new(&g, &p, c).unwrap();
        assert_eq!(s.step().unwrap(), Step::Settled { node: 0, dist: 0.0 });
        assert!(s.reserve().contains(2));
        assert_eq!(s.labels()[2], 0.9);
        assert!(s.queue().contains(1) && s.queue().contains(4));
        assert!(!s.reserve().contains(1));
        // settle 4 (0.05): edge to 1 gives 0.35, not an improvement on 0.1
        assert_eq!(
            s.step().unwrap(),
            Step::Settled {
                node: 4,
                dist: 0.05
            }
        );
        // settle 1 (0.1): 2 improves to 0.3 <= P and moves from R to the queue
        assert_eq!(s.step().unwrap(), Step::Settled { node: 1, dist: 0.1 });
        assert!(!s.reserve().contains(2));
        assert_eq!(s.queue().priority(2), Some(0.30000000000000004));
        let run = s.run_to_end(&mut ()).unwrap();
        // the target is first reached at 0.8 > P and waits in R for the restart
        assert_eq!(run.stats.ris, 2);
        assert_eq!(run.stats.rrm1, 1);
        assert_eq!(run.stats.rrm2, 1);
        assert_eq!(run.stats.rdp, 0);
        assert_eq!(run.stats.trials, 2);
        assert_eq!(run.distance, 0.1 + 0.2 + 0.5);
    }

    #[test]
    fn reserve_label_improves_while_staying_reserved() {
        // 2 first reached at 0.9, improved to 0.7 via 1; both above P = 0.5
        let g = inst(
            4,
            &[(0, 1, 0.4), (0, 2, 0.9), (1, 2, 0.3), (2, 3, 0.1)],
            &[3],
        );
        let p = ConstantPredictor(0.5);
        let c = PredictConfig::new(1, 1.0, 1.5, RestartMode::Smart);
        let mut s = PredictionSearch::new(&g, &p, c).unwrap();
        s.step().unwrap();
        assert!(s.reserve().contains(2));
        s.step().unwrap();
        assert!(s.reserve().contains(2));
        assert_eq!(s.labels()[2], 0.4 + 0.3);
        let run = s.run_to_end(&mut ()).unwrap();
        assert_eq!(run.stats.rdp, 1);
        assert_eq!(run.stats.rrm2, 2);
        assert_eq!(run.stats.trials, 3);
        assert_eq!(run.distance, 0.4 + 0.3 + 0.1);
    }

    #[test]
    fn naive_restart_reruns_from_the_source() {
        let g = inst(4, &[(0, 1, 0.4), (1, 2, 0.4), (2, 3, 0.4)], &[3]);
        let p = ConstantPredictor(0.5);
        let c = PredictConfig::new(1, 1.0, 3.0, RestartMode::Naive);
        let mut events: Vec<IterEvent> = Vec::new();
        let run = dijkstra_prediction_observed(&g, &p, c, &mut events).unwrap();
        assert_eq!(run.distance, 0.4 + 0.4 + 0.4);
        assert_eq!(run.stats.trials, 2);
        // trial 1 settles 0 and 1, trial 2 settles 0, 1, 2, 3
        assert_eq!(run.stats.rm, 6);
        assert_eq!(run.stats.settled, 4);
        assert_eq!(run.final_prediction, 0.5 * 3.0);
        let trials: Vec<u64> = events.iter().map(|e| e.trial).collect();
        assert_eq!(trials, vec![1, 1, 2, 2, 2, 2]);
        assert_eq!(run.raw_prediction, Some(0.5));
    }

    #[test]
    fn unreachable_targets_terminate() {
        let g = inst(4, &[(0, 1, 0.4), (1, 2, 0.4)], &[3]);
        for mode in [RestartMode::Naive, RestartMode::Smart] {
            let run = dijkstra_prediction(
                &g,
                &ConstantPredictor(0.1),
                PredictConfig::new(1, 1.0, 1.1, mode),
            )
            .unwrap();
            assert_eq!(run.distance, f64::INFINITY);
        }
    }

    #[test]
    fn predictor_failure_aborts() {
        let g = small(1);
        let r = dijkstra_prediction(&g, &ConstantPredictor(f64::NAN), cfg(RestartMode::Smart));
        assert!(matches!(r, Err(PredictError::Predictor(_))));
    }

    #[test]
    fn perfect_prediction_prunes_nothing_on_no_savings_family() {
        let g = gen_adversarial_no_savings(0.0, 25).unwrap();
        let d = dijkstra(&g).distance;
        assert_eq!(d, 1.0);
        for mode in [RestartMode::Naive, RestartMode::Smart] {
            let run = dijkstra_prediction(
                &g,
                &ConstantPredictor(d),
                PredictConfig::new(1, 1.0, 1.05, mode),
            )
            .unwrap();
            assert_eq!(run.stats.pruned, 0);
            assert_eq!(run.stats.is, dijkstra(&g).stats.is);
            assert_eq!(run.distance, d);
        }
    }

    #[test]
    fn lockstep_holds_on_random_instances() {
        for seed in 0..200 {
            let g = small(seed);
            for p in [f64::INFINITY, 0.05, 0.5, 1.5] {
                let rep =
                    lockstep_check(&g, &ConstantPredictor(p), cfg(RestartMode::Smart)).unwrap();
                assert!(rep.passed(), "seed {seed} p {p}: {:?}", rep.failure);
            }
        }
        let g = gen_adversarial_no_savings(0.2, 10).unwrap();
        assert!(lockstep_check(
            &g,
            &ConstantPredictor(1.0),
            PredictConfig::new(1, 1.0, 1.05, RestartMode::Smart)
        )
        .unwrap()
        .passed());
    }
}
