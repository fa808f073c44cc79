//! Classical baselines: many-targets Dijkstra, Dijkstra-Pruning (with trace
//! capture), the oracle benchmark, and a Bellman-Ford reference.
//!
//! All three queue-based variants share [`PruningSearch`], a step-at-a-time
//! state machine, so that lockstep comparisons can drive it one settled node
//! at a time.

use std::fmt;

use crate::instances::Instance;
use crate::pq::AddressablePq;

/// Per-run operation counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    /// Remove-Min operations.
    pub rm: u64,
    /// Insert operations (reserve-to-queue moves included).
    pub is: u64,
    /// Decrease-Prio operations.
    pub dp: u64,
    /// Inserted but never removed: `is - rm`.
    pub inr: u64,
    /// Reserve-to-queue moves caused by a shorter path.
    pub rrm1: u64,
    /// Reserve-to-queue moves caused by batch insertion at a restart.
    pub rrm2: u64,
    /// Insertions into the reserve set.
    pub ris: u64,
    /// Label improvements of nodes that stay in the reserve set.
    pub rdp: u64,
    pub trials: u64,
    pub cum_q: u64,
    pub distance: f64,
    /// Nodes removed from the queue in the final trial.
    pub settled: u64,
    /// Scanned edges skipped by a prune test. Not part of the CSV row.
    pub pruned: u64,
}

impl RunStats {
    pub const CSV_HEADER: &'static str =
        "rm,is,dp,inr,rrm1,rrm2,ris,rdp,q_total,trials,cum_q,distance,settled";

    /// Total queue operations `rm + is + dp`.
    pub fn q_total(&self) -> u64 {
        self.rm + self.is + self.dp
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.rm,
            self.is,
            self.dp,
            self.inr,
            self.rrm1,
            self.rrm2,
            self.ris,
            self.rdp,
            self.q_total(),
            self.trials,
            self.cum_q,
            crate::instances::format_sig17(self.distance),
            self.settled
        )
    }
}

/// The first `i0` `(d(u), B)` pairs of a run. `B` is `+inf` until a target
/// has been reached.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pairs: Vec<(f64, f64)>,
}

impl Trace {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub(crate) fn push(&mut self, d: f64, bound: f64) {
        self.pairs.push((d, bound));
    }
}

/// One settled node, reported after its out-edges have been scanned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterEvent {
    /// 1-based count of Remove-Min operations so far.
    pub iter: u64,
    pub trial: u64,
    pub node: usize,
    pub d_u: f64,
    pub bound: f64,
    pub prediction: f64,
    pub q_size: usize,
    pub r_size: usize,
}

impl IterEvent {
    pub const CSV_HEADER: &'static str = "iter,trial,d_u,B,P,q_size,r_size";

    pub fn to_csv_row(&self) -> String {
        use crate::instances::format_sig17 as f;
        format!(
            "{},{},{},{},{},{},{}",
            self.iter,
            self.trial,
            f(self.d_u),
            f(self.bound),
            f(self.prediction),
            self.q_size,
            self.r_size
        )
    }
}

/// Hooks into a running search. All methods default to no-ops.
pub trait Observer {
    fn on_iteration(&mut self, _event: &IterEvent) {}
    /// An edge was skipped by a prune test.
    fn on_prune(&mut self, _tail: usize, _head: usize, _tent: f64) {}
    fn on_restart(&mut self, _trial: u64, _prediction: f64) {}
}

impl Observer for () {}

impl Observer for Vec<IterEvent> {
    fn on_iteration(&mut self, event: &IterEvent) {
        self.push(*event);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// A non-target node was settled and its edges scanned.
    Settled { node: usize, dist: f64 },
    /// A target was settled; the search is over.
    Reached { node: usize, dist: f64 },
    /// The queue ran dry without reaching a target.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct PruningRun {
    pub distance: f64,
    pub stats: RunStats,
    /// Present iff at least `i0` non-target nodes were settled.
    pub trace: Option<Trace>,
}

/// Dijkstra with an optional pruning bound, advanced one settled node at a time.
pub struct PruningSearch<'a> {
    inst: &'a Instance,
    d: Vec<f64>,
    pq: AddressablePq,
    bound: f64,
    prune: bool,
    iterations: u64,
    pruned: u64,
    trace: Trace,
    trace_len: usize,
    outcome: Option<f64>,
}

impl<'a> PruningSearch<'a> {
    /// Plain many-targets Dijkstra: no bound, nothing pruned.
    pub fn plain(inst: &'a Instance) -> Self {
        Self::build(inst, false, f64::INFINITY, 0)
    }

    /// Dijkstra-Pruning with the bound initialised to `initial_bound`
    /// (`+inf` for the standard algorithm, `D` for the oracle). Captures the
    /// first `trace_len` `(d(u), B)` pairs.
    pub fn pruning(inst: &'a Instance, initial_bound: f64, trace_len: usize) -> Self {
        Self::build(inst, true, initial_bound, trace_len)
    }

    fn build(inst: &'a Instance, prune: bool, bound: f64, trace_len: usize) -> Self {
        let n = inst.node_count();
        let mut d = vec![f64::INFINITY; n];
        let mut pq = AddressablePq::with_capacity(n);
        let s = inst.source();
        d[s] = 0.0;
        pq.insert(s, 0.0).expect("fresh queue");
        Self {
            inst,
            d,
            pq,
            bound,
            prune,
            iterations: 0,
            pruned: 0,
            trace: Trace::new(Vec::with_capacity(trace_len)),
            trace_len,
            outcome: None,
        }
    }

    pub fn labels(&self) -> &[f64] {
        &self.d
    }

    pub fn queue(&self) -> &AddressablePq {
        &self.pq
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn step(&mut self) -> Step {
        self.step_observed(&mut ())
    }

    pub fn step_observed<O: Observer + ?Sized>(&mut self, obs: &mut O) -> Step {
        if self.outcome.is_some() {
            return Step::Exhausted;
        }
        let Ok((u, du)) = self.pq.remove_min() else {
            self.outcome = Some(f64::INFINITY);
            return Step::Exhausted;
        };
        self.iterations += 1;
        if self.inst.is_target(u) {
            // The first settled target carries the minimum target distance;
            // B >= D always holds, so it is not consulted here.
            self.pq.sample_size();
            self.outcome = Some(du);
            self.emit(obs, u, du);
            return Step::Reached { node: u, dist: du };
        }
        if self.trace.len() < self.trace_len {
            self.trace.push(du, self.bound);
        }
        for (v, w) in self.inst.out_edges(u) {
            let tent = du + w;
            if self.prune {
                if tent > self.bound {
                    self.pruned += 1;
                    obs.on_prune(u, v, tent);
                    continue;
                }
                if self.inst.is_target(v) && tent < self.bound {
                    self.bound = tent;
                }
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
        self.pq.sample_size();
        self.emit(obs, u, du);
        Step::Settled { node: u, dist: du }
    }

    fn emit<O: Observer + ?Sized>(&self, obs: &mut O, node: usize, d_u: f64) {
        obs.on_iteration(&IterEvent {
            iter: self.iterations,
            trial: 1,
            node,
            d_u,
            bound: self.bound,
            prediction: f64::INFINITY,
            q_size: self.pq.size(),
            r_size: 0,
        });
    }

    pub fn run_to_end<O: Observer + ?Sized>(mut self, obs: &mut O) -> PruningRun {
        while !matches!(
            self.step_observed(obs),
            Step::Reached { .. } | Step::Exhausted
        ) {}
        self.finish()
    }

    pub fn finish(self) -> PruningRun {
        let c = self.pq.counters();
        let stats = RunStats {
            rm: c.remove_mins,
            is: c.inserts,
            dp: c.decrease_prios,
            inr: c.inserts - c.remove_mins,
            trials: 1,
            cum_q: c.cumulative_size,
            distance: self.outcome.unwrap_or(f64::INFINITY),
            settled: self.iterations,
            pruned: self.pruned,
            ..RunStats::default()
        };
        let trace =
            (self.trace_len > 0 && self.trace.len() == self.trace_len).then_some(self.trace);
        PruningRun {
            distance: stats.distance,
            stats,
            trace,
        }
    }
}

pub fn dijkstra(inst: &Instance) -> PruningRun {
    PruningSearch::plain(inst).run_to_end(&mut ())
}

/// Dijkstra-Pruning. Edges with `d(u) + w > B` are skipped; the trace holds
/// the first `i0` `(d(u), B)` pairs when the run is long enough.
pub fn dijkstra_pruning(inst: &Instance, i0: usize) -> PruningRun {
    PruningSearch::pruning(inst, f64::INFINITY, i0).run_to_end(&mut ())
}

/// Dijkstra-Pruning with the bound initialised to the exact distance `d_star`.
pub fn oracle_run(inst: &Instance, d_star: f64) -> PruningRun {
    PruningSearch::pruning(inst, d_star, 0).run_to_end(&mut ())
}

/// Exact distances from the source by rounds of full edge relaxation, stopping
/// early once a round changes nothing. Unreachable nodes stay `+inf`.
pub fn bellman_ford_oracle(inst: &Instance) -> Vec<f64> {
    let n = inst.node_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[inst.source()] = 0.0;
    for _ in 1..n.max(2) {
        let mut changed = false;
        for (u, v, w) in inst.edges() {
            let du = dist[u];
            if du < f64::INFINITY && du + w < dist[v] {
                dist[v] = du + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Minimum over targets of per-node distances.
pub fn min_target_distance(inst: &Instance, dist: &[f64]) -> f64 {
    inst.targets()
        .map(|t| dist[t])
        .fold(f64::INFINITY, f64::min)
}

/// Distance and edge count of the shortest path to the first settled target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub distance: f64,
    pub hops: usize,
    pub target: usize,
}

impl fmt::Display for PathSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "D={} hops={} target={}",
            self.distance, self.hops, self.target
        )
    }
}

/// Runs Dijkstra with hop bookkeeping and reports the shortest path's edge
/// count. Used for instance statistics only.
pub fn shortest_path_summary(inst: &Instance) -> Option<PathSummary> {
    let n = inst.node_count();
    let mut d = vec![f64::INFINITY; n];
    let mut hops = vec![0usize; n];
    let mut pq = AddressablePq::with_capacity(n);
    d[inst.source()] = 0.0;
    pq.insert(inst.source(), 0.0).ok()?;
    while let Ok((u, du)) = pq.remove_min() {
        if inst.is_target(u) {
            return Some(PathSummary {
                distance: du,
                hops: hops[u],
                target: u,
            });
        }
        for (v, w) in inst.out_edges(u) {
            let tent = du + w;
            if tent < d[v] {
                if d[v] == f64::INFINITY {
                    pq.insert(v, tent).ok()?;
                } else {
                    pq.decrease_prio(v, tent).ok()?;
                }
                d[v] = tent;
                hops[v] = hops[u] + 1;
            }
        }
    }
    None
}
