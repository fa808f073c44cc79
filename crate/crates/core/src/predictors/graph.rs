//! Predictors derived from a breadth-first search over the instance.

use std::collections::VecDeque;

use super::{Predictor, PredictorError};
use crate::instances::Instance;
use crate::sssp::Trace;

/// A minimum-hop path from the source to the first target found by BFS.
#[derive(Debug, Clone, PartialEq)]
pub struct BfsPath {
    pub hops: usize,
    pub nodes: Vec<usize>,
    /// Sum of the actual edge weights along `nodes`.
    pub weight: f64,
}

impl BfsPath {
    /// BFS from the source expanding neighbours in increasing id order; the
    /// first target dequeued determines the path via parent pointers.
    pub fn find(inst: &Instance) -> Option<Self> {
        let n = inst.node_count();
        let s = inst.source();
        let mut parent: Vec<Option<(usize, f64)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[s] = true;
        queue.push_back(s);
        let mut neighbours = Vec::new();
        while let Some(u) = queue.pop_front() {
            if inst.is_target(u) {
                let mut nodes = vec![u];
                let mut weights = Vec::new();
                let mut cur = u;
                while let Some((p, w)) = parent[cur] {
                    nodes.push(p);
                    weights.push(w);
                    cur = p;
                }
                nodes.reverse();
                weights.reverse();
                return Some(Self {
                    hops: weights.len(),
                    nodes,
                    weight: weights.iter().sum(),
                });
            }
            neighbours.clear();
            neighbours.extend(inst.out_edges(u));
            neighbours.sort_by_key(|&(v, _)| v);
            for &(v, w) in &neighbours {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, w));
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

/// A trace-independent predictor bound to one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPredictor {
    pub value: f64,
}

impl Predictor for GraphPredictor {
    fn predict(&self, _trace: &Trace) -> Result<f64, PredictorError> {
        Ok(self.value)
    }
}

/// Minimum hop count to a target times the expected edge weight.
pub fn bfs_predictor(inst: &Instance, mu_w: f64) -> GraphPredictor {
    GraphPredictor {
        value: BfsPath::find(inst).map_or(f64::INFINITY, |p| p.hops as f64 * mu_w),
    }
}

/// Actual weight of one minimum-hop path to a target.
pub fn wbfs_predictor(inst: &Instance) -> GraphPredictor {
    GraphPredictor {
        value: BfsPath::find(inst).map_or(f64::INFINITY, |p| p.weight),
    }
}
