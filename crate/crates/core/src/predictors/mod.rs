//! Distance predictors and their feature pipeline.
//!
//! Learned models consume the raw [`Trace`] of a run: it is flattened into a
//! [`FeatureVector`] (infinite bounds replaced by 0), normalised with the
//! statistics of the training split, and fed to the model. Graph-derived
//! predictors ignore the trace and answer from a breadth-first search.

mod graph;
mod linreg;
mod mlp;
mod model;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sssp::Trace;

pub use graph::{bfs_predictor, wbfs_predictor, BfsPath, GraphPredictor};
pub use linreg::{linreg_fit, LinRegModel, RIDGE_LAMBDA};
pub use mlp::{mlp_train, DenseLayer, MlpConfig, MlpModel, Optimizer};
pub use model::{ModelParams, TrainedModel};

/// Expected weight of a `U[0, 1]` edge.
pub const UNIFORM_MEAN_WEIGHT: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum PredictorError {
    #[error("trace has {found} entries, model expects {expected}")]
    TraceLength { expected: usize, found: usize },
    #[error("feature vector has {found} entries, expected {expected}")]
    FeatureLength { expected: usize, found: usize },
    #[error("predictor produced a non-number")]
    NotANumber,
    #[error("cannot fit on an empty sample set")]
    EmptyInput,
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
}

/// Produces a distance estimate from the trace of the first `i0` iterations.
///
/// Implementations are pure and deterministic, and may be shared across
/// threads. The result is a positive real or `+inf`; learned models may also
/// return non-positive values, which the search floors to a tiny positive P.
pub trait Predictor: Send + Sync {
    fn predict(&self, trace: &Trace) -> Result<f64, PredictorError>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, trace: &Trace) -> Result<f64, PredictorError> {
        (**self).predict(trace)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn predict(&self, trace: &Trace) -> Result<f64, PredictorError> {
        (**self).predict(trace)
    }
}

/// Returns the same value for every trace. `+inf` disables prediction pruning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPredictor(pub f64);

impl Predictor for ConstantPredictor {
    fn predict(&self, _trace: &Trace) -> Result<f64, PredictorError> {
        if self.0.is_nan() {
            Err(PredictorError::NotANumber)
        } else {
            Ok(self.0)
        }
    }
}

/// Flattened trace `d1, B1, ..., d_i0, B_i0` with finite entries only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn trace_to_features(trace: &Trace, i0: usize) -> Result<FeatureVector, PredictorError> {
    if trace.len() != i0 {
        return Err(PredictorError::TraceLength {
            expected: i0,
            found: trace.len(),
        });
    }
    let mut values = Vec::with_capacity(2 * i0);
    for &(d, b) in trace.pairs() {
        values.push(d);
        values.push(if b.is_finite() { b } else { 0.0 });
    }
    Ok(FeatureVector(values))
}

/// Per-feature standardisation fitted on training data.
///
/// Uses the population standard deviation. Constant features get std 1, so
/// they normalise to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn fit<'a, I>(features: I) -> Result<Self, PredictorError>
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let rows: Vec<&FeatureVector> = features.into_iter().collect();
        let first = rows.first().ok_or(PredictorError::EmptyInput)?;
        let dim = first.len();
        let mut mean = vec![0.0; dim];
        for r in &rows {
            if r.len() != dim {
                return Err(PredictorError::FeatureLength {
                    expected: dim,
                    found: r.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(&r.0) {
                *m += x;
            }
        }
        let count = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; dim];
        for r in &rows {
            for ((v, x), m) in var.iter_mut().zip(&r.0).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / count).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, fv: &FeatureVector) -> Result<FeatureVector, PredictorError> {
        if fv.len() != self.dim() {
            return Err(PredictorError::FeatureLength {
                expected: self.dim(),
                found: fv.len(),
            });
        }
        Ok(FeatureVector(
            fv.0.iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(x, (m, s))| (x - m) / s)
                .collect(),
        ))
    }

    pub fn invert(&self, fv: &FeatureVector) -> Result<FeatureVector, PredictorError> {
        if fv.len() != self.dim() {
            return Err(PredictorError::FeatureLength {
                expected: self.dim(),
                found: fv.len(),
            });
        }
        Ok(FeatureVector(
            fv.0.iter()
                .zip(self.mean.iter().zip(&self.std))
                .map(|(z, (m, s))| z * s + m)
                .collect(),
        ))
    }
}

/// The averaging benchmark: predicts the mean training distance for every trace.
pub fn avg_benchmark_fit(targets: &[f64], i0: usize) -> Result<TrainedModel, PredictorError> {
    if targets.is_empty() {
        return Err(PredictorError::EmptyInput);
    }
    let value = targets.iter().sum::<f64>() / targets.len() as f64;
    Ok(TrainedModel {
        i0,
        normalizer: None,
        params: ModelParams::Average { value },
    })
}
