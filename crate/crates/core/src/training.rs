//! Datasets of `(trace features, distance)` samples, k-fold model selection
//! and error metrics.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{derive_seed, Instance};
use crate::predictors::{
    trace_to_features, FeatureVector, MlpConfig, Predictor, PredictorError, TrainedModel,
};
use crate::sssp::dijkstra_pruning;

#[derive(Debug, Error, PartialEq)]
pub enum TrainingError {
    #[error("instance {index}: run settled fewer than i0 = {i0} nodes")]
    ShortRun { index: usize, i0: usize },
    #[error("instance {index}: no target is reachable")]
    Unreachable { index: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub i0: usize,
    pub split: Split,
    pub features: Vec<FeatureVector>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Samples at the given positions, in order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            i0: self.i0,
            split: self.split,
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema=1 split={}\n", self.split);
        let header: Vec<String> = (1..=self.i0)
            .flat_map(|i| [format!("d{i}"), format!("b{i}")])
            .chain(std::iter::once("target".to_string()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (f, y) in self.features.iter().zip(&self.targets) {
            for x in &f.0 {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Dataset, TrainingError> {
        let err = |line: usize, msg: String| TrainingError::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, marker) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let mut split = None;
        let mut schema_ok = false;
        for tok in marker.trim_start_matches('#').split_whitespace() {
            match tok.split_once('=') {
                Some(("schema", "1")) => schema_ok = true,
                Some(("split", s)) => split = Some(s.parse::<Split>().map_err(|m| err(1, m))?),
                _ => {}
            }
        }
        if !marker.starts_with('#') || !schema_ok {
            return Err(err(1, "expected `# schema=1` marker".into()));
        }
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(2, "missing header".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 3 || cols.len().is_multiple_of(2) || cols.last() != Some(&"target") {
            return Err(err(2, format!("bad header `{header}`")));
        }
        let i0 = (cols.len() - 1) / 2;
        let mut ds = Dataset {
            i0,
            split: split.unwrap_or(Split::Train),
            features: Vec::new(),
            targets: Vec::new(),
        };
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| err(no, e.to_string()))?;
            if values.len() != cols.len() {
                return Err(err(
                    no,
                    format!("{} fields, expected {}", values.len(), cols.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(err(no, "non-finite value".into()));
            }
            let (y, x) = values.split_last().expect("non-empty row");
            ds.features.push(FeatureVector(x.to_vec()));
            ds.targets.push(*y);
        }
        Ok(ds)
    }
}

/// One sample per instance: the Dijkstra-Pruning trace of length `i0` and the
/// exact distance.
pub fn build_dataset<I, B>(instances: I, i0: usize, split: Split) -> Result<Dataset, TrainingError>
where
    I: IntoIterator<Item = B>,
    B: Borrow<Instance>,
{
    let mut ds = Dataset {
        i0,
        split,
        features: Vec::new(),
        targets: Vec::new(),
    };
    for (index, inst) in instances.into_iter().enumerate() {
        ds.push_instance(inst.borrow(), index)?;
    }
    Ok(ds)
}

impl Dataset {
    /// Appends the sample for one instance; `index` is only used in errors.
    pub fn push_instance(&mut self, inst: &Instance, index: usize) -> Result<(), TrainingError> {
        let run = dijkstra_pruning(inst, self.i0);
        if !run.distance.is_finite() {
            return Err(TrainingError::Unreachable { index });
        }
        let trace = run
            .trace
            .ok_or(TrainingError::ShortRun { index, i0: self.i0 })?;
        self.features.push(trace_to_features(&trace, self.i0)?);
        self.targets.push(run.distance);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mae: f64,
    pub mape: f64,
    pub count: usize,
    /// Samples with target 0, left out of `mape`.
    pub mape_excluded: usize,
}

/// Error metrics of `predict` over a dataset.
pub fn evaluate<F>(predict: F, ds: &Dataset) -> Result<Metrics, TrainingError>
where
    F: Fn(&FeatureVector) -> Result<f64, PredictorError>,
{
    if ds.is_empty() {
        return Err(TrainingError::Invalid(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut pct_n = 0usize;
    for (f, &y) in ds.features.iter().zip(&ds.targets) {
        let e = (predict(f)? - y).abs();
        abs += e;
        if y != 0.0 {
            pct += e / y.abs();
            pct_n += 1;
        }
    }
    Ok(Metrics {
        mae: abs / ds.len() as f64,
        mape: if pct_n > 0 {
            pct / pct_n as f64
        } else {
            f64::NAN
        },
        count: ds.len(),
        mape_excluded: ds.len() - pct_n,
    })
}

pub fn evaluate_model(model: &TrainedModel, ds: &Dataset) -> Result<Metrics, TrainingError> {
    evaluate(|f| model.predict_features(f), ds)
}

/// Error metrics of a trace predictor over `(instance)` runs, re-deriving the
/// trace from Dijkstra-Pruning.
pub fn evaluate_on_instances<'a, I>(
    predictor: &dyn Predictor,
    instances: I,
    i0: usize,
) -> Result<Metrics, TrainingError>
where
    I: IntoIterator<Item = &'a Instance>,
{
    let mut abs = 0.0;
    let mut pct = 0.0;
    let mut n = 0usize;
    for (index, inst) in instances.into_iter().enumerate() {
        let run = dijkstra_pruning(inst, i0);
        let trace = run.trace.ok_or(TrainingError::ShortRun { index, i0 })?;
        let e = (predictor.predict(&trace)? - run.distance).abs();
        abs += e;
        pct += e / run.distance;
        n += 1;
    }
    if n == 0 {
        return Err(TrainingError::Invalid("no instances".into()));
    }
    Ok(Metrics {
        mae: abs / n as f64,
        mape: pct / n as f64,
        count: n,
        mape_excluded: 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvCurve {
    pub h: usize,
    /// Fold-averaged validation MAE after epochs 1, 2, ...
    pub fold_mae_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub k: usize,
    pub curves: Vec<CvCurve>,
    pub selected_h: usize,
    pub selected_epochs: usize,
}

impl CvReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=1\nh,epoch,fold_mae_mean\n");
        for c in &self.curves {
            for (e, m) in c.fold_mae_mean.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", c.h, e + 1, m));
            }
        }
        out
    }
}

/// Position ranges of `k` contiguous folds over a seeded shuffle of `0..n`.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut Xoshiro256PlusPlus::seed_from_u64(seed));
    (0..k)
        .map(|f| order[f * n / k..(f + 1) * n / k].to_vec())
        .collect()
}

/// Trains every candidate width on `k - 1` folds and validates on the held-out
/// fold, recording fold-averaged MAE per epoch. Selects the global best
/// `(h, epoch)`; ties go to the smaller width, then fewer epochs.
///
/// `base` supplies the epoch budget, batch size, learning rate, optimizer and
/// seed; its `hidden` field is ignored.
pub fn kfold_select(
    train: &Dataset,
    k: usize,
    candidate_h: &[usize],
    base: &MlpConfig,
) -> Result<CvReport, TrainingError> {
    if k < 2 {
        return Err(TrainingError::Invalid(format!(
            "k = {k} must be at least 2"
        )));
    }
    if train.len() < k {
        return Err(TrainingError::Invalid(format!(
            "{} samples cannot form {k} folds",
            train.len()
        )));
    }
    if candidate_h.is_empty() {
        return Err(TrainingError::Invalid("no candidate widths".into()));
    }
    let folds = kfold_partition(train.len(), k, base.seed);
    let mut curves = Vec::with_capacity(candidate_h.len());
    for &h in candidate_h {
        let mut sum = vec![0.0; base.epochs];
        for (f, held) in folds.iter().enumerate() {
            let rest: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            let fit = train.subset(&rest);
            let val = train.subset(held);
            let cfg = MlpConfig {
                hidden: h,
                seed: derive_seed(base.seed, h as u64, f as u64),
                ..*base
            };
            let mut failure = None;
            TrainedModel::fit_mlp(&fit.features, &fit.targets, train.i0, &cfg, |epoch, m| {
                match evaluate_model(m, &val) {
                    Ok(metrics) => sum[epoch - 1] += metrics.mae,
                    Err(e) => failure = Some(e),
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
        }
        curves.push(CvCurve {
            h,
            fold_mae_mean: sum.into_iter().map(|s| s / k as f64).collect(),
        });
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for c in &curves {
        for (e, &m) in c.fold_mae_mean.iter().enumerate() {
            let cand = (m, c.h, e + 1);
            let better = match best {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2)),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let (_, selected_h, selected_epochs) = best.expect("at least one epoch per curve");
    Ok(CvReport {
        k,
        curves,
        selected_h,
        selected_epochs,
    })
}
