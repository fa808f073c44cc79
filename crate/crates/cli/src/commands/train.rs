use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use clap::Args;
use serde::Serialize;
use ssmtsp_core::{
    avg_benchmark_fit, evaluate_model, kfold_select, Dataset, MlpConfig, Optimizer, Split,
    TrainedModel,
};

use super::{manifest_dir, out_path, sibling};
use crate::config::Layer;
use crate::corpus::{dataset_path, read_text, update_manifest, write_text, SCHEMA};
use crate::Global;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory written by `gen`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// avg, linreg or mlp.
    #[arg(long)]
    kind: Option<String>,
    /// Model file; defaults to `<data>/model_<kind>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// adam or sgd.
    #[arg(long)]
    optimizer: Option<String>,
    /// Select width and epochs by k-fold cross validation (k >= 2) before training.
    #[arg(long)]
    kfold: Option<usize>,
    /// Candidate widths for --kfold, comma-separated.
    #[arg(long)]
    h_grid: Option<String>,
}

#[derive(Debug, Serialize)]
struct TrainManifest {
    kind: String,
    data: PathBuf,
    model: PathBuf,
    seed: u64,
    mlp: Option<MlpConfig>,
    kfold: Option<usize>,
    h_grid: Option<Vec<usize>>,
    metrics: Vec<(Split, f64)>,
}

fn load_dataset(data: &std::path::Path, split: Split) -> Result<Option<Dataset>> {
    let path = dataset_path(data, split);
    if !path.exists() {
        return Ok(None);
    }
    let ds = Dataset::from_csv(&read_text(&path)?)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok(Some(ds))
}

fn parse_optimizer(s: &str) -> Result<Optimizer> {
    match s {
        "adam" => Ok(Optimizer::adam()),
        "sgd" => Ok(Optimizer::Sgd),
        other => bail!("unknown optimizer `{other}` (expected adam or sgd)"),
    }
}

pub fn run(args: TrainArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "train",
    };
    let data: PathBuf = l.require(args.data, "data")?;
    let kind = l.pick(args.kind, "kind", "mlp".to_string())?;
    let out = out_path(
        l.pick_opt(args.out, "out")?,
        &data,
        &format!("model_{kind}.json"),
    );
    let train = load_dataset(&data, Split::Train)?.ok_or_else(|| {
        anyhow::anyhow!(
            "missing training set {}",
            dataset_path(&data, Split::Train).display()
        )
    })?;
    ensure!(!train.is_empty(), "training set is empty");

    let defaults = MlpConfig::default();
    let mut cfg = MlpConfig {
        hidden: l.pick(args.hidden, "hidden", defaults.hidden)?,
        epochs: l.pick(args.epochs, "epochs", defaults.epochs)?,
        batch: l.pick(args.batch, "batch", defaults.batch)?,
        lr: l.pick(args.lr, "lr", defaults.lr)?,
        seed: g.seed,
        optimizer: parse_optimizer(&l.pick(args.optimizer, "optimizer", "adam".to_string())?)?,
    };
    let kfold = l.pick_opt(args.kfold, "kfold")?;
    let h_grid: Vec<usize> = l
        .pick(args.h_grid, "h_grid", "8,16,32,64,128".to_string())?
        .split(',')
        .map(|h| h.trim().parse::<usize>())
        .collect::<Result<_, _>>()?;

    let model = match kind.as_str() {
        "avg" => avg_benchmark_fit(&train.targets, train.i0)?,
        "linreg" => TrainedModel::fit_linreg(&train.features, &train.targets, train.i0)?,
        "mlp" => {
            if let Some(k) = kfold {
                let report = kfold_select(&train, k, &h_grid, &cfg)?;
                write_text(&sibling(&out, "cv", "csv"), &report.to_csv())?;
                eprintln!(
                    "k-fold selection: h = {}, epochs = {}",
                    report.selected_h, report.selected_epochs
                );
                cfg.hidden = report.selected_h;
                cfg.epochs = report.selected_epochs;
            }
            TrainedModel::fit_mlp(&train.features, &train.targets, train.i0, &cfg, |e, _| {
                if e % 10 == 0 {
                    eprintln!("epoch {e}/{}", cfg.epochs);
                }
            })?
        }
        other => bail!("unknown predictor kind `{other}` (expected avg, linreg or mlp)"),
    };
    model.save(&out)?;

    let mut metrics_csv = format!("{SCHEMA}\nsplit,mae,mape,count\n");
    let mut metrics = Vec::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        let ds = if split == Split::Train {
            Some(train.clone())
        } else {
            load_dataset(&data, split)?
        };
        if let Some(ds) = ds.filter(|d| !d.is_empty()) {
            ensure!(
                ds.i0 == model.i0,
                "{split} set has trace length {} but the model uses {}",
                ds.i0,
                model.i0
            );
            let m = evaluate_model(&model, &ds)?;
            metrics_csv.push_str(&format!("{split},{},{},{}\n", m.mae, m.mape, m.count));
            eprintln!("{split}: MAE {:.4}, MAPE {:.4}", m.mae, m.mape);
            metrics.push((split, m.mae));
        }
    }
    write_text(&sibling(&out, "metrics", "csv"), &metrics_csv)?;
    update_manifest(
        &manifest_dir(&out),
        "train",
        &TrainManifest {
            kind: kind.clone(),
            data,
            model: out,
            seed: g.seed,
            mlp: (kind == "mlp").then_some(cfg),
            kfold,
            h_grid: kfold.map(|_| h_grid),
            metrics,
        },
    )
}
