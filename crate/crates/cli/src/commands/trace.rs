use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use ssmtsp_core::predictors::UNIFORM_MEAN_WEIGHT;
use ssmtsp_core::{
    bfs_predictor, dijkstra, dijkstra_prediction_observed, load_instance, wbfs_predictor, Instance,
    IterEvent, PredictConfig, Predictor, PruningSearch, RestartMode, TrainedModel,
};

use super::{load_model, manifest_dir, parse_split};
use crate::config::Layer;
use crate::corpus::{read_text, update_manifest, write_text, Corpus, SCHEMA};
use crate::Global;

const KNOWN: [&str; 7] = [
    "oracle", "dijkstra", "prune", "smart", "naive", "bfs", "wbfs",
];

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Directory written by `gen`; used with --split and --index.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    index: Option<usize>,
    /// Instance file; overrides --data.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Needed for the smart and naive variants.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Comma-separated subset of oracle,dijkstra,prune,smart,naive,bfs,wbfs.
    #[arg(long)]
    algorithms: Option<String>,
    /// Trace length when no model is given.
    #[arg(long)]
    i0: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Restart mode of the bfs and wbfs variants.
    #[arg(long)]
    graph_mode: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TraceManifest {
    source: String,
    algorithms: Vec<String>,
    i0: usize,
    alpha: f64,
    beta: f64,
    out: PathBuf,
}

/// Per-iteration events of one variant.
pub fn trace_algorithm(
    inst: &Instance,
    name: &str,
    model: Option<&TrainedModel>,
    cfg: PredictConfig,
    graph_mode: RestartMode,
) -> Result<Vec<IterEvent>> {
    let mut events: Vec<IterEvent> = Vec::new();
    let predicted = |p: &dyn Predictor, mode, events: &mut Vec<IterEvent>| {
        let cfg = PredictConfig {
            restart: mode,
            ..cfg
        };
        dijkstra_prediction_observed(inst, p, cfg, events).map(|_| ())
    };
    match name {
        "oracle" => {
            let d = dijkstra(inst).distance;
            PruningSearch::pruning(inst, d, 0).run_to_end(&mut events);
        }
        "dijkstra" => {
            PruningSearch::plain(inst).run_to_end(&mut events);
        }
        "prune" => {
            PruningSearch::pruning(inst, f64::INFINITY, cfg.i0).run_to_end(&mut events);
        }
        "smart" | "naive" => {
            let model = model.with_context(|| format!("`{name}` needs --model"))?;
            let mode = if name == "smart" {
                RestartMode::Smart
            } else {
                RestartMode::Naive
            };
            predicted(model, mode, &mut events)?;
        }
        "bfs" => predicted(
            &bfs_predictor(inst, UNIFORM_MEAN_WEIGHT),
            graph_mode,
            &mut events,
        )?,
        "wbfs" => predicted(&wbfs_predictor(inst), graph_mode, &mut events)?,
        other => bail!(
            "unknown algorithm `{other}` (expected one of {})",
            KNOWN.join(",")
        ),
    }
    Ok(events)
}

pub fn run(args: TraceArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "trace",
    };
    let instance_file: Option<PathBuf> = l.pick_opt(args.instance, "instance")?;
    let (inst, source) = match instance_file {
        Some(path) => {
            let text = read_text(&path)?;
            let inst =
                load_instance(&text).with_context(|| format!("reading {}", path.display()))?;
            (inst, path.display().to_string())
        }
        None => {
            let data: PathBuf = l.require(args.data, "data")?;
            let split = parse_split(&l.pick(args.split, "split", "test".to_string())?)?;
            let index = l.pick(args.index, "index", 0)?;
            let corpus = Corpus::open(&data)?;
            let rows = corpus.rows(split)?;
            let row = rows
                .get(index)
                .with_context(|| format!("{split} split has {} instances", rows.len()))?;
            (
                corpus.load(split, index, row)?,
                format!("{} {split} #{index}", data.display()),
            )
        }
    };
    let model_path: Option<PathBuf> = l.pick_opt(args.model, "model")?;
    let model = model_path.as_deref().map(load_model).transpose()?;
    let i0 = match &model {
        Some(m) => m.i0,
        None => l.pick(args.i0, "i0", 10)?,
    };
    let alpha = l.pick(args.alpha, "alpha", 1.0)?;
    let beta = l.pick(args.beta, "beta", 1.05)?;
    let graph_mode =
        super::parse_mode(&l.pick(args.graph_mode, "graph_mode", "smart".to_string())?)?;
    let cfg = PredictConfig::new(i0, alpha, beta, RestartMode::Smart);
    cfg.validate()?;
    let default_algs = if model.is_some() {
        "dijkstra,prune,smart,naive"
    } else {
        "dijkstra,prune,bfs,wbfs"
    };
    let algorithms: Vec<String> = l
        .pick(args.algorithms, "algorithms", default_algs.to_string())?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();

    let mut text = format!("{SCHEMA}\nalgorithm,{}\n", IterEvent::CSV_HEADER);
    for name in &algorithms {
        for e in trace_algorithm(&inst, name, model.as_ref(), cfg, graph_mode)? {
            text.push_str(&format!("{name},{}\n", e.to_csv_row()));
        }
    }
    let out: Option<PathBuf> = l.pick_opt(args.out, "out")?;
    match out {
        None => print!("{text}"),
        Some(out) => {
            write_text(&out, &text)?;
            update_manifest(
                &manifest_dir(&out),
                "trace",
                &TraceManifest {
                    source,
                    algorithms,
                    i0,
                    alpha,
                    beta,
                    out,
                },
            )?;
        }
    }
    Ok(())
}
