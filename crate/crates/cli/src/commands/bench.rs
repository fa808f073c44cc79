use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use ssmtsp_core::predictors::UNIFORM_MEAN_WEIGHT;
use ssmtsp_core::{
    bfs_predictor, dijkstra, dijkstra_prediction, dijkstra_pruning, oracle_run, wbfs_predictor,
    Instance, PredictConfig, Predictor, RestartMode, RunStats, Split,
};

use super::{load_model, manifest_dir, out_path, parse_mode, parse_split, ValidationFailure};
use crate::config::Layer;
use crate::corpus::{update_manifest, write_text, Corpus, SCHEMA};
use crate::Global;

pub const ALGORITHMS: [&str; 7] = [
    "oracle", "dijkstra", "prune", "smart", "naive", "bfs", "wbfs",
];
pub const HEADER: &str = "algorithm,rm,is,inr,dp,rrm1,rrm2,ris,rdp,q,trials,cum_q,cum_q_ratio";

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory written by `gen`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Trained model used by the smart and naive rows.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Restart mode of the bfs and wbfs rows.
    #[arg(long)]
    graph_mode: Option<String>,
    /// Use only the first N instances of the split.
    #[arg(long)]
    limit: Option<usize>,
    /// Results file; defaults to `<data>/bench.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every run's counters to this file.
    #[arg(long)]
    per_instance: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BenchManifest {
    data: PathBuf,
    model: PathBuf,
    split: Split,
    instances: usize,
    alpha: f64,
    beta: f64,
    graph_mode: RestartMode,
    out: PathBuf,
}

/// Counters of the seven variants on one instance, in [`ALGORITHMS`] order.
pub fn run_instance(
    inst: &Instance,
    model: &dyn Predictor,
    i0: usize,
    alpha: f64,
    beta: f64,
    graph_mode: RestartMode,
) -> Result<[RunStats; 7]> {
    let plain = dijkstra(inst);
    let cfg = |mode| PredictConfig::new(i0, alpha, beta, mode);
    Ok([
        oracle_run(inst, plain.distance).stats,
        plain.stats,
        dijkstra_pruning(inst, i0).stats,
        dijkstra_prediction(inst, model, cfg(RestartMode::Smart))?.stats,
        dijkstra_prediction(inst, model, cfg(RestartMode::Naive))?.stats,
        dijkstra_prediction(
            inst,
            &bfs_predictor(inst, UNIFORM_MEAN_WEIGHT),
            cfg(graph_mode),
        )?
        .stats,
        dijkstra_prediction(inst, &wbfs_predictor(inst), cfg(graph_mode))?.stats,
    ])
}

/// Mean counters per algorithm; the ratio column divides by the oracle's mean `cum_q`.
pub fn summary_csv(runs: &[[RunStats; 7]]) -> String {
    let n = runs.len().max(1) as f64;
    let mean =
        |k: usize, f: fn(&RunStats) -> u64| runs.iter().map(|r| f(&r[k])).sum::<u64>() as f64 / n;
    let oracle_c = mean(0, |s| s.cum_q);
    let mut out = format!("{SCHEMA}\n{HEADER}\n");
    for (k, name) in ALGORITHMS.iter().enumerate() {
        let c = mean(k, |s| s.cum_q);
        out.push_str(&format!(
            "{name},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{c:.4},{:.4}\n",
            mean(k, |s| s.rm),
            mean(k, |s| s.is),
            mean(k, |s| s.inr),
            mean(k, |s| s.dp),
            mean(k, |s| s.rrm1),
            mean(k, |s| s.rrm2),
            mean(k, |s| s.ris),
            mean(k, |s| s.rdp),
            mean(k, RunStats::q_total),
            mean(k, |s| s.trials),
            c / oracle_c,
        ));
    }
    out
}

pub fn run(args: BenchArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "bench",
    };
    let data: PathBuf = l.require(args.data, "data")?;
    let model_path: PathBuf = l.require(args.model, "model")?;
    let split = parse_split(&l.pick(args.split, "split", "test".to_string())?)?;
    let alpha = l.pick(args.alpha, "alpha", 1.0)?;
    let beta = l.pick(args.beta, "beta", 1.05)?;
    let graph_mode = parse_mode(&l.pick(args.graph_mode, "graph_mode", "smart".to_string())?)?;
    let limit = l.pick_opt(args.limit, "limit")?;
    let out = out_path(l.pick_opt(args.out, "out")?, &data, "bench.csv");
    let per_instance: Option<PathBuf> = l.pick_opt(args.per_instance, "per_instance")?;
    PredictConfig::new(1, alpha, beta, RestartMode::Smart).validate()?;

    let corpus = Corpus::open(&data)?;
    let model = load_model(&model_path)?;
    let mut rows = corpus.rows(split)?;
    if let Some(n) = limit {
        rows.truncate(n);
    }
    let results: Vec<[RunStats; 7]> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let inst = corpus.load(split, i, row)?;
            run_instance(&inst, &model, model.i0, alpha, beta, graph_mode)
        })
        .collect::<Result<_>>()?;

    let mut mismatches = Vec::new();
    for (i, (r, row)) in results.iter().zip(&rows).enumerate() {
        for (k, s) in r.iter().enumerate() {
            if s.distance != row.distance {
                mismatches.push(format!(
                    "instance {i}: {} returned {} but D = {}",
                    ALGORITHMS[k], s.distance, row.distance
                ));
            }
        }
    }

    write_text(&out, &summary_csv(&results))?;
    if let Some(path) = &per_instance {
        let mut text = format!("{SCHEMA}\nindex,algorithm,{}\n", RunStats::CSV_HEADER);
        for (i, r) in results.iter().enumerate() {
            for (k, s) in r.iter().enumerate() {
                text.push_str(&format!("{i},{},{}\n", ALGORITHMS[k], s.to_csv_row()));
            }
        }
        write_text(path, &text)?;
    }
    update_manifest(
        &manifest_dir(&out),
        "bench",
        &BenchManifest {
            data,
            model: model_path,
            split,
            instances: results.len(),
            alpha,
            beta,
            graph_mode,
            out: out.clone(),
        },
    )?;
    eprintln!("{} instances, results in {}", results.len(), out.display());
    if let Some(first) = mismatches.first() {
        return Err(ValidationFailure(format!(
            "{} distance mismatches; first: {first}",
            mismatches.len()
        ))
        .into());
    }
    Ok(())
}
