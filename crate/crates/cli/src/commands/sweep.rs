use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use ssmtsp_core::{dijkstra_prediction, Instance, PredictConfig, RestartMode, Split};

use super::{load_model, manifest_dir, out_path, parse_mode, parse_split, sibling};
use crate::config::Layer;
use crate::corpus::{update_manifest, write_text, Corpus, SCHEMA};
use crate::Global;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Directory written by `gen`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    split: Option<String>,
    /// Comma-separated alpha values.
    #[arg(long)]
    alphas: Option<String>,
    /// Comma-separated beta values.
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    /// Use only the first N instances of the split.
    #[arg(long)]
    limit: Option<usize>,
    /// Long-format results; the q and c matrices go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SweepManifest {
    data: PathBuf,
    model: PathBuf,
    split: Split,
    instances: usize,
    mode: RestartMode,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    best: (f64, f64, f64),
    out: PathBuf,
}

/// Mean `q_total` and mean `cum_q` per grid cell, indexed `[alpha][beta]`.
pub struct Grid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl Grid {
    pub fn long_csv(&self) -> String {
        let mut out = format!("{SCHEMA}\nalpha,beta,q,c\n");
        for (i, a) in self.alphas.iter().enumerate() {
            for (j, b) in self.betas.iter().enumerate() {
                out.push_str(&format!(
                    "{a},{b},{:.4},{:.4}\n",
                    self.q[i][j], self.c[i][j]
                ));
            }
        }
        out
    }

    pub fn matrix_csv(&self, values: &[Vec<f64>]) -> String {
        let head: Vec<String> = self.betas.iter().map(|b| b.to_string()).collect();
        let mut out = format!("{SCHEMA}\nalpha\\beta,{}\n", head.join(","));
        for (a, row) in self.alphas.iter().zip(values) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
            out.push_str(&format!("{a},{}\n", cells.join(",")));
        }
        out
    }

    /// `(alpha, beta, q)` of the smallest mean `q`; ties go to the first cell.
    pub fn best(&self) -> (f64, f64, f64) {
        let mut best = (self.alphas[0], self.betas[0], self.q[0][0]);
        for (i, row) in self.q.iter().enumerate() {
            for (j, &q) in row.iter().enumerate() {
                if q < best.2 {
                    best = (self.alphas[i], self.betas[j], q);
                }
            }
        }
        best
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()?;
    ensure!(!v.is_empty(), "empty grid");
    Ok(v)
}

pub fn sweep(
    instances: &[Instance],
    model: &ssmtsp_core::TrainedModel,
    alphas: &[f64],
    betas: &[f64],
    mode: RestartMode,
) -> Result<Grid> {
    let n = instances.len().max(1) as f64;
    let mut q = vec![vec![0.0; betas.len()]; alphas.len()];
    let mut c = q.clone();
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &beta) in betas.iter().enumerate() {
            let cfg = PredictConfig::new(model.i0, alpha, beta, mode);
            let (sq, sc) = instances
                .par_iter()
                .map(|inst| {
                    let s = dijkstra_prediction(inst, model, cfg)?.stats;
                    Ok((s.q_total(), s.cum_q))
                })
                .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
                .map_err(|e: ssmtsp_core::PredictError| anyhow::anyhow!(e))?;
            q[i][j] = sq as f64 / n;
            c[i][j] = sc as f64 / n;
        }
    }
    Ok(Grid {
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        q,
        c,
    })
}

pub fn run(args: SweepArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "sweep",
    };
    let data: PathBuf = l.require(args.data, "data")?;
    let model_path: PathBuf = l.require(args.model, "model")?;
    let split = parse_split(&l.pick(args.split, "split", "val".to_string())?)?;
    let alphas = parse_list(&l.pick(args.alphas, "alphas", "1,1.05,1.1,1.2,1.5,2".to_string())?)?;
    let betas = parse_list(&l.pick(args.betas, "betas", "1.05,1.1,1.2,1.5,2".to_string())?)?;
    let mode = parse_mode(&l.pick(args.mode, "mode", "smart".to_string())?)?;
    let limit = l.pick_opt(args.limit, "limit")?;
    let out = out_path(l.pick_opt(args.out, "out")?, &data, "sweep.csv");
    for &a in &alphas {
        for &b in &betas {
            PredictConfig::new(1, a, b, mode).validate()?;
        }
    }

    let corpus = Corpus::open(&data)?;
    let model = load_model(&model_path)?;
    let mut rows = corpus.rows(split)?;
    if let Some(n) = limit {
        rows.truncate(n);
    }
    ensure!(!rows.is_empty(), "{split} split has no instances");
    let instances: Vec<Instance> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| corpus.load(split, i, row))
        .collect::<Result<_>>()?;
    let grid = sweep(&instances, &model, &alphas, &betas, mode)?;

    write_text(&out, &grid.long_csv())?;
    write_text(&sibling(&out, "q", "csv"), &grid.matrix_csv(&grid.q))?;
    write_text(&sibling(&out, "c", "csv"), &grid.matrix_csv(&grid.c))?;
    let best = grid.best();
    eprintln!(
        "{} instances, minimum mean Q {:.2} at alpha = {}, beta = {}",
        instances.len(),
        best.2,
        best.0,
        best.1
    );
    update_manifest(
        &manifest_dir(&out),
        "sweep",
        &SweepManifest {
            data,
            model: model_path,
            split,
            instances: instances.len(),
            mode,
            alphas,
            betas,
            best,
            out,
        },
    )
}
