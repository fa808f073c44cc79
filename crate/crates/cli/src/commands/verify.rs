use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use ssmtsp_core::bounds::{QUOTED_INRP_BOUND, QUOTED_INRR_BOUND};
use ssmtsp_core::{
    derive_seed, key_lemma_check, lemma1_monte_carlo, measure_inr, BoundsParams, GenParams,
};

use super::{manifest_dir, ValidationFailure};
use crate::config::Layer;
use crate::corpus::{update_manifest, write_text, SCHEMA};
use crate::Global;

const KEY_LEMMA_STREAM: u64 = 5;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances per Monte-Carlo estimate.
    #[arg(long)]
    runs: Option<usize>,
    /// Prediction error `P - D` of the INR runs and the prune-probability check.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    f: Option<f64>,
    /// Random (a, b, P) cases of the order-statistics bound.
    #[arg(long)]
    key_cases: Option<u64>,
    #[arg(long)]
    key_trials: Option<u64>,
    #[arg(long)]
    key_max_k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub quantity: String,
    pub empirical_mean: f64,
    pub bound: f64,
    pub n_runs: u64,
    pub pass: bool,
}

impl Row {
    fn at_most(quantity: &str, mean: f64, bound: f64, n_runs: usize) -> Self {
        Self {
            quantity: quantity.into(),
            empirical_mean: mean,
            bound,
            n_runs: n_runs as u64,
            pass: mean <= bound,
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyManifest {
    n: usize,
    c: f64,
    f: f64,
    runs: usize,
    eps: f64,
    gamma: f64,
    key_cases: u64,
    key_trials: u64,
    key_max_k: usize,
    failures: Vec<String>,
    out: PathBuf,
}

pub fn rows_csv(rows: &[Row]) -> String {
    let mut out = format!("{SCHEMA}\nquantity,empirical_mean,bound,n_runs,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.quantity, r.empirical_mean, r.bound, r.n_runs, r.pass
        ));
    }
    out
}

pub struct VerifyPlan {
    pub params: GenParams,
    pub runs: usize,
    pub eps: f64,
    pub gamma: f64,
    pub key_cases: u64,
    pub key_trials: u64,
    pub key_max_k: usize,
    pub seed: u64,
}

pub fn verify(plan: &VerifyPlan) -> Result<Vec<Row>> {
    let p = &plan.params;
    let q = p.f / p.n as f64;
    let inr = measure_inr(p, plan.eps, plan.runs, plan.seed)?;
    let lemma = lemma1_monte_carlo(
        p,
        &BoundsParams::new(plan.gamma, plan.eps)?,
        plan.runs,
        plan.seed,
    )?;
    let runs = inr.runs;
    let mut rows = vec![
        Row::at_most("inrs", inr.mean_inrs, (p.c - 1.0) / q, runs),
        Row::at_most("inrr", inr.mean_inrr, inr.inrr_bound, runs),
        Row::at_most("inrr_quoted", inr.mean_inrr, QUOTED_INRR_BOUND, runs),
        Row::at_most("inrp", inr.mean_inrp, inr.inrp_bound, runs),
        Row::at_most("inrp_quoted", inr.mean_inrp, QUOTED_INRP_BOUND, runs),
        Row::at_most("ordering", inr.ordering_violations as f64, 0.0, runs),
        Row {
            quantity: "lemma1".into(),
            empirical_mean: lemma.frequency,
            bound: lemma.bound,
            n_runs: lemma.edges as u64,
            pass: lemma.pass,
        },
    ];
    let mut rng =
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(plan.seed, KEY_LEMMA_STREAM, u64::MAX));
    for case in 0..plan.key_cases {
        let k = rng.random_range(0..=plan.key_max_k);
        let a = rng.random_range(0.0..1.0);
        let mut bs: Vec<f64> = (0..=k).map(|_| a + rng.random_range(0.1..2.0)).collect();
        bs.sort_by(f64::total_cmp);
        let pr = rng.random_range(a..bs[0]);
        let rep = key_lemma_check(
            a,
            &bs,
            pr,
            plan.key_trials,
            derive_seed(plan.seed, KEY_LEMMA_STREAM, case),
        )?;
        rows.push(Row {
            quantity: format!("key_lemma_{case}_k{k}"),
            empirical_mean: rep.estimate,
            bound: rep.bound,
            n_runs: rep.trials,
            pass: rep.pass,
        });
    }
    Ok(rows)
}

pub fn run(args: VerifyArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "verify",
    };
    let defaults = GenParams::standard(0);
    let plan = VerifyPlan {
        params: GenParams::new(
            l.pick(args.n, "n", defaults.n)?,
            l.pick(args.c, "c", defaults.c)?,
            l.pick(args.f, "f", defaults.f)?,
            0,
        ),
        runs: l.pick(args.runs, "runs", 500)?,
        eps: l.pick(args.eps, "eps", 0.1)?,
        gamma: l.pick(args.gamma, "gamma", 2.0)?,
        key_cases: l.pick(args.key_cases, "key_cases", 20)?,
        key_trials: l.pick(args.key_trials, "key_trials", 100_000)?,
        key_max_k: l.pick(args.key_max_k, "key_max_k", 10)?,
        seed: g.seed,
    };
    plan.params.validate()?;
    let out = l.pick(args.out, "out", PathBuf::from("verify.csv"))?;

    let rows = verify(&plan)?;
    write_text(&out, &rows_csv(&rows))?;
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.quantity.clone())
        .collect();
    for r in rows.iter().take(7) {
        eprintln!(
            "{:<12} {:>12.4} bound {:>10.4} {}",
            r.quantity,
            r.empirical_mean,
            r.bound,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    eprintln!(
        "key lemma: {} of {} cases within bound",
        rows.len()
            - 7
            - failures
                .iter()
                .filter(|f| f.starts_with("key_lemma"))
                .count(),
        rows.len() - 7
    );
    update_manifest(
        &manifest_dir(&out),
        "verify",
        &VerifyManifest {
            n: plan.params.n,
            c: plan.params.c,
            f: plan.params.f,
            runs: plan.runs,
            eps: plan.eps,
            gamma: plan.gamma,
            key_cases: plan.key_cases,
            key_trials: plan.key_trials,
            key_max_k: plan.key_max_k,
            failures: failures.clone(),
            out,
        },
    )?;
    if !failures.is_empty() {
        return Err(ValidationFailure(format!("failed checks: {}", failures.join(", "))).into());
    }
    Ok(())
}
