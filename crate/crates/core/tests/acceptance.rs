//! Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails outside the documented conflicts.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use ssmtsp_core::bounds::QUOTED_INRP_BOUND;
use ssmtsp_core::predictors::{MlpModel, UNIFORM_MEAN_WEIGHT};
use ssmtsp_core::sssp::{min_target_distance, shortest_path_summary};
use ssmtsp_core::*;

const BASE_SEED: u64 = 20_200_801;
const TRAIN_STREAM: u64 = 1;
const VAL_STREAM: u64 = 2;
const TEST_STREAM: u64 = 3;
const SMALL_STREAM: u64 = 4;
const KEY_LEMMA_STREAM: u64 = 5;

const I0: usize = 10;
const N_TRAIN: usize = 20_000;
const N_VAL: usize = 500;
const N_TEST: usize = 2_000;
const N_SMALL: u64 = 1_000;
const N_LOCKSTEP: usize = 200;
const N_BOUNDS: usize = 500;
const ALPHA: f64 = 1.0;
const BETA: f64 = 1.05;

const D_MEAN: (f64, f64) = (0.553, 0.02);
const HOPS_MEAN: (f64, f64) = (4.363, 0.25);
const BFS_HOPS_MEAN: (f64, f64) = (2.225, 0.15);
const WEIGHT_MEAN: (f64, f64) = (0.127, 0.01);

const AVG_MAE: (f64, f64) = (0.148, 0.012);
const LINREG_MAE: (f64, f64) = (0.088, 0.010);
const MLP_MAE_MAX: f64 = 0.075;

const RM_MEAN: (f64, f64) = (59.4, 3.0);
const IS_DIJKSTRA: (f64, f64) = (335.5, 15.0);
const IS_PRUNE: (f64, f64) = (122.9, 8.0);
const IS_SMART_GAP: f64 = 15.0;
const INR_DIJKSTRA: (f64, f64) = (276.0, 15.0);
const INR_PRUNE: (f64, f64) = (63.5, 8.0);
const INR_SMART_MAX: f64 = 45.0;
const C_DIJKSTRA: (f64, f64) = (9.6, 1.0);
const C_PRUNE: (f64, f64) = (3.6, 0.5);
const C_SMART_MAX: f64 = 2.2;

const SWEEP_ALPHAS: [f64; 6] = [1.00, 1.05, 1.10, 1.20, 1.50, 2.00];
const SWEEP_BETAS: [f64; 5] = [1.05, 1.10, 1.20, 1.50, 2.00];

const BOUNDS_EPS: f64 = 0.1;
const LEMMA1_GAMMA: f64 = 2.0;
const INRS_MEAN: (f64, f64) = (350.0, 35.0);

const KEY_LEMMA_CASES: u64 = 20;
const KEY_LEMMA_MAX_K: usize = 10;
const KEY_LEMMA_TRIALS: u64 = 100_000;

const GRAD_STEP: f64 = 1e-6;
const GRAD_FLOOR: f64 = 1e-3;
const GRAD_MAX_REL: f64 = 1e-5;

const FIG2A_FAN_OUT: usize = 50;

fn within(x: f64, (centre, tol): (f64, f64)) -> bool {
    (x - centre).abs() <= tol
}

struct Outcome {
    pass: bool,
    /// Failed only on a sub-check that contradicts another criterion.
    conflict: Option<&'static str>,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            conflict: None,
            detail,
        }
    }
}

struct Models {
    mlp: TrainedModel,
    linreg: TrainedModel,
    avg: TrainedModel,
}

/// Stats of one test instance under the five search variants.
struct Runs {
    oracle: RunStats,
    dijkstra: RunStats,
    prune: RunStats,
    smart: RunStats,
    naive: RunStats,
}

struct Ctx {
    val: Vec<Instance>,
    test: Vec<Instance>,
    test_ds: Dataset,
    models: Models,
    runs: Vec<Runs>,
}

fn accepted(stream: u64, count: usize) -> impl Iterator<Item = Instance> {
    AcceptedInstances::new(GenParams::standard(0), BASE_SEED, stream)
        .unwrap()
        .take(count)
}

fn prediction_cfg(mode: RestartMode) -> PredictConfig {
    PredictConfig::new(I0, ALPHA, BETA, mode)
}

fn setup() -> Ctx {
    let t = Instant::now();
    let train_ds = build_dataset(accepted(TRAIN_STREAM, N_TRAIN), I0, Split::Train).unwrap();
    let val: Vec<Instance> = accepted(VAL_STREAM, N_VAL).collect();
    let test: Vec<Instance> = accepted(TEST_STREAM, N_TEST).collect();
    let test_ds = build_dataset(&test, I0, Split::Test).unwrap();
    let cfg = MlpConfig {
        seed: BASE_SEED,
        ..MlpConfig::default()
    };
    let models = Models {
        mlp: TrainedModel::fit_mlp(&train_ds.features, &train_ds.targets, I0, &cfg, |_, _| {})
            .unwrap(),
        linreg: TrainedModel::fit_linreg(&train_ds.features, &train_ds.targets, I0).unwrap(),
        avg: avg_benchmark_fit(&train_ds.targets, I0).unwrap(),
    };
    let runs = test
        .iter()
        .map(|inst| {
            let d = dijkstra(inst).distance;
            let smart =
                dijkstra_prediction(inst, &models.mlp, prediction_cfg(RestartMode::Smart)).unwrap();
            let naive =
                dijkstra_prediction(inst, &models.mlp, prediction_cfg(RestartMode::Naive)).unwrap();
            Runs {
                oracle: oracle_run(inst, d).stats,
                dijkstra: dijkstra(inst).stats,
                prune: dijkstra_pruning(inst, I0).stats,
                smart: smart.stats,
                naive: naive.stats,
            }
        })
        .collect();
    println!(
        "setup: {N_TRAIN} train / {N_VAL} val / {N_TEST} test instances, models trained in {:.1}s",
        t.elapsed().as_secs_f64()
    );
    Ctx {
        val,
        test,
        test_ds,
        models,
        runs,
    }
}

fn exactness(ctx: &Ctx) -> Outcome {
    let mut instances: Vec<Instance> = (0..N_SMALL)
        .map(|k| common::small_random(BASE_SEED, SMALL_STREAM, k))
        .collect();
    instances.extend(common::adversarial_fixtures());
    let mut checks = 0u64;
    let mut reachable = 0;
    let mut mismatches = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        let want = min_target_distance(inst, &bellman_ford_oracle(inst));
        reachable += usize::from(want.is_finite());
        let mut check = |name: &str, got: Result<f64, PredictError>| {
            checks += 1;
            match got {
                Ok(d) if d == want => {}
                Ok(d) => mismatches.push(format!("#{idx} {name}: {d} vs {want}")),
                Err(e) => mismatches.push(format!("#{idx} {name}: {e}")),
            }
        };
        check("dijkstra", Ok(dijkstra(inst).distance));
        check("pruning", Ok(dijkstra_pruning(inst, I0).distance));
        check("oracle", Ok(oracle_run(inst, want).distance));
        let bfs = bfs_predictor(inst, UNIFORM_MEAN_WEIGHT);
        let wbfs = wbfs_predictor(inst);
        let predictors: [(&str, &dyn Predictor); 7] = [
            ("mlp", &ctx.models.mlp),
            ("linreg", &ctx.models.linreg),
            ("avg", &ctx.models.avg),
            ("bfs", &bfs),
            ("wbfs", &wbfs),
            ("const-0.001", &ConstantPredictor(0.001)),
            ("const-inf", &ConstantPredictor(f64::INFINITY)),
        ];
        for (name, p) in predictors {
            for mode in [RestartMode::Smart, RestartMode::Naive] {
                let got = dijkstra_prediction(inst, p, prediction_cfg(mode)).map(|r| r.distance);
                check(&format!("{mode}/{name}"), got);
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{} instances ({reachable} with a reachable target), {checks} runs, {} mismatches{}",
            instances.len(),
            mismatches.len(),
            mismatches
                .first()
                .map(|m| format!(" (first: {m})"))
                .unwrap_or_default()
        ),
    )
}

fn lockstep(ctx: &Ctx) -> Outcome {
    let cfg = prediction_cfg(RestartMode::Smart);
    let mut failures = Vec::new();
    let mut runs = 0;
    for (idx, inst) in ctx.test.iter().take(N_LOCKSTEP).enumerate() {
        runs += 1;
        let rep = lockstep_check(inst, &ctx.models.mlp, cfg).unwrap();
        if let Some(f) = rep.failure {
            failures.push(format!("random #{idx}: {f:?}"));
        }
    }
    for (idx, inst) in common::adversarial_fixtures().iter().enumerate() {
        for p in [
            &ctx.models.mlp as &dyn Predictor,
            &ConstantPredictor(0.001),
            &ConstantPredictor(f64::INFINITY),
        ] {
            runs += 1;
            let rep = lockstep_check(inst, p, cfg).unwrap();
            if let Some(f) = rep.failure {
                failures.push(format!("fixture #{idx}: {f:?}"));
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{runs} lockstep runs, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|m| format!(" (first: {m})"))
                .unwrap_or_default()
        ),
    )
}

fn instance_statistics(ctx: &Ctx) -> Outcome {
    let mut sum_d = 0.0;
    let mut sum_hops = 0usize;
    let mut sum_bfs = 0usize;
    for inst in &ctx.test {
        let path = shortest_path_summary(inst).unwrap();
        sum_d += path.distance;
        sum_hops += path.hops;
        sum_bfs += min_hops_to_target(inst).unwrap();
    }
    let n = ctx.test.len() as f64;
    let d = sum_d / n;
    let hops = sum_hops as f64 / n;
    let bfs = sum_bfs as f64 / n;
    let w = sum_d / sum_hops as f64;
    Outcome::new(
        within(d, D_MEAN)
            && within(hops, HOPS_MEAN)
            && within(bfs, BFS_HOPS_MEAN)
            && within(w, WEIGHT_MEAN),
        format!("D {d:.4}, hops {hops:.3}, bfs hops {bfs:.3}, edge weight {w:.4}"),
    )
}

fn predictor_errors(ctx: &Ctx) -> Outcome {
    let mae = |m: &TrainedModel| evaluate_model(m, &ctx.test_ds).unwrap().mae;
    let avg = mae(&ctx.models.avg);
    let lr = mae(&ctx.models.linreg);
    let mlp = mae(&ctx.models.mlp);
    Outcome::new(
        within(avg, AVG_MAE) && within(lr, LINREG_MAE) && mlp <= MLP_MAE_MAX && mlp < lr,
        format!("test MAE avg {avg:.4}, linreg {lr:.4}, mlp {mlp:.4}"),
    )
}

fn operation_counts(ctx: &Ctx) -> Outcome {
    let n = ctx.runs.len() as f64;
    let mean = |f: &dyn Fn(&Runs) -> u64| ctx.runs.iter().map(f).sum::<u64>() as f64 / n;
    let rm = [
        mean(&|r| r.oracle.rm),
        mean(&|r| r.dijkstra.rm),
        mean(&|r| r.prune.rm),
        mean(&|r| r.smart.rm),
    ];
    let rm_naive = mean(&|r| r.naive.rm);
    let is = [
        mean(&|r| r.dijkstra.is),
        mean(&|r| r.prune.is),
        mean(&|r| r.smart.is),
    ];
    let inr = [
        mean(&|r| r.oracle.inr),
        mean(&|r| r.dijkstra.inr),
        mean(&|r| r.prune.inr),
        mean(&|r| r.smart.inr),
    ];
    let c_oracle = mean(&|r| r.oracle.cum_q);
    let c = [
        mean(&|r| r.dijkstra.cum_q) / c_oracle,
        mean(&|r| r.prune.cum_q) / c_oracle,
        mean(&|r| r.smart.cum_q) / c_oracle,
    ];
    let distances_agree = ctx.runs.iter().all(|r| {
        let d = r.dijkstra.distance;
        [r.oracle, r.prune, r.smart, r.naive]
            .iter()
            .all(|s| s.distance == d)
    });
    let pass = distances_agree
        && rm.iter().all(|&x| within(x, RM_MEAN))
        && rm_naive > rm[0]
        && within(is[0], IS_DIJKSTRA)
        && within(is[1], IS_PRUNE)
        && is[2] <= is[1] - IS_SMART_GAP
        && inr[0] == 0.0
        && within(inr[1], INR_DIJKSTRA)
        && within(inr[2], INR_PRUNE)
        && inr[3] <= INR_SMART_MAX
        && within(c[0], C_DIJKSTRA)
        && within(c[1], C_PRUNE)
        && c[2] <= C_SMART_MAX;
    Outcome::new(
        pass,
        format!(
            "RM o/d/p/s {:.2}/{:.2}/{:.2}/{:.2} naive {rm_naive:.2}; IS d/p/s {:.1}/{:.1}/{:.1}; \
             INR o/d/p/s {:.2}/{:.1}/{:.1}/{:.1}; C ratio d/p/s {:.2}/{:.2}/{:.2}",
            rm[0],
            rm[1],
            rm[2],
            rm[3],
            is[0],
            is[1],
            is[2],
            inr[0],
            inr[1],
            inr[2],
            inr[3],
            c[0],
            c[1],
            c[2]
        ),
    )
}

fn sweep(ctx: &Ctx) -> Outcome {
    let mut grid = vec![vec![0.0; SWEEP_BETAS.len()]; SWEEP_ALPHAS.len()];
    for (i, &alpha) in SWEEP_ALPHAS.iter().enumerate() {
        for (j, &beta) in SWEEP_BETAS.iter().enumerate() {
            let cfg = PredictConfig::new(I0, alpha, beta, RestartMode::Smart);
            let total: u64 = ctx
                .val
                .iter()
                .map(|inst| {
                    dijkstra_prediction(inst, &ctx.models.mlp, cfg)
                        .unwrap()
                        .stats
                        .q_total()
                })
                .sum();
            grid[i][j] = total as f64 / ctx.val.len() as f64;
        }
    }
    let col: Vec<f64> = grid.iter().map(|row| row[0]).collect();
    let minimal = col.iter().all(|&q| col[0] <= q);
    let monotone = col.windows(2).all(|w| w[0] <= w[1]);
    let (bi, bj) = (0..SWEEP_ALPHAS.len())
        .flat_map(|i| (0..SWEEP_BETAS.len()).map(move |j| (i, j)))
        .min_by(|a, b| grid[a.0][a.1].total_cmp(&grid[b.0][b.1]))
        .unwrap();
    let shown: Vec<String> = col.iter().map(|q| format!("{q:.2}")).collect();
    Outcome::new(
        minimal && monotone,
        format!(
            "mean Q at beta={} over alpha {:?}: [{}]; grid minimum {:.2} at ({}, {})",
            SWEEP_BETAS[0],
            SWEEP_ALPHAS,
            shown.join(", "),
            grid[bi][bj],
            SWEEP_ALPHAS[bi],
            SWEEP_BETAS[bj]
        ),
    )
}

fn savings_bounds() -> Outcome {
    let params = GenParams::standard(0);
    let inr = measure_inr(&params, BOUNDS_EPS, N_BOUNDS, BASE_SEED).unwrap();
    let lemma = lemma1_monte_carlo(
        &params,
        &BoundsParams::new(LEMMA1_GAMMA, BOUNDS_EPS).unwrap(),
        N_BOUNDS,
        BASE_SEED,
    )
    .unwrap();
    let ordering = inr.ordering_violations == 0;
    let inrs = within(inr.mean_inrs, INRS_MEAN);
    let inrp = inr.mean_inrp <= inr.inrp_bound;
    let detail = format!(
        "ordering violations {}; mean INRS {:.1} (expected {}±{}), INRR {:.1} (bound {:.1}), \
         INRP {:.1} (bound {:.2}, quoted {}); prune frequency {:.4} ± {:.4} over {} edges \
         (bound {}), uniformity p {}",
        inr.ordering_violations,
        inr.mean_inrs,
        INRS_MEAN.0,
        INRS_MEAN.1,
        inr.mean_inrr,
        inr.inrr_bound,
        inr.mean_inrp,
        inr.inrp_bound,
        QUOTED_INRP_BOUND,
        lemma.frequency,
        lemma.std_err,
        lemma.edges,
        lemma.bound,
        lemma
            .uniform_p
            .map(|p| format!("{p:.3}"))
            .unwrap_or_else(|| "n/a".into())
    );
    let others = ordering && inrp && lemma.pass;
    Outcome {
        pass: others && inrs,
        conflict: (others && !inrs).then_some(
            "mean INRS band cannot hold together with the Dijkstra INR band of criterion 5",
        ),
        detail,
    }
}

fn key_lemma() -> Outcome {
    let mut rng =
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(BASE_SEED, KEY_LEMMA_STREAM, u64::MAX));
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for case in 0..KEY_LEMMA_CASES {
        let k = rng.random_range(0..=KEY_LEMMA_MAX_K);
        let a = rng.random_range(0.0..1.0);
        let mut bs: Vec<f64> = (0..=k).map(|_| a + rng.random_range(0.1..2.0)).collect();
        bs.sort_by(f64::total_cmp);
        let p = rng.random_range(a..bs[0]);
        let rep = key_lemma_check(
            a,
            &bs,
            p,
            KEY_LEMMA_TRIALS,
            derive_seed(BASE_SEED, KEY_LEMMA_STREAM, case),
        )
        .unwrap();
        if !rep.pass {
            failures += 1;
        }
        worst = worst.max((rep.estimate - rep.bound) / rep.std_err.max(f64::MIN_POSITIVE));
    }
    Outcome::new(
        failures == 0,
        format!(
            "{KEY_LEMMA_CASES} cases x {KEY_LEMMA_TRIALS} trials, {failures} above bound + 3 sigma, \
             worst excess {worst:.2} sigma"
        ),
    )
}

fn gradient_check() -> Outcome {
    let net = MlpModel::new(&[4, 6, 6, 1], BASE_SEED);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(BASE_SEED);
    let xs: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..4).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect();
    let ys: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
    let (_, grad) = net.mae_loss_and_gradient(&xs, &ys);
    let p0 = net.params();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for k in 0..p0.len() {
        let mut p = p0.clone();
        p[k] += GRAD_STEP;
        probe.set_params(&p);
        let up = probe.mae_loss_and_gradient(&xs, &ys).0;
        p[k] -= 2.0 * GRAD_STEP;
        probe.set_params(&p);
        let down = probe.mae_loss_and_gradient(&xs, &ys).0;
        let fd = (up - down) / (2.0 * GRAD_STEP);
        let rel = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(GRAD_FLOOR);
        worst = worst.max(rel);
    }
    Outcome::new(
        worst < GRAD_MAX_REL,
        format!("{} parameters, max relative error {worst:.2e}", p0.len()),
    )
}

fn no_savings_fixture() -> Outcome {
    let inst = gen_adversarial_no_savings(0.0, FIG2A_FAN_OUT).unwrap();
    let d = min_target_distance(&inst, &bellman_ford_oracle(&inst));
    let mut pruned = Vec::new();
    let mut exact = true;
    for mode in [RestartMode::Smart, RestartMode::Naive] {
        let run = dijkstra_prediction(
            &inst,
            &ConstantPredictor(d),
            PredictConfig::new(1, 1.0, BETA, mode),
        )
        .unwrap();
        exact &= run.distance == d;
        pruned.push(format!("{mode} {}", run.stats.pruned));
    }
    let oracle = oracle_run(&inst, d).stats.pruned;
    Outcome::new(
        exact && oracle == 0 && pruned.iter().all(|p| p.ends_with(" 0")),
        format!(
            "D {d}, pruned edges: {}, oracle {oracle}",
            pruned.join(", ")
        ),
    )
}

fn dominance(ctx: &Ctx) -> Outcome {
    let mut is_violations = 0;
    let mut rm_violations = 0;
    for r in &ctx.runs {
        if !(r.oracle.is <= r.smart.is && r.smart.is <= r.prune.is && r.prune.is <= r.dijkstra.is) {
            is_violations += 1;
        }
        if r.smart.rm != r.prune.rm {
            rm_violations += 1;
        }
    }
    Outcome::new(
        is_violations == 0 && rm_violations == 0,
        format!(
            "{} instances, IS ordering violations {is_violations}, RM smart/prune mismatches {rm_violations}",
            ctx.runs.len()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let ctx = setup();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("exactness", Box::new(|| exactness(&ctx))),
        ("lockstep", Box::new(|| lockstep(&ctx))),
        (
            "instance statistics",
            Box::new(|| instance_statistics(&ctx)),
        ),
        ("predictor errors", Box::new(|| predictor_errors(&ctx))),
        ("operation counts", Box::new(|| operation_counts(&ctx))),
        ("parameter sweep", Box::new(|| sweep(&ctx))),
        ("savings bounds", Box::new(savings_bounds)),
        ("key lemma", Box::new(key_lemma)),
        ("gradient check", Box::new(gradient_check)),
        ("no-savings fixture", Box::new(no_savings_fixture)),
        ("dominance", Box::new(|| dominance(&ctx))),
    ];
    let mut failed = Vec::new();
    let mut conflicts = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let status = match (out.pass, out.conflict) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (documented conflict)",
            (false, None) => "FAIL",
        };
        println!(
            "[{status}] {:>2} {name}: {} [{:.1}s]",
            i + 1,
            out.detail,
            t.elapsed().as_secs_f64()
        );
        if let (false, Some(why)) = (out.pass, out.conflict) {
            println!("       conflict: {why}");
            conflicts.push(i + 1);
        } else if !out.pass {
            failed.push(i + 1);
        }
    }
    let passed = criteria.len() - failed.len() - conflicts.len();
    println!(
        "acceptance: {passed}/{} passed, failed {failed:?}, documented conflicts {conflicts:?}, {:.0}s",
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
