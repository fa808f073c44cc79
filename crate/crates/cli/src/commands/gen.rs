use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use ssmtsp_core::{
    accept_instance, derive_seed, gen_random_instance, save_instance, Dataset, Instance, Split,
};

use super::parse_split;
use crate::config::Layer;
use crate::corpus::{
    dataset_path, instance_path, manifest_csv, manifest_path, split_stream, update_manifest,
    write_text, GenRecord, ManifestRow,
};
use crate::Global;

const DESK_COUNTS: [usize; 3] = [20_000, 2_000, 2_000];
const PAPER_COUNTS: [usize; 3] = [80_000, 10_000, 10_000];

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Expected out-degree.
    #[arg(long)]
    c: Option<f64>,
    /// Expected number of targets.
    #[arg(long)]
    f: Option<f64>,
    /// Trace length of the datasets; instances must run more than i0 iterations.
    #[arg(long)]
    i0: Option<usize>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    val: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    /// Same instance count for every requested split.
    #[arg(long)]
    count: Option<usize>,
    /// Comma-separated subset of train,val,test.
    #[arg(long)]
    splits: Option<String>,
    /// 80000/10000/10000 instances instead of 20000/2000/2000.
    #[arg(long)]
    paper_scale: bool,
    /// Write manifests and datasets only; instances are regenerated from seeds.
    #[arg(long)]
    no_instances: bool,
}

#[derive(Debug, Serialize)]
struct GenManifest {
    #[serde(flatten)]
    record: GenRecord,
    counts: Vec<(Split, usize)>,
    candidates_drawn: Vec<(Split, u64)>,
    write_instances: bool,
    seed_derivation: &'static str,
}

/// The first `count` accepted instances of `derive_seed(seed, stream, k)`,
/// `k = 0, 1, ...`, produced in parallel batches and handed over in order.
/// Returns the number of candidates drawn.
fn accepted_batches<F>(
    gen: &GenRecord,
    stream: u64,
    count: usize,
    jobs: usize,
    mut sink: F,
) -> Result<u64>
where
    F: FnMut(Vec<Instance>) -> Result<()>,
{
    let mut found = 0;
    let mut next = 0u64;
    let mut consumed = 0u64;
    while found < count {
        let want = (count - found).min(512 * jobs);
        let batch = (want + want / 8 + jobs) as u64;
        let candidates: Vec<Option<Instance>> = (next..next + batch)
            .into_par_iter()
            .map(|k| {
                let params = gen.params(derive_seed(gen.seed, stream, k));
                let inst = gen_random_instance(&params)?;
                Ok(accept_instance(&inst, params.min_iterations).then_some(inst))
            })
            .collect::<Result<_>>()?;
        let mut accepted = Vec::new();
        for (offset, inst) in candidates.into_iter().enumerate() {
            if found == count {
                break;
            }
            consumed = next + offset as u64 + 1;
            if let Some(inst) = inst {
                accepted.push(inst);
                found += 1;
            }
        }
        next += batch;
        sink(accepted)?;
    }
    Ok(consumed)
}

pub fn run(args: GenArgs, g: &Global) -> Result<()> {
    let l = Layer {
        cfg: &g.config,
        section: "gen",
    };
    let out: PathBuf = l.require(args.out, "out")?;
    let gen = GenRecord {
        n: l.pick(args.n, "n", 1000)?,
        c: l.pick(args.c, "c", 8.0)?,
        f: l.pick(args.f, "f", 20.0)?,
        i0: l.pick(args.i0, "i0", 10)?,
        seed: g.seed,
    };
    gen.params(gen.seed).validate()?;
    let scale = if l.switch(args.paper_scale, "paper_scale")? {
        PAPER_COUNTS
    } else {
        DESK_COUNTS
    };
    let count = l.pick_opt(args.count, "count")?;
    let splits: Vec<Split> = l
        .pick(args.splits, "splits", "train,val,test".to_string())?
        .split(',')
        .map(|s| parse_split(s.trim()))
        .collect::<Result<_>>()?;
    let per_split = [
        l.pick(args.train, "train", scale[0])?,
        l.pick(args.val, "val", scale[1])?,
        l.pick(args.test, "test", scale[2])?,
    ];
    let write_instances = !l.switch(args.no_instances, "no_instances")?;

    let mut counts = Vec::new();
    let mut drawn = Vec::new();
    for split in splits {
        let n = count.unwrap_or(match split {
            Split::Train => per_split[0],
            Split::Val => per_split[1],
            Split::Test => per_split[2],
        });
        let mut rows = Vec::with_capacity(n);
        let mut ds = Dataset {
            i0: gen.i0,
            split,
            features: Vec::with_capacity(n),
            targets: Vec::with_capacity(n),
        };
        let candidates = accepted_batches(&gen, split_stream(split), n, g.jobs, |batch| {
            for inst in batch {
                let index = rows.len();
                if write_instances {
                    write_text(&instance_path(&out, split, index), &save_instance(&inst))?;
                }
                ds.push_instance(&inst, index)?;
                rows.push(ManifestRow::describe(&inst));
            }
            Ok(())
        })?;
        write_text(&manifest_path(&out, split), &manifest_csv(&rows))?;
        write_text(&dataset_path(&out, split), &ds.to_csv())?;
        let mean_d = rows.iter().map(|r| r.distance).sum::<f64>() / rows.len().max(1) as f64;
        let mean_hops =
            rows.iter().map(|r| r.hops).sum::<usize>() as f64 / rows.len().max(1) as f64;
        eprintln!(
            "{split}: {} instances from {candidates} candidates, mean D {mean_d:.4}, mean hops {mean_hops:.3}",
            rows.len()
        );
        counts.push((split, rows.len()));
        drawn.push((split, candidates));
    }
    update_manifest(
        &out,
        "gen",
        &GenManifest {
            record: gen,
            counts,
            candidates_drawn: drawn,
            write_instances,
            seed_derivation: "derive_seed(seed, stream, k) with streams train=1, val=2, test=3",
        },
    )
}
