//! On-disk layout shared by the commands.
//!
//! A data directory holds `manifest.json`, one `<split>_manifest.csv` and one
//! `<split>_dataset.csv` per split, and optionally the instance files under
//! `<split>/<index>.inst`. Instances without a file are regenerated from the
//! seed recorded in the split manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use ssmtsp_core::sssp::shortest_path_summary;
use ssmtsp_core::{gen_random_instance, load_instance, GenParams, Instance, Split};

pub const MANIFEST: &str = "manifest.json";
pub const SCHEMA: &str = "# schema=1";

pub fn split_stream(split: Split) -> u64 {
    match split {
        Split::Train => 1,
        Split::Val => 2,
        Split::Test => 3,
    }
}

/// Generation settings recorded by `gen` and read back by later commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenRecord {
    pub n: usize,
    pub c: f64,
    pub f: f64,
    pub i0: usize,
    pub seed: u64,
}

impl GenRecord {
    pub fn params(&self, seed: u64) -> GenParams {
        GenParams {
            min_iterations: self.i0,
            ..GenParams::new(self.n, self.c, self.f, seed)
        }
    }
}

/// One accepted instance in a split manifest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifestRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub targets: usize,
    pub distance: f64,
    pub hops: usize,
}

impl ManifestRow {
    pub const HEADER: &'static str = "seed,n,m,targets,D,hops";

    pub fn describe(inst: &Instance) -> Self {
        let path = shortest_path_summary(inst);
        Self {
            seed: inst.meta.seed,
            n: inst.node_count(),
            m: inst.edge_count(),
            targets: inst.target_count(),
            distance: path.map_or(f64::INFINITY, |p| p.distance),
            hops: path.map_or(0, |p| p.hops),
        }
    }

    fn parse(line: &str) -> Option<Self> {
        let mut it = line.split(',');
        let row = Self {
            seed: it.next()?.parse().ok()?,
            n: it.next()?.parse().ok()?,
            m: it.next()?.parse().ok()?,
            targets: it.next()?.parse().ok()?,
            distance: it.next()?.parse().ok()?,
            hops: it.next()?.parse().ok()?,
        };
        it.next().is_none().then_some(row)
    }
}

impl fmt::Display for ManifestRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.seed, self.n, self.m, self.targets, self.distance, self.hops
        )
    }
}

pub fn manifest_csv(rows: &[ManifestRow]) -> String {
    let mut out = format!("{SCHEMA}\n{}\n", ManifestRow::HEADER);
    for r in rows {
        out.push_str(&format!("{r}\n"));
    }
    out
}

pub fn instance_path(dir: &Path, split: Split, index: usize) -> PathBuf {
    dir.join(split.to_string()).join(format!("{index:06}.inst"))
}

pub fn manifest_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{split}_manifest.csv"))
}

pub fn dataset_path(dir: &Path, split: Split) -> PathBuf {
    dir.join(format!("{split}_dataset.csv"))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Stores `record` under `command` in `dir/manifest.json`, keeping other entries.
pub fn update_manifest<T: Serialize>(dir: &Path, command: &str, record: &T) -> Result<()> {
    let path = dir.join(MANIFEST);
    let mut root = if path.exists() {
        match serde_json::from_str(&read_text(&path)?)
            .with_context(|| format!("parsing {}", path.display()))?
        {
            Value::Object(m) => m,
            _ => bail!("{} must hold a JSON object", path.display()),
        }
    } else {
        Map::new()
    };
    root.insert(command.to_string(), serde_json::to_value(record)?);
    root.insert("schema".into(), Value::from(1));
    write_text(&path, &serde_json::to_string_pretty(&Value::Object(root))?)
}

/// A generated data directory.
pub struct Corpus {
    pub dir: PathBuf,
    pub gen: GenRecord,
}

impl Corpus {
    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let root: Value = serde_json::from_str(&read_text(&path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        let gen = root.get("gen").with_context(|| {
            format!(
                "{} has no `gen` entry; run `ssmtsp gen` first",
                path.display()
            )
        })?;
        let gen: GenRecord = serde_json::from_value(gen.clone())
            .with_context(|| format!("reading generation settings from {}", path.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            gen,
        })
    }

    pub fn rows(&self, split: Split) -> Result<Vec<ManifestRow>> {
        let path = manifest_path(&self.dir, split);
        let text = read_text(&path)?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == SCHEMA => {}
            _ => bail!("{}: expected `{SCHEMA}` marker", path.display()),
        }
        match lines.next() {
            Some((_, l)) if l.trim() == ManifestRow::HEADER => {}
            _ => bail!(
                "{}: expected header `{}`",
                path.display(),
                ManifestRow::HEADER
            ),
        }
        lines
            .map(|(no, l)| {
                ManifestRow::parse(l.trim())
                    .with_context(|| format!("{}:{}: bad row `{l}`", path.display(), no + 1))
            })
            .collect()
    }

    /// The instance behind manifest row `index`, from its file or its seed.
    pub fn load(&self, split: Split, index: usize, row: &ManifestRow) -> Result<Instance> {
        let path = instance_path(&self.dir, split, index);
        let inst = if path.exists() {
            load_instance(&read_text(&path)?)
                .with_context(|| format!("parsing {}", path.display()))?
        } else {
            gen_random_instance(&self.gen.params(row.seed))?
        };
        ensure!(
            inst.node_count() == row.n && inst.edge_count() == row.m,
            "{split} instance {index} does not match its manifest row (n {} m {}, expected n {} m {})",
            inst.node_count(),
            inst.edge_count(),
            row.n,
            row.m
        );
        Ok(inst)
    }
}
