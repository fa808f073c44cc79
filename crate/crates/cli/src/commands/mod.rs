pub mod bench;
pub mod gen;
pub mod sweep;
pub mod trace;
pub mod train;
pub mod verify;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use ssmtsp_core::{RestartMode, Split, TrainedModel};

/// A check on computed results failed; reported with exit code 2.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

pub fn parse_mode(s: &str) -> Result<RestartMode> {
    match s {
        "smart" => Ok(RestartMode::Smart),
        "naive" => Ok(RestartMode::Naive),
        other => bail!("unknown restart mode `{other}` (expected smart or naive)"),
    }
}

pub fn parse_split(s: &str) -> Result<Split> {
    s.parse::<Split>().map_err(anyhow::Error::msg)
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    TrainedModel::load(path).map_err(|e| anyhow::anyhow!("loading model: {e}"))
}

/// `dir/name` unless an explicit path was given.
pub fn out_path(explicit: Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| dir.join(name))
}

/// Directory that receives the manifest entry for an output file.
pub fn manifest_dir(out: &Path) -> PathBuf {
    match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// `<stem>_<suffix>.<ext>` next to `path`.
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}
