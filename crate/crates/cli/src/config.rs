//! Optional JSON configuration layered under command-line flags.
//!
//! The file is an object whose keys mirror long flag names in snake case.
//! Top-level keys apply to every command; an object under a command name
//! (`"bench": {...}`) applies to that command only and takes precedence.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct Config {
    root: Map<String, Value>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        match serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?
        {
            Value::Object(root) => Ok(Self { root }),
            _ => bail!("config {} must hold a JSON object", path.display()),
        }
    }

    fn lookup(&self, section: &str, key: &str) -> Option<&Value> {
        self.root
            .get(section)
            .and_then(Value::as_object)
            .and_then(|s| s.get(key))
            .or_else(|| self.root.get(key))
    }

    pub fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.lookup(section, key)
            .map(|v| {
                serde_json::from_value(v.clone())
                    .with_context(|| format!("config key `{key}` has the wrong type"))
            })
            .transpose()
    }
}

/// Resolves one option for `section`: flag, else config, else `default`.
pub struct Layer<'a> {
    pub cfg: &'a Config,
    pub section: &'a str,
}

impl Layer<'_> {
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.cfg.get(self.section, key)?.unwrap_or(default)),
        }
    }

    pub fn pick_opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.cfg.get(self.section, key),
        }
    }

    /// A boolean switch: set on the command line, or `true` in the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.cfg.get(self.section, key)?.unwrap_or(false))
    }

    pub fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick_opt(flag, key)?
            .with_context(|| format!("missing required option --{}", key.replace('_', "-")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, text).unwrap();
        Config::load(Some(&path)).unwrap()
    }

    #[test]
    fn flags_win_then_section_then_top_level() {
        let c = cfg(r#"{"alpha": 1.5, "beta": 2.0, "bench": {"alpha": 1.1}}"#);
        let bench = Layer {
            cfg: &c,
            section: "bench",
        };
        let sweep = Layer {
            cfg: &c,
            section: "sweep",
        };
        assert_eq!(bench.pick(Some(1.0), "alpha", 9.0).unwrap(), 1.0);
        assert_eq!(bench.pick(None, "alpha", 9.0).unwrap(), 1.1);
        assert_eq!(sweep.pick(None, "alpha", 9.0).unwrap(), 1.5);
        assert_eq!(sweep.pick(None, "gamma", 9.0).unwrap(), 9.0);
        assert!(bench.pick::<f64>(None, "beta", 0.0).unwrap() == 2.0);
    }

    #[test]
    fn type_errors_and_missing_values_are_reported() {
        let c = cfg(r#"{"runs": "many"}"#);
        let l = Layer {
            cfg: &c,
            section: "verify",
        };
        assert!(l.pick::<usize>(None, "runs", 1).is_err());
        assert!(l.require::<String>(None, "out").is_err());
        assert!(!l.switch(false, "paper_scale").unwrap());
    }

    #[test]
    fn rejects_non_objects() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, "[1, 2]").unwrap();
        assert!(Config::load(Some(&path)).is_err());
        assert!(Config::load(Some(&dir.path().join("missing.json"))).is_err());
    }
}
