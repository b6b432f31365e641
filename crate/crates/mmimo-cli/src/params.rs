//! Flat key-value parameter sets. Each command declares its defaults; a
//! config file may override them, and `--set` assignments override both.
//! Referencing a key the command does not declare is an error, so typos
//! fail loudly instead of being silently ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn new(defaults: &[(&str, &str)]) -> Self {
        Params {
            values: defaults
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    fn set_known(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.values.contains_key(key) {
            let mut known = String::new();
            for k in self.values.keys() {
                if !known.is_empty() {
                    known.push_str(", ");
                }
                let _ = write!(known, "{k}");
            }
            bail!("unknown parameter '{key}' (known: {known})");
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Merge a flat `key = value` config file. Blank lines and `#` comments
    /// are skipped.
    pub fn apply_config(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config line {} is not 'key = value': {raw:?}",
                    lineno + 1
                );
            };
            self.set_known(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Merge repeatable `--set key=value` assignments. Applied after the
    /// config file, so the command line wins.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<()> {
        for s in sets {
            let Some((key, value)) = s.split_once('=') else {
                bail!("--set argument is not 'key=value': {s:?}");
            };
            self.set_known(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| anyhow::anyhow!("parameter '{key}' was never declared"))
    }

    pub fn get_str(&self, key: &str) -> Result<String> {
        Ok(self.raw(key)?.to_string())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key)?;
        raw.parse()
            .with_context(|| format!("parameter '{key}' is not a number: {raw:?}"))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let raw = self.raw(key)?;
        if let Ok(v) = raw.parse::<usize>() {
            return Ok(v);
        }
        // Allow scientific notation for counts (e.g. trials = 1e6).
        let f: f64 = raw
            .parse()
            .with_context(|| format!("parameter '{key}' is not an integer: {raw:?}"))?;
        if f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
            bail!("parameter '{key}' is not a nonnegative integer: {raw:?}");
        }
        Ok(f as usize)
    }

    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.raw(key)?.to_string();
        raw.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<usize>()
                    .with_context(|| format!("parameter '{key}' entry is not an integer: {s:?}"))
            })
            .collect()
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key)?.to_string();
        raw.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .with_context(|| format!("parameter '{key}' entry is not a number: {s:?}"))
            })
            .collect()
    }

    /// Value of a `*_db` parameter converted to linear scale.
    pub fn get_db_as_linear(&self, key: &str) -> Result<f64> {
        Ok(10f64.powf(self.get_f64(key)? / 10.0))
    }
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}
