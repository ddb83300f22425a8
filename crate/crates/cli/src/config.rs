//! Flat `key = value` run configuration: file parsing, flag overrides,
//! typed accessors, per-command key allowlists, and the canonical hash
//! string that goes into the manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    /// Directory the config file lives in; relative input paths resolve
    /// against it.
    base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut cfg = RunConfig::from_text(&text)?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!("config line {} is not `key = value`: `{line}`", lineno + 1)
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                bail!("config line {} has an empty key", lineno + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(RunConfig {
            values,
            base_dir: PathBuf::from("."),
        })
    }

    /// Applies `--set key=value` style overrides (flags win over the file).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("override `{item}` is not key=value"))?;
            self.values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    /// Rejects keys outside the command's allowlist so typos surface loudly.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                bail!(
                    "unknown config key `{key}` (allowed: {})",
                    allowed.join(", ")
                );
            }
        }
        Ok(())
    }

    /// Canonical form: sorted `key=value` lines. Identical effective configs
    /// hash identically.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("missing required config key `{key}`"))
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| anyhow!("config key `{key}` has a non-numeric value `{v}`")),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| anyhow!("missing required config key `{key}`"))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| anyhow!("config key `{key}` has a non-integer value `{v}`")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split_whitespace().map(|t| t.parse::<f64>()).collect();
                parsed
                    .map(Some)
                    .map_err(|_| anyhow!("config key `{key}` has a non-numeric list `{v}`"))
            }
        }
    }

    pub fn u32_list(&self, key: &str) -> Result<Option<Vec<u32>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: std::result::Result<Vec<u32>, _> =
                    v.split_whitespace().map(|t| t.parse::<u32>()).collect();
                parsed
                    .map(Some)
                    .map_err(|_| anyhow!("config key `{key}` has a non-integer list `{v}`"))
            }
        }
    }

    /// Resolves a path-valued key against the config file's directory.
    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let raw = self.require(key)?;
        let p = PathBuf::from(raw);
        let full = if p.is_absolute() {
            p
        } else {
            self.base_dir.join(p)
        };
        if !full.is_file() {
            bail!(
                "config key `{key}` points to a missing file: {}",
                full.display()
            );
        }
        Ok(full)
    }

    pub fn path_opt(&self, key: &str) -> Result<Option<PathBuf>> {
        if self.get(key).is_none() {
            return Ok(None);
        }
        self.path(key).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut c = RunConfig::from_text("# comment\n eps = 0.02 \nweight = w.txt\n").unwrap();
        assert_eq!(c.get("eps"), Some("0.02"));
        c.apply_overrides(&["eps=0.01".to_string()]).unwrap();
        assert_eq!(c.f64_required("eps").unwrap(), 0.01);
    }

    #[test]
    fn canonical_is_sorted_and_stable() {
        let a = RunConfig::from_text("b = 2\na = 1\n").unwrap();
        let b = RunConfig::from_text("a = 1\nb = 2\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical(), "a=1\nb=2\n");
    }

    #[test]
    fn rejects_bad_lines_and_unknown_keys() {
        assert!(RunConfig::from_text("just words\n").is_err());
        let c = RunConfig::from_text("mystery = 1\n").unwrap();
        let err = c.check_keys(&["eps"]).unwrap_err().to_string();
        assert!(err.contains("mystery"));
    }
}
