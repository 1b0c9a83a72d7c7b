//! Flat `key=value` configuration files. Every command-line flag has an
//! equivalent key; explicit flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn empty() -> Self {
        ConfigMap::default()
    }

    /// Loads `key=value` lines; blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, got `{line}`", lineno + 1);
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses a single value; `None` when the key is absent.
    pub fn get_parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => match v.parse::<T>() {
                Ok(parsed) => Ok(Some(parsed)),
                Err(e) => bail!("config key `{key}`: cannot parse `{v}`: {e}"),
            },
        }
    }

    /// Parses a comma-separated list; `None` when the key is absent.
    pub fn get_list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    match part.parse::<T>() {
                        Ok(parsed) => out.push(parsed),
                        Err(e) => bail!("config key `{key}`: cannot parse `{part}`: {e}"),
                    }
                }
                Ok(Some(out))
            }
        }
    }
}

/// Flag-over-file resolution for a single optional value.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Flag-over-file resolution where the value is required.
pub fn resolve_required<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file).with_context(|| format!("missing required option `{what}` (flag or config key)"))
}
