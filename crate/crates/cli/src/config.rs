//! Flat key=value config files.
//!
//! Every command-line flag can instead be supplied from a config file
//! (`--config run.cfg`); explicit flags win over file entries. Keys match
//! flag names with either '-' or '_' separators; '#' starts a comment.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl ConfigMap {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!(
                    "config {}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                );
            };
            entries.insert(normalize(k), v.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key}: cannot parse {raw:?}: {e}"),
            },
        }
    }

    pub fn get_flag(&self, key: &str) -> Result<bool> {
        Ok(matches!(
            self.get::<String>(key)?.as_deref(),
            Some("1") | Some("true") | Some("yes")
        ))
    }
}

/// `flag.or(config[key]).or(default)`.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    cfg: &ConfigMap,
    key: &str,
    default: Option<T>,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = cfg.get::<T>(key)? {
        return Ok(v);
    }
    match default {
        Some(v) => Ok(v),
        None => bail!("missing required parameter --{key} (flag or config)"),
    }
}

/// Comma-separated integer lists like `16,18,20`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let list: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse()).collect();
    let list = list.with_context(|| format!("bad n list {s:?}"))?;
    if list.is_empty() {
        bail!("n list must be non-empty");
    }
    Ok(list)
}
