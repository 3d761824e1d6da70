//! Config loading with `--set` overrides, and typed experiment parameters.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use walklab::model::{ConfigFile, WalkConfig, REFERENCE_MODEL};
use walklab::{Error, Result};

/// Keys that live at the top level of a config file; every other `--set`
/// key goes to `[params]`.
const TOP_LEVEL: &[&str] = &["model", "dim", "generators", "probs", "chi", "seed", "strongly_irreducible"];

/// Reads the config (or the built-in reference model when `path` is `None`)
/// and applies `key=value` overrides.
pub fn load_table(path: Option<&Path>, overrides: &[String]) -> Result<toml::Table> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()))?
        }
        None => {
            let mut t = toml::Table::new();
            t.insert("model".into(), toml::Value::String(REFERENCE_MODEL.into()));
            t
        }
    };
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {o:?} is not of the form key=value")))?;
        set_value(&mut table, key.trim(), parse_value(raw.trim()));
    }
    Ok(table)
}

/// A TOML value if `raw` parses as one, otherwise the raw string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

pub fn set_value(table: &mut toml::Table, key: &str, value: toml::Value) {
    let key = key.strip_prefix("params.").unwrap_or(key);
    if TOP_LEVEL.contains(&key) {
        table.insert(key.to_string(), value);
    } else {
        let params = table.entry("params").or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let toml::Value::Table(p) = params {
            p.insert(key.to_string(), value);
        }
    }
}

pub fn parse_config(table: toml::Table) -> Result<(WalkConfig, ConfigFile)> {
    let file: ConfigFile = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let cfg = WalkConfig::from_file_struct(&file)?;
    Ok((cfg, file))
}

/// Experiment parameters from `[params]`, recording every value used.
pub struct Params {
    table: toml::Table,
    pub resolved: BTreeMap<String, serde_json::Value>,
}

impl Params {
    pub fn new(table: toml::Table) -> Self {
        Self { table, resolved: BTreeMap::new() }
    }

    pub fn get<T: DeserializeOwned + Serialize>(&mut self, key: &str, default: T) -> Result<T> {
        let v = match self.table.get(key) {
            Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| Error::Config(format!("parameter `{key}`: {e}")))?,
            None => default,
        };
        self.resolved.insert(key.to_string(), serde_json::to_value(&v)?);
        Ok(v)
    }

    /// Given keys that no command read.
    pub fn unused(&self) -> Vec<String> {
        self.table.keys().filter(|k| !self.resolved.contains_key(*k)).cloned().collect()
    }
}
