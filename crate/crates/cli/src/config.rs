//! Parameter resolution: command-line flag, then `--config` file, then the
//! built-in default. Every resolved value is recorded for the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use rskcap::fisher::Scheme;
use rskcap::quadrature::QuadSettings;
use rskcap::capacity::CapacitySettings;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::range::{parse_counts, parse_range};

/// Key-value pairs from a TOML config file. Keys use the long flag names;
/// `_` and `-` are interchangeable.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn flatten(key: &str, value: &toml::Value) -> CliResult<String> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Array(items) => Ok(items
            .iter()
            .map(|v| flatten(key, v))
            .collect::<CliResult<Vec<_>>>()?
            .join(",")),
        _ => Err(CliError::config(key, "expected a string, number, boolean or array")),
    }
}

impl ConfigFile {
    pub fn parse(text: &str, allowed: &[&str]) -> CliResult<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config("config", e.message().to_string()))?;
        let mut values = BTreeMap::new();
        for (raw_key, value) in &table {
            let key = raw_key.replace('_', "-");
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::config(raw_key, "unknown configuration key"));
            }
            values.insert(key.clone(), flatten(&key, value)?);
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: Option<&Path>, allowed: &[&str]) -> CliResult<Self> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", p.display())))?;
                ConfigFile::parse(&text, allowed)
            }
        }
    }
}

/// Resolves parameters and records their effective values.
pub struct Resolver {
    file: ConfigFile,
    effective: Map<String, Value>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Resolver {
            file,
            effective: Map::new(),
        }
    }

    pub fn text(&mut self, key: &str, flag: &Option<String>, default: &str) -> String {
        let v = flag
            .clone()
            .or_else(|| self.file.values.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        self.effective.insert(key.to_string(), Value::String(v.clone()));
        v
    }

    pub fn optional(&mut self, key: &str, flag: &Option<String>) -> Option<String> {
        let v = flag.clone().or_else(|| self.file.values.get(key).cloned());
        self.effective
            .insert(key.to_string(), v.clone().map(Value::String).unwrap_or(Value::Null));
        v
    }

    pub fn range(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<Vec<f64>> {
        let t = self.text(key, flag, default);
        parse_range(&t).map_err(|m| CliError::config(key, m))
    }

    /// A range whose points must all be positive (`+∞` allowed if `inf_ok`).
    pub fn positive_range(
        &mut self,
        key: &str,
        flag: &Option<String>,
        default: &str,
        inf_ok: bool,
    ) -> CliResult<Vec<f64>> {
        let v = self.range(key, flag, default)?;
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0) || (!inf_ok && x.is_infinite())) {
            return Err(CliError::config(key, format!("{bad} is not a positive finite value")));
        }
        Ok(v)
    }

    pub fn counts(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<Vec<u64>> {
        let t = self.text(key, flag, default);
        parse_counts(&t).map_err(|m| CliError::config(key, m))
    }

    pub fn number(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<f64> {
        let v = self.range(key, flag, default)?;
        match v.as_slice() {
            [x] => Ok(*x),
            _ => Err(CliError::config(key, "expected a single value")),
        }
    }

    pub fn positive(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<f64> {
        let x = self.number(key, flag, default)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(CliError::config(key, format!("{x} is not a positive finite value")));
        }
        Ok(x)
    }

    pub fn integer(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<u64> {
        let t = self.text(key, flag, default);
        t.trim()
            .parse()
            .map_err(|_| CliError::config(key, format!("'{t}' is not a non-negative integer")))
    }

    pub fn schemes(&mut self, key: &str, flag: &Option<String>, default: &str) -> CliResult<Vec<Scheme>> {
        let t = self.text(key, flag, default);
        let v = t
            .split(',')
            .map(|s| s.parse::<Scheme>().map_err(|e| CliError::config(key, e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        Ok(v)
    }

    /// Outer quadrature tolerances from `abs-tol` / `rel-tol`; the inner
    /// integral runs a hundred times tighter.
    pub fn capacity_settings(&mut self, abs: &Option<String>, rel: &Option<String>) -> CliResult<CapacitySettings> {
        let d = CapacitySettings::default();
        let a = self.positive("abs-tol", abs, &format!("{:e}", d.outer.abs_tol))?;
        let r = self.positive("rel-tol", rel, &format!("{:e}", d.outer.rel_tol))?;
        let outer = QuadSettings::new(a, r).map_err(|e| CliError::config("abs-tol", e.to_string()))?;
        let inner = QuadSettings::new(a * 1e-2, r * 1e-2).map_err(|e| CliError::config("rel-tol", e.to_string()))?;
        Ok(CapacitySettings { outer, inner })
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.effective.insert(key.to_string(), value);
    }

    pub fn effective(&self) -> &Map<String, Value> {
        &self.effective
    }
}
