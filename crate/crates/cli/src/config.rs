//! TOML run configuration.
//!
//! ```toml
//! species = "sr87"
//! format = "json"
//!
//! [scan]
//! from = "700nm"
//! to = "900nm"
//!
//! [cavity]
//! g0_mhz = 34       # unit in the key; '/' is spelled `_per_`
//! kappa = "2.6mhz"  # unit in the value
//! ```
//!
//! Dimensioned values must carry a unit, either way. Command-line flags
//! override the file; the file overrides built-in defaults.

use std::path::{Path, PathBuf};

use crate::units::{self, Kind};
use crate::CliError;

pub const SECTIONS: [&str; 4] = ["trap", "clock", "cavity", "scan"];
const TOP_LEVEL: [&str; 4] = ["species", "output", "format", "verbose"];

#[derive(Debug, Clone, Default)]
pub struct Config {
    pub path: Option<PathBuf>,
    table: toml::Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Config::parse(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config, String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        for (key, value) in &table {
            match value {
                toml::Value::Table(_) if SECTIONS.contains(&key.as_str()) => {}
                toml::Value::Table(_) => {
                    return Err(format!("unknown section [{key}]; expected one of {}", SECTIONS.join(", ")))
                }
                _ if TOP_LEVEL.contains(&key.as_str()) => {}
                _ => return Err(format!("unknown top-level key {key:?}")),
            }
        }
        Ok(Config { path: None, table })
    }

    fn top(&self, key: &str) -> Option<&toml::Value> {
        self.table.get(key)
    }

    pub fn top_string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.top(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(CliError::Invalid(format!("config key {key:?} must be a string"))),
        }
    }

    pub fn top_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.top(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(CliError::Invalid(format!("config key {key:?} must be true or false"))),
        }
    }

    pub fn section(&self, name: &'static str) -> Section<'_> {
        debug_assert!(SECTIONS.contains(&name));
        Section { name, table: self.table.get(name).and_then(|v| v.as_table()) }
    }
}

/// One `[section]` of the configuration; empty when absent.
#[derive(Debug, Clone, Copy)]
pub struct Section<'a> {
    pub name: &'static str,
    table: Option<&'a toml::Table>,
}

fn as_number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a toml::Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn invalid(&self, key: &str, what: &str) -> CliError {
        CliError::Invalid(format!("config [{}] {key}: {what}", self.name))
    }

    /// A dimensioned value as SI, from `key = "<num><unit>"` or
    /// `key_<unit> = <num>`.
    pub fn quantity(&self, key: &str, kind: Kind) -> Result<Option<f64>, CliError> {
        if let Some(v) = self.get(key) {
            return match v {
                toml::Value::String(s) => units::parse(s, kind).map(Some).map_err(|e| self.invalid(key, &e.0)),
                _ => Err(self.invalid(key, &format!("unit suffix required, e.g. \"1{}\"", kind.units()[0].0))),
            };
        }
        for (unit, factor) in kind.units() {
            let k = format!("{key}_{}", units::key_suffix(unit));
            if let Some(v) = self.get(&k) {
                return as_number(v).map(|x| Some(x * factor)).ok_or_else(|| self.invalid(&k, "expected a number"));
            }
        }
        Ok(None)
    }

    /// Raw unit-carrying text, for quantities with their own parsers (trap depth).
    pub fn text(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.invalid(key, "expected a string")),
        }
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_number(v).map(Some).ok_or_else(|| self.invalid(key, "expected a number")),
        }
    }

    pub fn integer(&self, key: &str) -> Result<Option<i64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(self.invalid(key, "expected an integer")),
        }
    }

    pub fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.invalid(key, "expected true or false")),
        }
    }
}
