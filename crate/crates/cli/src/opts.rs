//! Flag / config-file resolution.
//!
//! Every value-bearing flag is optional on the command line; a JSON config
//! file (`--config file`) may supply the same keys (long flag names, with
//! `-` and case normalized to lowercase `_`). Precedence: explicit flag,
//! then config file, then built-in default. Each resolved value is recorded
//! so the output header can carry the full effective configuration, and
//! config keys the subcommand never consumed are reported as usage errors.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::errors::{CliError, CliResult};

/// State/enumeration budget used when neither `--budget` nor `TN_BUDGET`
/// is given.
pub const DEFAULT_BUDGET: u64 = tn_core::swallow::DEFAULT_STATE_BUDGET;

pub struct Resolver {
    file: Map<String, Value>,
    unused: BTreeSet<String>,
    resolved: Map<String, Value>,
}

fn normalize_key(key: &str) -> String {
    key.to_ascii_lowercase().replace('-', "_")
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> CliResult<Self> {
        let mut file = Map::new();
        if let Some(path) = config_path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| {
                CliError::Usage(format!("config {} is not valid JSON: {e}", path.display()))
            })?;
            let obj = doc.as_object().ok_or_else(|| {
                CliError::Usage(format!("config {} must be a JSON object", path.display()))
            })?;
            for (k, v) in obj {
                file.insert(normalize_key(k), v.clone());
            }
        }
        let unused = file.keys().cloned().collect();
        Ok(Resolver {
            file,
            unused,
            resolved: Map::new(),
        })
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.unused.remove(key);
        self.file.get(key).cloned()
    }

    fn record(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.to_string(), value);
    }

    fn bad(key: &str, want: &str, got: &Value) -> CliError {
        CliError::Usage(format!("config key '{key}' must be {want}, got {got}"))
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> CliResult<f64> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => v,
            (None, Some(v)) => v.as_f64().ok_or_else(|| Self::bad(key, "a number", &v))?,
            (None, None) => default,
        };
        self.record(key, json_f64(value));
        Ok(value)
    }

    pub fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> CliResult<Option<f64>> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(v.as_f64().ok_or_else(|| Self::bad(key, "a number", &v))?),
            (None, None) => None,
        };
        if let Some(v) = value {
            self.record(key, json_f64(v));
        }
        Ok(value)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: usize) -> CliResult<usize> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => v,
            (None, Some(v)) => v
                .as_u64()
                .ok_or_else(|| Self::bad(key, "a non-negative integer", &v))?
                as usize,
            (None, None) => default,
        };
        self.record(key, Value::from(value as u64));
        Ok(value)
    }

    pub fn opt_usize(&mut self, key: &str, flag: Option<usize>) -> CliResult<Option<usize>> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(
                v.as_u64()
                    .ok_or_else(|| Self::bad(key, "a non-negative integer", &v))?
                    as usize,
            ),
            (None, None) => None,
        };
        if let Some(v) = value {
            self.record(key, Value::from(v as u64));
        }
        Ok(value)
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> CliResult<u64> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => v,
            (None, Some(v)) => v
                .as_u64()
                .ok_or_else(|| Self::bad(key, "a non-negative integer", &v))?,
            (None, None) => default,
        };
        self.record(key, Value::from(value));
        Ok(value)
    }

    pub fn string(&mut self, key: &str, flag: Option<&str>, default: &str) -> CliResult<String> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => v.to_string(),
            (None, Some(v)) => v
                .as_str()
                .ok_or_else(|| Self::bad(key, "a string", &v))?
                .to_string(),
            (None, None) => default.to_string(),
        };
        self.record(key, Value::String(value.clone()));
        Ok(value)
    }

    pub fn opt_string(&mut self, key: &str, flag: Option<&str>) -> CliResult<Option<String>> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => Some(v.to_string()),
            (None, Some(v)) => Some(
                v.as_str()
                    .ok_or_else(|| Self::bad(key, "a string", &v))?
                    .to_string(),
            ),
            (None, None) => None,
        };
        if let Some(v) = &value {
            self.record(key, Value::String(v.clone()));
        }
        Ok(value)
    }

    /// A required input path: flag, else config, else usage error.
    pub fn required_path(&mut self, key: &str, flag: Option<&Path>) -> CliResult<PathBuf> {
        let value = match (flag, self.take(key)) {
            (Some(v), _) => v.to_path_buf(),
            (None, Some(v)) => PathBuf::from(
                v.as_str()
                    .ok_or_else(|| Self::bad(key, "a path string", &v))?,
            ),
            (None, None) => {
                return Err(CliError::Usage(format!("missing required --{key}")));
            }
        };
        self.record(key, Value::String(value.display().to_string()));
        Ok(value)
    }

    /// A switch: the flag can turn it on; the config can set either way.
    pub fn switch(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let value = if flag {
            true
        } else {
            match self.take(key) {
                Some(v) => v.as_bool().ok_or_else(|| Self::bad(key, "a boolean", &v))?,
                None => false,
            }
        };
        self.record(key, Value::Bool(value));
        Ok(value)
    }

    /// Presentation values (output path, format). Resolved with the same
    /// precedence but kept out of the recorded config header, which lists
    /// only parameters that affect the computed numbers.
    pub fn presentation_string(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &str,
    ) -> CliResult<String> {
        match (flag, self.take(key)) {
            (Some(v), _) => Ok(v.to_string()),
            (None, Some(v)) => Ok(v
                .as_str()
                .ok_or_else(|| Self::bad(key, "a string", &v))?
                .to_string()),
            (None, None) => Ok(default.to_string()),
        }
    }

    pub fn presentation_path(
        &mut self,
        key: &str,
        flag: Option<&Path>,
    ) -> CliResult<Option<PathBuf>> {
        match (flag, self.take(key)) {
            (Some(v), _) => Ok(Some(v.to_path_buf())),
            (None, Some(v)) => Ok(Some(PathBuf::from(
                v.as_str()
                    .ok_or_else(|| Self::bad(key, "a path string", &v))?,
            ))),
            (None, None) => Ok(None),
        }
    }

    /// Enumeration/state budget: `--budget` flag, else config, else the
    /// `TN_BUDGET` environment variable, else the library default.
    pub fn budget(&mut self, flag: Option<u64>) -> CliResult<u64> {
        let value = match (flag, self.take("budget")) {
            (Some(v), _) => v,
            (None, Some(v)) => v
                .as_u64()
                .ok_or_else(|| Self::bad("budget", "a non-negative integer", &v))?,
            (None, None) => match std::env::var("TN_BUDGET") {
                Ok(text) => text.trim().parse::<u64>().map_err(|_| {
                    CliError::Usage(format!(
                        "TN_BUDGET must be a non-negative integer, got '{text}'"
                    ))
                })?,
                Err(_) => DEFAULT_BUDGET,
            },
        };
        self.record("budget", Value::from(value));
        Ok(value)
    }

    /// Marks resolution complete: any config key never consumed by this
    /// subcommand is a usage error, and the recorded header map is returned.
    pub fn finish(self) -> CliResult<Map<String, Value>> {
        if let Some(key) = self.unused.iter().next() {
            return Err(CliError::Usage(format!(
                "config key '{key}' does not apply to this subcommand"
            )));
        }
        Ok(self.resolved)
    }

    /// Records an extra derived value into the config header.
    pub fn note(&mut self, key: &str, value: Value) {
        self.record(key, value);
    }
}

/// f64 -> JSON number (NaN/inf have no JSON form and are usage errors
/// upstream; fall back to string just in case).
pub fn json_f64(x: f64) -> Value {
    Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// Parses a comma-separated list of reals ("0.25,0.5,1").
pub fn parse_f64_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: '{part}' is not a number")))
        })
        .collect()
}

/// Parses a contraction order: "greedy" or a comma-separated permutation.
pub fn parse_order(text: &str) -> CliResult<Option<Vec<usize>>> {
    if text.eq_ignore_ascii_case("greedy") {
        return Ok(None);
    }
    let order = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("order: '{part}' is not a vertex index")))
        })
        .collect::<CliResult<Vec<usize>>>()?;
    Ok(Some(order))
}
