use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Usage;

/// Run settings: `key = value` lines from a config file, overridden by
/// explicit flags. Every key read (including defaults) is remembered so the
/// resolved configuration can be written next to the outputs.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, Usage> {
        let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Usage> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Usage(format!("config line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Settings {
            values,
            resolved: RefCell::default(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.resolved.borrow_mut().insert(key.to_string(), v.clone());
        }
        v
    }

    pub fn require(&self, key: &str) -> Result<String, Usage> {
        self.raw(key)
            .ok_or_else(|| Usage(format!("missing required setting --{key}")))
    }

    pub fn get<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T, Usage> {
        match self.raw(key) {
            Some(v) => v.parse().map_err(|_| Usage(format!("bad value for {key}: '{v}'"))),
            None => {
                self.resolved.borrow_mut().insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, Usage> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| Usage(format!("bad value for {key}: '{v}'"))))
            .transpose()
    }

    /// Counts such as `1e6` or `1000000`.
    pub fn count(&self, key: &str, default: usize) -> Result<usize, Usage> {
        let v: f64 = self.get(key, default as f64)?;
        if !(v >= 0.0) || v.fract() != 0.0 || v > 1e15 {
            return Err(Usage(format!("{key} must be a nonnegative integer")));
        }
        Ok(v as usize)
    }

    /// Comma-separated reals.
    pub fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, Usage> {
        match self.raw(key) {
            Some(v) => v
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Usage(format!("bad entry '{t}' in {key}"))))
                .collect(),
            None => {
                let s: Vec<String> = default.iter().map(|x| x.to_string()).collect();
                self.resolved.borrow_mut().insert(key.to_string(), s.join(","));
                Ok(default.to_vec())
            }
        }
    }

    /// Keys that were explicitly given but never read by the command.
    pub fn unused(&self) -> Vec<String> {
        let seen = self.resolved.borrow();
        self.values.keys().filter(|k| !seen.contains_key(*k)).cloned().collect()
    }

    pub fn resolved_text(&self) -> String {
        self.resolved
            .borrow()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
