//! `key=value` config files. Command-line flags override file values, which
//! override built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Every key a config file may set. Keys use the flag spelling; `_` is
/// accepted in place of `-`.
pub const KNOWN_KEYS: &[&str] = &[
    "checkpoint-interval",
    "context-size",
    "deterministic",
    "dim",
    "epochs",
    "exponent",
    "k",
    "lambda",
    "lr",
    "max-len",
    "metric",
    "min-count",
    "mode",
    "n-test",
    "n-valid",
    "negatives",
    "phrase-min-count",
    "pretrain-epochs",
    "sampling",
    "seed",
    "shuffle",
    "svd-max-iterations",
    "svd-oversample",
    "svd-tolerance",
    "threads",
    "window",
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(i + 1, "expected key=value"))?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::format(i + 1, format!("unknown key {key:?}")));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::format(i + 1, format!("duplicate key {key:?}")));
            }
        }
        Ok(Config { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Invalid(format!("config: bad value for {key}: {v:?}"))),
        }
    }
}

/// Resolves settings for one command and remembers what was used, for the
/// run manifest.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    file: Config,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(file: Config) -> Self {
        Settings {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn resolve<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        let v = match flag {
            Some(v) => v,
            None => self.file.get(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Records a value that does not come from the config file.
    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}
