use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use oncosim::{Error, Result};

/// Every key any subcommand understands; anything else in a config file is an error.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "patients",
    "clinical",
    "drug_lines",
    "standardization",
    "unknown_drugs",
    "data",
    "models",
    "agent",
    "rounds",
    "checkpoint_period",
    "window",
    "restricted",
    "min_count",
    "regimens",
    "flush_every",
    "horizon_cap",
    "checkpoint_replay",
    "hidden_width",
    "hidden_layers",
    "learning_rate",
    "gamma",
    "batch_size",
    "replay_capacity",
    "target_sync",
    "epsilon_start",
    "epsilon_min",
    "epsilon_floor_round",
    "eval_episodes",
    "parallel_eval",
    "run",
    "episodes",
    "interval_months",
    "max_lines",
    "report_rounds",
];

/// Flat `key = value` configuration. `#` starts a comment.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(label: &str, text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let schema = |message: String| Error::Schema {
                path: label.to_string(),
                line: n as u64 + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| schema(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(schema(format!("unknown key '{key}'")));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(schema(format!("duplicate key '{key}'")));
            }
        }
        Ok(ConfigFile { values })
    }
}

/// Resolves settings with precedence flag > config file > default and keeps
/// the resolved values for the run manifest.
pub struct Resolver<'c> {
    file: &'c ConfigFile,
    pub resolved: BTreeMap<String, String>,
}

impl<'c> Resolver<'c> {
    pub fn new(file: &'c ConfigFile) -> Self {
        Resolver {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.values.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|e| {
                    Error::Config(format!("config key '{key}': cannot parse '{raw}': {e}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.opt(key, flag)?
            .ok_or_else(|| Error::Config(format!("missing required setting '{key}' (flag --{})", key.replace('_', "-"))))
    }
}
