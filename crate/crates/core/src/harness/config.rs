use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VneError};
use crate::policy::{DEFAULT_BATCH_SIZE, DEFAULT_INIT_STD, DEFAULT_LEARNING_RATE};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CssRl,
    Greedy,
    TopsisTa,
    TopsisNta,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::CssRl,
        Algorithm::Greedy,
        Algorithm::TopsisTa,
        Algorithm::TopsisNta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CssRl => "css-rl",
            Algorithm::Greedy => "greedy",
            Algorithm::TopsisTa => "topsis-ta",
            Algorithm::TopsisNta => "topsis-nta",
        }
    }

    pub fn needs_model(self) -> bool {
        self == Algorithm::CssRl
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = VneError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            VneError::config(
                "algorithm",
                format!("unknown algorithm `{s}` (expected css-rl, greedy, topsis-ta or topsis-nta)"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub init_std: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 50,
            batch_size: DEFAULT_BATCH_SIZE,
            learning_rate: DEFAULT_LEARNING_RATE,
            init_std: DEFAULT_INIT_STD,
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub scenario: ScenarioConfig,
    pub training: TrainingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::CssRl,
            seeds: vec![1, 2, 3, 4, 5],
            scenario: ScenarioConfig::default(),
            training: TrainingConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| VneError::io(path, e))?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            VneError::Format { message, .. } => VneError::Format {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| VneError::Format {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate().map_err(|e| match e {
            VneError::Config { key, message } => VneError::Config {
                key: format!("scenario.{key}"),
                message,
            },
            other => other,
        })?;
        let t = &self.training;
        if t.batch_size == 0 {
            return Err(VneError::config("training.batch_size", "must be at least 1"));
        }
        if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
            return Err(VneError::config("training.learning_rate", "must be positive"));
        }
        if !(t.init_std > 0.0 && t.init_std.is_finite()) {
            return Err(VneError::config("training.init_std", "must be positive"));
        }
        Ok(())
    }

    /// Copy with the scenario seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.scenario.seed = seed;
        cfg
    }
}
