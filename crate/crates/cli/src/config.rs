use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_CAP_DIM: usize = 16_384;
pub const DEFAULT_CAP_ENUM: usize = 1_000_000;

/// One experiment run, as read from a TOML file.
///
/// ```toml
/// experiment = "kneser"
/// seed = 7
///
/// [params]
/// v = 5
/// k = 2
///
/// [caps]
/// dim = 16384
/// enumeration = 1000000
///
/// [tolerances]
/// exact_vs_formula = 1e-9
///
/// [output]
/// path = "kneser.json"
/// format = "json"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: BTreeMap<String, u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub caps: Caps,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_enum")]
    pub enumeration: usize,
}

fn default_dim() -> usize {
    DEFAULT_CAP_DIM
}

fn default_enum() -> usize {
    DEFAULT_CAP_ENUM
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            dim: DEFAULT_CAP_DIM,
            enumeration: DEFAULT_CAP_ENUM,
        }
    }
}

impl Caps {
    pub fn limits(&self) -> chslab_core::Limits {
        chslab_core::Limits {
            dim: self.dim,
            enumeration: self.enumeration,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            seed: 0,
            caps: Caps::default(),
            tolerances: BTreeMap::new(),
            output: Output::default(),
        }
    }

    pub fn with_param(mut self, key: &str, value: u64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
