//! Optional JSON config file. Every key mirrors a flag; explicit flags win,
//! then config values, then built-in defaults.

use std::path::{Path, PathBuf};

use percolo::noise::NoiseSpec;
use serde::Deserialize;

use crate::{CliError, Format};

/// Merged common options (after flag > config > default resolution).
pub struct Common {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<String>,
    // percolate
    pub arch: Option<String>,
    pub delta: Option<usize>,
    pub eta: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub trials: Option<usize>,
    // sample
    pub circuit: Option<String>,
    pub input: Option<String>,
    pub noise: Option<NoiseSpec>,
    pub epsilon: Option<f64>,
    pub num_samples: Option<usize>,
    pub force: Option<bool>,
    pub y_cap: Option<f64>,
    // threshold
    pub fock_n: Option<usize>,
    pub threshold_eta: Option<f64>,
    pub threshold_x: Option<f64>,
    pub threshold_n: Option<usize>,
    // mps-check
    pub modes: Option<usize>,
    pub depth: Option<usize>,
    pub photons: Option<usize>,
    pub circuits: Option<usize>,
    pub trunc_threshold: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        let cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Sim(percolo::SimError::Parse(e)))?;
        Ok(cfg)
    }

    pub fn format_enum(&self) -> Option<Format> {
        match self.format.as_deref() {
            Some("csv") => Some(Format::Csv),
            Some("jsonl") => Some(Format::Jsonl),
            _ => None,
        }
    }
}
