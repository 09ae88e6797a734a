use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use splitmimo_core::evaluation::{config_hash, SchemeSpec};
use splitmimo_core::{Error, ExperimentConfig, QuantizerSpec};

/// Everything needed to reproduce a sweep bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub preset: String,
    pub version: String,
    pub seed: u64,
    pub trials: usize,
    /// The configuration in its key-value form.
    pub config: String,
    pub config_hash: String,
    pub schemes: Vec<String>,
    pub calibration: BTreeMap<String, QuantizerSpec>,
    pub notes: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl RunManifest {
    pub fn new(
        preset: String,
        config: &ExperimentConfig,
        schemes: &[SchemeSpec],
        calibration: BTreeMap<String, QuantizerSpec>,
        notes: Vec<String>,
        started_unix: u64,
        finished_unix: u64,
    ) -> Self {
        let version = match option_env!("SPLITMIMO_GIT_REV") {
            Some(rev) => format!("{} ({rev})", env!("CARGO_PKG_VERSION")),
            None => env!("CARGO_PKG_VERSION").to_string(),
        };
        RunManifest {
            preset,
            version,
            seed: config.seed,
            trials: config.trials,
            config: config.to_kv_string(),
            config_hash: config_hash(config),
            schemes: schemes.iter().map(|s| s.label.clone()).collect(),
            calibration,
            notes,
            started_unix,
            finished_unix,
        }
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
