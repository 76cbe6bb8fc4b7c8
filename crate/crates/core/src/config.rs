//! Run configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::eval::CvConfig;
use crate::features::AssemblyConfig;
use crate::ingest::SyntheticRegionConfig;
use crate::models::{ModelConfig, Variant};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub region: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; required by stochastic commands.
    pub seed: Option<u64>,
    pub paths: Paths,
    /// Re-grid a mask-only region at this cell size (degrees).
    pub grid_cell_size: Option<f64>,
    /// Dynamic-task years; defaults to every year with PDSI records.
    pub years: Option<Vec<i32>>,
    pub assembly: AssemblyConfig,
    pub model: Variant,
    pub hyperparameters: ModelConfig,
    /// SMOTE neighbour count for the binary task; `None` disables balancing.
    pub smote_k: Option<usize>,
    pub cv: CvConfig,
    /// Treat the first malformed input row as fatal.
    pub strict: bool,
    pub synth: SyntheticRegionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            paths: Paths::default(),
            grid_cell_size: None,
            years: None,
            assembly: AssemblyConfig::default(),
            model: Variant::Mlp,
            hyperparameters: ModelConfig::default(),
            smote_k: Some(5),
            cv: CvConfig::default(),
            strict: false,
            synth: SyntheticRegionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(cs) = self.grid_cell_size {
            if !(cs.is_finite() && cs > 0.0) {
                return Err(Error::Config(format!("grid cell size {cs} must be positive")));
            }
        }
        let t = self.assembly.fire_threshold;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("fire threshold {t} must be positive")));
        }
        if self.cv.k < 2 {
            return Err(Error::Config(format!("k = {} must be at least 2", self.cv.k)));
        }
        if self.smote_k == Some(0) {
            return Err(Error::Config("SMOTE k must be positive".into()));
        }
        if let Some(ys) = &self.years {
            if ys.is_empty() {
                return Err(Error::Config("years must not be empty".into()));
            }
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("this command needs a master seed (--seed or \"seed\" in the config)".into()))
    }

    /// Provenance block written into every artifact.
    pub fn echo(&self, command: &str) -> Value {
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": self.seed,
            "config": self,
        })
    }
}
