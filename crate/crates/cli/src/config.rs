use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use volkov_fp_core::potential::{PlaneWavePotential, PotentialSpec};

use crate::RunError;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level config document shared by every scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Optional; when present it must name the scenario being run.
    #[serde(default)]
    pub scenario: Option<String>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Scenario-specific settings; missing fields take their defaults.
    #[serde(default)]
    pub params: serde_json::Value,
}

/// A parsed config together with what is needed to run it.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub potential: PlaneWavePotential,
    pub hash: String,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let bytes = std::fs::read(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_bytes(&bytes, &base)
    }

    pub fn from_bytes(bytes: &[u8], base_dir: &Path) -> Result<Self, RunError> {
        let config: ScenarioConfig =
            serde_json::from_slice(bytes).map_err(|e| RunError::Config(format!("schema violation: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        if config.workers == Some(0) {
            return Err(RunError::Config("workers must be at least 1".into()));
        }
        let potential = PlaneWavePotential::from_spec(&config.potential, Some(base_dir))
            .map_err(|e| RunError::Config(format!("potential: {e}")))?;
        let hash = hex::encode(Sha256::digest(bytes));
        Ok(LoadedConfig { config, potential, hash, base_dir: base_dir.to_path_buf() })
    }

    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T, RunError> {
        if self.config.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.config.params.clone())
            .map_err(|e| RunError::Config(format!("params: {e}")))
    }
}

pub(crate) fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), RunError> {
    if cond {
        Ok(())
    } else {
        Err(RunError::Config(msg()))
    }
}
