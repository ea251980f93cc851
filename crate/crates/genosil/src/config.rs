//! Run configuration files.
//!
//! A run configuration is a single versioned JSON document with one optional
//! section per subcommand. Every field is optional: the command line wins,
//! the file fills in what flags leave unset, and built-in defaults cover the
//! rest. Unknown keys anywhere in the document are rejected, so typos fail
//! loudly instead of silently falling back to defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expert::CbfConfig;
use crate::scenario::ScenarioRanges;

/// Version written into and required of every config file.
pub const CONFIG_VERSION: u32 = 1;

/// Top-level configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    /// Environment name ("vehicle" or "manipulator").
    #[serde(default)]
    pub env: Option<String>,
    /// Master seed shared by commands that don't override it.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generate: Option<GenerateSection>,
    #[serde(default)]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub eval: Option<EvalSection>,
}

/// Dataset-generation settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateSection {
    /// Episodes to keep.
    pub n: Option<usize>,
    /// Dataset body path (the manifest lands next to it).
    pub out: Option<PathBuf>,
    /// Full scenario-range override; omitted fields are not merged — give
    /// the complete structure or none.
    pub ranges: Option<ScenarioRanges>,
    /// Expert controller constants.
    pub cbf: Option<CbfConfig>,
    /// Obstacle speed range scale factor applied to the effective ranges.
    pub speed_scale: Option<f64>,
    /// Obstacle radius range scale factor applied to the effective ranges.
    pub radius_scale: Option<f64>,
}

/// Training settings; unset fields use the environment-aware defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub dataset: Option<PathBuf>,
    /// "genosil" or "gcbc".
    pub method: Option<String>,
    /// Checkpoint path (the training log lands next to it).
    pub out: Option<PathBuf>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub beta_max: Option<f64>,
    pub gamma_max: Option<f64>,
    pub t_anneal: Option<u64>,
    pub latent_dim: Option<usize>,
    pub encoder_hidden: Option<Vec<usize>>,
    pub decoder_hidden: Option<Vec<usize>>,
    pub policy_hidden: Option<Vec<usize>>,
}

/// Evaluation settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Checkpoints to evaluate (rows appear in this order).
    pub checkpoints: Option<Vec<PathBuf>>,
    /// Also evaluate the demonstration expert on the same scenarios.
    pub include_expert: Option<bool>,
    /// Scenario preset name ("default", "shifted-speed", "shifted-radius").
    pub preset: Option<String>,
    pub trials: Option<usize>,
    /// Report path.
    pub out: Option<PathBuf>,
    /// Directory for per-trial trajectory files (one JSONL per trial).
    pub export_trajectories: Option<PathBuf>,
    /// Expert controller constants, when the expert is included.
    pub cbf: Option<CbfConfig>,
}

impl RunConfig {
    /// A config that sets nothing: commands fall through to their defaults.
    pub fn empty() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            env: None,
            seed: None,
            generate: None,
            train: None,
            eval: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let config: RunConfig = serde_json::from_str(&text)?;
        if config.version != CONFIG_VERSION {
            return Err(Error::SchemaVersion {
                expected: CONFIG_VERSION,
                found: config.version,
            });
        }
        Ok(config)
    }

    pub fn generate_section(&self) -> GenerateSection {
        self.generate.clone().unwrap_or_default()
    }

    pub fn train_section(&self) -> TrainSection {
        self.train.clone().unwrap_or_default()
    }

    pub fn eval_section(&self) -> EvalSection {
        self.eval.clone().unwrap_or_default()
    }
}

/// Three-way precedence: command-line flag, then config file, then default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// As [`resolve`] but with no default; `what` names the flag in the error.
pub fn require<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::InvalidConfig(format!("missing required option: {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_loads_with_empty_sections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, "{\"version\": 1}\n").unwrap();
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(config, RunConfig::empty());
        assert_eq!(config.generate_section(), GenerateSection::default());
    }

    #[test]
    fn sections_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let mut config = RunConfig::empty();
        config.env = Some("vehicle".into());
        config.seed = Some(7);
        config.train = Some(TrainSection {
            method: Some("gcbc".into()),
            epochs: Some(3),
            ..TrainSection::default()
        });
        std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, "{\"version\": 1, \"typo_key\": 3}\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Json(_))));

        std::fs::write(
            &path,
            "{\"version\": 1, \"train\": {\"epoches\": 5}}\n",
        )
        .unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Json(_))));
    }

    #[test]
    fn wrong_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, "{\"version\": 9}\n").unwrap();
        assert!(matches!(
            RunConfig::load(&path),
            Err(Error::SchemaVersion {
                expected: CONFIG_VERSION,
                found: 9
            })
        ));
    }

    #[test]
    fn precedence_is_flag_then_file_then_default() {
        assert_eq!(resolve(Some(1), Some(2), 3), 1);
        assert_eq!(resolve(None, Some(2), 3), 2);
        assert_eq!(resolve::<u32>(None, None, 3), 3);
        assert_eq!(require(None, Some(5), "x").unwrap(), 5);
        assert!(require::<u32>(None, None, "the dataset path").is_err());
    }
}
