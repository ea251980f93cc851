//! Unified model checkpoints.
//!
//! A checkpoint is one versioned JSON file holding every trained network
//! (widths, activations, and parameters in decimal form), the
//! safety-parameter normalizer that inference must reuse, and the seed the
//! run was trained with. Nothing time- or machine-dependent is stored, so
//! retraining with the same inputs rewrites the file byte for byte, and
//! parameters survive a save/load round trip value-exact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::latent::{safety_dim, Encoder, Normalizer};
use crate::nn::DenseNet;
use crate::policy::PolicyNet;
use crate::trainer::TrainConfig;

/// Version written into every checkpoint; readers reject anything else.
pub const CHECKPOINT_VERSION: u32 = 1;

/// The trained model, tagged by training method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ModelSpec {
    /// Full method: safety parameters are encoded into a latent code that
    /// conditions the policy; a decoder regularizes the code.
    Genosil {
        encoder: Encoder,
        decoder: DenseNet,
        policy: PolicyNet,
    },
    /// Goal-conditioned behavior cloning: the policy sees only the goal.
    Gcbc { policy: PolicyNet },
}

impl ModelSpec {
    pub fn method_name(&self) -> &'static str {
        match self {
            ModelSpec::Genosil { .. } => "genosil",
            ModelSpec::Gcbc { .. } => "gcbc",
        }
    }

    pub fn policy(&self) -> &PolicyNet {
        match self {
            ModelSpec::Genosil { policy, .. } | ModelSpec::Gcbc { policy } => policy,
        }
    }
}

/// One training run's persisted output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub env: EnvKind,
    /// Seed the training run used; recorded for provenance.
    pub seed: u64,
    /// Affine map applied to raw safety parameters before encoding (and to
    /// the goal block before goal-only conditioning).
    pub normalizer: Normalizer,
    pub model: ModelSpec,
    /// Hyperparameters the run used, echoed for inspection. `None` for
    /// checkpoints assembled outside the training loop.
    #[serde(default)]
    pub train: Option<TrainConfig>,
}

impl Checkpoint {
    /// Check every stored network and its agreement with the environment's
    /// dimensions.
    pub fn validate(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::SchemaVersion {
                expected: CHECKPOINT_VERSION,
                found: self.version,
            });
        }
        let env = self.env;
        let c_dim = safety_dim(env.space_dim());
        if self.normalizer.dim() != c_dim {
            return Err(Error::DimensionMismatch {
                what: "checkpoint normalizer width",
                expected: c_dim,
                got: self.normalizer.dim(),
            });
        }
        let policy = self.model.policy();
        policy.validate()?;
        if policy.state_dim != env.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "checkpoint policy state width",
                expected: env.state_dim(),
                got: policy.state_dim,
            });
        }
        if policy.action_dim() != env.action_dim() {
            return Err(Error::DimensionMismatch {
                what: "checkpoint policy action width",
                expected: env.action_dim(),
                got: policy.action_dim(),
            });
        }
        match &self.model {
            ModelSpec::Genosil {
                encoder,
                decoder,
                policy,
            } => {
                encoder.validate()?;
                decoder.validate()?;
                if encoder.input_dim() != c_dim {
                    return Err(Error::DimensionMismatch {
                        what: "checkpoint encoder input width",
                        expected: c_dim,
                        got: encoder.input_dim(),
                    });
                }
                if decoder.input_dim() != encoder.latent_dim() {
                    return Err(Error::DimensionMismatch {
                        what: "checkpoint decoder input width",
                        expected: encoder.latent_dim(),
                        got: decoder.input_dim(),
                    });
                }
                if decoder.output_dim() != c_dim {
                    return Err(Error::DimensionMismatch {
                        what: "checkpoint decoder output width",
                        expected: c_dim,
                        got: decoder.output_dim(),
                    });
                }
                if policy.cond_dim != encoder.latent_dim() {
                    return Err(Error::DimensionMismatch {
                        what: "checkpoint policy condition width",
                        expected: encoder.latent_dim(),
                        got: policy.cond_dim,
                    });
                }
            }
            ModelSpec::Gcbc { policy } => {
                if policy.cond_dim != env.space_dim() {
                    return Err(Error::DimensionMismatch {
                        what: "checkpoint policy condition width",
                        expected: env.space_dim(),
                        got: policy.cond_dim,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingCheckpoint(PathBuf::from(path)));
            }
            Err(e) => return Err(Error::io(path.display().to_string(), e)),
        };
        let checkpoint: Checkpoint = serde_json::from_str(&text)?;
        checkpoint.validate()?;
        Ok(checkpoint)
    }

    /// Total trainable parameters across all stored networks.
    pub fn param_count(&self) -> usize {
        match &self.model {
            ModelSpec::Genosil {
                encoder,
                decoder,
                policy,
            } => encoder.param_count() + decoder.param_count() + policy.param_count(),
            ModelSpec::Gcbc { policy } => policy.param_count(),
        }
    }

    /// Multi-line human-readable description of the stored model.
    pub fn summary(&self) -> String {
        let fmt_dims = |dims: Vec<usize>| {
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" -> ")
        };
        let mut out = String::new();
        out.push_str(&format!("method:      {}\n", self.model.method_name()));
        out.push_str(&format!("environment: {}\n", self.env.as_str()));
        out.push_str(&format!("seed:        {}\n", self.seed));
        match &self.model {
            ModelSpec::Genosil {
                encoder,
                decoder,
                policy,
            } => {
                out.push_str(&format!(
                    "latent dim:  {}\n",
                    encoder.latent_dim()
                ));
                out.push_str(&format!(
                    "encoder:     trunk {} with {} + {} head units\n",
                    fmt_dims(encoder.trunk.dims()),
                    encoder.latent_dim(),
                    encoder.latent_dim()
                ));
                out.push_str(&format!("decoder:     {}\n", fmt_dims(decoder.dims())));
                out.push_str(&format!(
                    "policy:      [{} ; {}] {}\n",
                    policy.state_dim,
                    policy.cond_dim,
                    fmt_dims(policy.net.dims())
                ));
            }
            ModelSpec::Gcbc { policy } => {
                out.push_str(&format!(
                    "policy:      [{} ; {}] {}\n",
                    policy.state_dim,
                    policy.cond_dim,
                    fmt_dims(policy.net.dims())
                ));
            }
        }
        out.push_str(&format!("parameters:  {}\n", self.param_count()));
        if let Some(cfg) = &self.train {
            out.push_str(&format!(
                "trained:     {} epochs, batch {}, lr {}\n",
                cfg.epochs, cfg.batch_size, cfg.learning_rate
            ));
            out.push_str(&format!(
                "annealing:   beta_max {}, gamma_max {}, over {} steps\n",
                cfg.beta_max, cfg.gamma_max, cfg.t_anneal
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latent::decoder_kaiming;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vehicle_genosil_checkpoint(seed: u64) -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c_dim = safety_dim(2);
        let latent = 4;
        let encoder = Encoder::kaiming(c_dim, &[16, 16], latent, &mut rng);
        let decoder = decoder_kaiming(latent, &[16], c_dim, &mut rng);
        let policy = PolicyNet::kaiming(3, latent, &[16], 2, &mut rng);
        Checkpoint {
            version: CHECKPOINT_VERSION,
            env: EnvKind::Vehicle,
            seed,
            normalizer: Normalizer::identity(c_dim),
            model: ModelSpec::Genosil {
                encoder,
                decoder,
                policy,
            },
            train: Some(TrainConfig::defaults(EnvKind::Vehicle)),
        }
    }

    fn manipulator_gcbc_checkpoint(seed: u64) -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = PolicyNet::kaiming(3, 3, &[16], 3, &mut rng);
        Checkpoint {
            version: CHECKPOINT_VERSION,
            env: EnvKind::Manipulator,
            seed,
            normalizer: Normalizer::identity(safety_dim(3)),
            model: ModelSpec::Gcbc { policy },
            train: None,
        }
    }

    #[test]
    fn round_trip_is_value_exact() {
        let dir = tempfile::tempdir().unwrap();
        for (name, ckpt) in [
            ("a.json", vehicle_genosil_checkpoint(1)),
            ("b.json", manipulator_gcbc_checkpoint(2)),
        ] {
            let path = dir.path().join(name);
            ckpt.save(&path).unwrap();
            let loaded = Checkpoint::load(&path).unwrap();
            assert_eq!(loaded, ckpt);
        }
    }

    #[test]
    fn round_trip_preserves_inference_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let ckpt = vehicle_genosil_checkpoint(3);
        ckpt.save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();

        let (ModelSpec::Genosil { policy: p0, .. }, ModelSpec::Genosil { policy: p1, .. }) =
            (&ckpt.model, &loaded.model)
        else {
            panic!("expected full models");
        };
        let state = [0.3, -1.2, 0.7];
        let cond = [0.1, -0.4, 0.9, 0.0];
        assert_eq!(
            p0.act_raw(&state, &cond).unwrap(),
            p1.act_raw(&state, &cond).unwrap()
        );
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        let ckpt = vehicle_genosil_checkpoint(4);
        ckpt.save(&a).unwrap();
        ckpt.save(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let mut ckpt = vehicle_genosil_checkpoint(5);
        ckpt.save(&path).unwrap();
        ckpt.version = 9;
        let text = serde_json::to_string(&ckpt).unwrap();
        std::fs::write(&path, text).unwrap();
        match Checkpoint::load(&path) {
            Err(Error::SchemaVersion { found, .. }) => assert_eq!(found, 9),
            other => panic!("expected version rejection, got {other:?}"),
        }
    }

    #[test]
    fn env_model_disagreement_is_rejected() {
        let mut ckpt = vehicle_genosil_checkpoint(6);
        ckpt.env = EnvKind::Manipulator;
        match ckpt.validate() {
            Err(Error::DimensionMismatch { .. }) => {}
            other => panic!("expected dimension rejection, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_reported_as_missing_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("absent.json");
        match Checkpoint::load(&path) {
            Err(Error::MissingCheckpoint(p)) => assert_eq!(p, path),
            other => panic!("expected missing-checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn summary_names_the_method_and_environment() {
        let ckpt = manipulator_gcbc_checkpoint(7);
        let text = ckpt.summary();
        assert!(text.contains("gcbc"));
        assert!(text.contains("manipulator"));
        assert!(text.contains(&format!("{}", ckpt.param_count())));
    }
}
