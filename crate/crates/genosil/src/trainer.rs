//! Minibatched end-to-end training.
//!
//! The full method jointly optimizes three networks under one annealed
//! objective: an imitation term on the policy output, a KL term pulling the
//! latent posterior toward the unit Gaussian, and a reconstruction term on
//! the decoded safety parameters,
//!
//! ```text
//! L_t = L_imitation + beta_t * L_KL + gamma_t * L_reconstruction
//! beta_t  = beta_max  * min(1, t / T_anneal)
//! gamma_t = gamma_max * min(1, t / T_anneal)
//! ```
//!
//! with `t` counting global minibatch steps. Gradients flow through the
//! policy into the sampled latent code and back into the encoder, and
//! likewise from the decoder, so the code is shaped by all three pressures
//! at once. A single Adam instance updates the concatenation of every
//! trainable parameter. The goal-only baseline trains the same policy
//! architecture on `[state ; normalized goal]` with the imitation term only.
//!
//! The optimization loop is single-threaded and fully seeded (shuffling,
//! initialization, and per-sample noise), so a fixed configuration
//! reproduces checkpoints value-exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, ModelSpec, CHECKPOINT_VERSION};
use crate::dataset::Dataset;
use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::latent::{
    decoder_kaiming, kl_divergence, kl_gradients, safety_dim, squared_error, Encoder, Normalizer,
    SafetyParams,
};
use crate::nn::{AdamState, DenseNet};
use crate::policy::PolicyNet;
use crate::seeding::derive_seed;

/// Seed stream for network initialization.
const INIT_STREAM: u64 = 0x11;
/// Seed stream base for per-epoch shuffling and latent noise.
const EPOCH_STREAM_BASE: u64 = 0x1000;

/// Hyperparameters and artifact paths for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta_max: f64,
    pub gamma_max: f64,
    /// Global minibatch steps over which `beta_t`, `gamma_t` ramp linearly.
    pub t_anneal: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Latent code width `d_z`.
    pub latent_dim: usize,
    pub encoder_hidden: Vec<usize>,
    pub decoder_hidden: Vec<usize>,
    pub policy_hidden: Vec<usize>,
    /// Where the dataset lives; used by the command-line layer, not by
    /// [`train`] itself (which takes a loaded dataset).
    pub dataset_path: Option<PathBuf>,
    /// Where to write the checkpoint (and, next to it, the training log).
    /// `None` keeps everything in memory.
    pub checkpoint_path: Option<PathBuf>,
}

impl TrainConfig {
    /// Environment-aware defaults: latent width 8 for the planar task and 12
    /// for the spatial one; encoder trunk 2x64, mirrored decoder, policy
    /// 2x128.
    pub fn defaults(kind: EnvKind) -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta_max: 0.01,
            gamma_max: 0.1,
            t_anneal: 2000,
            epochs: 50,
            batch_size: 128,
            seed: 0,
            latent_dim: match kind {
                EnvKind::Vehicle => 8,
                EnvKind::Manipulator => 12,
            },
            encoder_hidden: vec![64, 64],
            decoder_hidden: vec![64, 64],
            policy_hidden: vec![128, 128],
            dataset_path: None,
            checkpoint_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if !(self.beta_max >= 0.0 && self.gamma_max >= 0.0) {
            return Err(Error::InvalidConfig(
                "loss weights beta_max and gamma_max must be non-negative".into(),
            ));
        }
        if self.t_anneal < 1 {
            return Err(Error::InvalidConfig("t_anneal must be at least 1".into()));
        }
        if self.epochs < 1 || self.batch_size < 1 {
            return Err(Error::InvalidConfig(
                "epochs and batch size must be at least 1".into(),
            ));
        }
        if self.latent_dim < 1 {
            return Err(Error::InvalidConfig("latent width must be at least 1".into()));
        }
        if self.encoder_hidden.is_empty()
            || self.decoder_hidden.is_empty()
            || self.policy_hidden.is_empty()
        {
            return Err(Error::InvalidConfig(
                "every network needs at least one hidden layer".into(),
            ));
        }
        Ok(())
    }
}

/// Linear ramp `max_value * min(1, t / t_anneal)`.
pub fn anneal_factor(t: u64, max_value: f64, t_anneal: u64) -> f64 {
    max_value * (t as f64 / t_anneal as f64).min(1.0)
}

/// Affine loss combination `imitation + beta * kl + gamma * reconstruction`.
pub fn total_loss(imitation: f64, kl: f64, reconstruction: f64, beta: f64, gamma: f64) -> f64 {
    imitation + beta * kl + gamma * reconstruction
}

/// One line of the JSONL training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRecord {
    pub step: u64,
    pub imitation: f64,
    pub kl: f64,
    pub reconstruction: f64,
    pub beta: f64,
    pub gamma: f64,
    pub total: f64,
}

/// Mean per-term losses over one epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub imitation: f64,
    pub kl: f64,
    pub reconstruction: f64,
    pub total: f64,
}

/// Summary of a finished run. Everything except the wall clock is a pure
/// function of the dataset and configuration.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub global_steps: u64,
    pub final_beta: f64,
    pub final_gamma: f64,
    pub wall_clock_seconds: f64,
}

/// Training-log path next to a checkpoint: `model.json` → `model.log.jsonl`.
pub fn log_path_for(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("log.jsonl")
}

struct TrainLog {
    writer: Option<BufWriter<File>>,
}

impl TrainLog {
    fn create(checkpoint_path: Option<&Path>) -> Result<Self> {
        let writer = match checkpoint_path {
            Some(ckpt) => {
                let path = log_path_for(ckpt);
                let file =
                    File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
                Some(BufWriter::new(file))
            }
            None => None,
        };
        Ok(TrainLog { writer })
    }

    fn record(&mut self, rec: &TrainLogRecord) -> Result<()> {
        if let Some(w) = &mut self.writer {
            let line = serde_json::to_string(rec)?;
            writeln!(w, "{line}").map_err(|e| Error::io("training log", e))?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(w) = &mut self.writer {
            w.flush().map_err(|e| Error::io("training log", e))?;
        }
        Ok(())
    }
}

/// Batch-mean loss terms (unweighted; the caller applies `beta`, `gamma`).
#[derive(Debug, Clone, Copy)]
pub struct LossTerms {
    pub imitation: f64,
    pub kl: f64,
    pub reconstruction: f64,
}

/// One training sample prepared for a batch pass: agent state, normalized
/// safety parameters, expert action, and the unit-normal draw for the
/// reparameterized latent sample.
pub struct TrainSample<'a> {
    pub state: &'a [f64],
    pub c_norm: &'a [f64],
    pub action: &'a [f64],
    pub eps: &'a [f64],
}

/// Forward and reverse passes for one minibatch of the full method.
/// Returns batch-mean loss terms and the flat gradient of
/// `imitation + beta * kl + gamma * reconstruction` in parameter layout
/// `[encoder | decoder | policy]`.
pub fn genosil_batch_grads(
    encoder: &Encoder,
    decoder: &DenseNet,
    policy: &PolicyNet,
    samples: &[TrainSample<'_>],
    beta: f64,
    gamma: f64,
) -> Result<(LossTerms, Vec<f64>)> {
    let inv_b = 1.0 / samples.len() as f64;
    let latent_dim = encoder.latent_dim();

    let mut acc_trunk = encoder.trunk.zero_gradients();
    let mut acc_mu = encoder.mu_head.zero_gradients();
    let mut acc_logvar = encoder.logvar_head.zero_gradients();
    let mut acc_dec = decoder.zero_gradients();
    let mut acc_pol = policy.net.zero_gradients();
    let mut terms = LossTerms {
        imitation: 0.0,
        kl: 0.0,
        reconstruction: 0.0,
    };

    for s in samples {
        let (latent, enc_tape) = encoder.encode(s.c_norm, s.eps)?;
        let (a_raw, pol_tape) = policy.forward(s.state, &latent.z)?;
        let (c_hat, dec_tape) = decoder.forward(&latent.z)?;

        terms.imitation += squared_error(&a_raw, s.action) * inv_b;
        terms.kl += kl_divergence(&latent.mu, &latent.logvar) * inv_b;
        terms.reconstruction += squared_error(&c_hat, s.c_norm) * inv_b;

        let d_a: Vec<f64> = a_raw
            .iter()
            .zip(s.action)
            .map(|(p, t)| 2.0 * (p - t) * inv_b)
            .collect();
        let pol_grads = policy.backward(&pol_tape, &d_a)?;

        let d_chat: Vec<f64> = c_hat
            .iter()
            .zip(s.c_norm)
            .map(|(p, t)| 2.0 * gamma * (p - t) * inv_b)
            .collect();
        let dec_grads = decoder.backward(&dec_tape, &d_chat)?;

        let mut d_z = vec![0.0; latent_dim];
        for (dz, (dp, dd)) in d_z
            .iter_mut()
            .zip(policy.cond_grad(&pol_grads.d_input).iter().zip(&dec_grads.d_input))
        {
            *dz = dp + dd;
        }
        let (kl_dmu, kl_dlv) = kl_gradients(&latent.mu, &latent.logvar);
        let d_mu: Vec<f64> = kl_dmu.iter().map(|g| beta * inv_b * g).collect();
        let d_lv: Vec<f64> = kl_dlv.iter().map(|g| beta * inv_b * g).collect();
        let enc_grads = encoder.backward(&enc_tape, &d_z, &d_mu, &d_lv)?;

        acc_trunk.accumulate_scaled(&enc_grads.trunk, 1.0);
        acc_mu.accumulate_scaled(&enc_grads.mu_head, 1.0);
        acc_logvar.accumulate_scaled(&enc_grads.logvar_head, 1.0);
        acc_dec.accumulate_scaled(&dec_grads, 1.0);
        acc_pol.accumulate_scaled(&pol_grads, 1.0);
    }

    let mut flat = Vec::with_capacity(
        encoder.param_count() + decoder.param_count() + policy.param_count(),
    );
    acc_trunk.flatten_into(&mut flat);
    acc_mu.flatten_into(&mut flat);
    acc_logvar.flatten_into(&mut flat);
    acc_dec.flatten_into(&mut flat);
    acc_pol.flatten_into(&mut flat);
    Ok((terms, flat))
}

/// Imitation-only minibatch pass for the goal-conditioned baseline. Each
/// sample is `(state, normalized goal, expert action)`. Returns the
/// batch-mean imitation loss and its flat policy gradient.
pub fn gcbc_batch_grads(
    policy: &PolicyNet,
    samples: &[(&[f64], &[f64], &[f64])],
) -> Result<(f64, Vec<f64>)> {
    let inv_b = 1.0 / samples.len() as f64;
    let mut acc = policy.net.zero_gradients();
    let mut imitation = 0.0;
    for (state, cond, action) in samples {
        let (a_raw, tape) = policy.forward(state, cond)?;
        imitation += squared_error(&a_raw, action) * inv_b;
        let d_a: Vec<f64> = a_raw
            .iter()
            .zip(*action)
            .map(|(p, t)| 2.0 * (p - t) * inv_b)
            .collect();
        let grads = policy.backward(&tape, &d_a)?;
        acc.accumulate_scaled(&grads, 1.0);
    }
    let mut flat = Vec::with_capacity(policy.param_count());
    acc.flatten_into(&mut flat);
    Ok((imitation, flat))
}

fn check_dataset(dataset: &Dataset) -> Result<()> {
    if dataset.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let first = &dataset.records[0];
    if first.state.len() != dataset.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "dataset state width",
            expected: dataset.state_dim(),
            got: first.state.len(),
        });
    }
    if first.safety.len() != dataset.safety_width() {
        return Err(Error::DimensionMismatch {
            what: "dataset safety width",
            expected: dataset.safety_width(),
            got: first.safety.len(),
        });
    }
    if first.action.len() != dataset.action_dim() {
        return Err(Error::DimensionMismatch {
            what: "dataset action width",
            expected: dataset.action_dim(),
            got: first.action.len(),
        });
    }
    Ok(())
}

/// Normalize every record's safety vector once up front.
fn normalized_safety(dataset: &Dataset, normalizer: &Normalizer) -> Result<Vec<Vec<f64>>> {
    dataset
        .records
        .iter()
        .map(|r| normalizer.normalize(&r.safety))
        .collect()
}

/// Train the full method on a loaded dataset. Writes the checkpoint and a
/// JSONL training log when the configuration names a checkpoint path.
///
/// If the loss turns non-finite the run aborts with
/// [`Error::TrainingAborted`], after writing the parameters from the last
/// healthy step to the checkpoint path (when one is configured).
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Checkpoint, TrainReport)> {
    config.validate()?;
    check_dataset(dataset)?;
    let start = Instant::now();
    let env = dataset.manifest.env;
    let c_dim = safety_dim(env.space_dim());
    let normalizer = dataset.manifest.ranges.normalizer(env);

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, INIT_STREAM));
    let mut encoder = Encoder::kaiming(c_dim, &config.encoder_hidden, config.latent_dim, &mut init_rng);
    let mut decoder = decoder_kaiming(config.latent_dim, &config.decoder_hidden, c_dim, &mut init_rng);
    let mut policy = PolicyNet::kaiming(
        env.state_dim(),
        config.latent_dim,
        &config.policy_hidden,
        env.action_dim(),
        &mut init_rng,
    );

    let c_norms = normalized_safety(dataset, &normalizer)?;
    let n = dataset.records.len();
    let param_count = encoder.param_count() + decoder.param_count() + policy.param_count();
    let mut params = Vec::with_capacity(param_count);
    encoder.flatten_params_into(&mut params);
    decoder.flatten_params_into(&mut params);
    policy.flatten_params_into(&mut params);
    let mut last_good = params.clone();
    let mut adam = AdamState::new(param_count, config.learning_rate);
    let mut log = TrainLog::create(config.checkpoint_path.as_deref())?;

    let assign =
        |params: &[f64], encoder: &mut Encoder, decoder: &mut DenseNet, policy: &mut PolicyNet| {
            let mut off = encoder.assign_params(params);
            off += decoder.assign_params(&params[off..]);
            policy.assign_params(&params[off..off + policy.param_count()]);
        };

    let mut epochs_out = Vec::with_capacity(config.epochs);
    let mut global_step: u64 = 0;
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, EPOCH_STREAM_BASE + epoch as u64));
        indices.shuffle(&mut rng);
        let (mut sum_im, mut sum_kl, mut sum_rec, mut sum_total) = (0.0, 0.0, 0.0, 0.0);

        for batch in indices.chunks(config.batch_size) {
            let beta = anneal_factor(global_step, config.beta_max, config.t_anneal);
            let gamma = anneal_factor(global_step, config.gamma_max, config.t_anneal);

            let mut eps_all = Vec::with_capacity(batch.len() * config.latent_dim);
            for _ in 0..batch.len() * config.latent_dim {
                eps_all.push(StandardNormal.sample(&mut rng));
            }
            let samples: Vec<TrainSample<'_>> = batch
                .iter()
                .enumerate()
                .map(|(j, &i)| TrainSample {
                    state: &dataset.records[i].state,
                    c_norm: &c_norms[i],
                    action: &dataset.records[i].action,
                    eps: &eps_all[j * config.latent_dim..(j + 1) * config.latent_dim],
                })
                .collect();

            let outcome = genosil_batch_grads(&encoder, &decoder, &policy, &samples, beta, gamma)
                .and_then(|(terms, grads)| {
                    let total =
                        total_loss(terms.imitation, terms.kl, terms.reconstruction, beta, gamma);
                    if !total.is_finite() {
                        return Err(Error::NonFinite("training loss".into()));
                    }
                    adam.step(&mut params, &grads)?;
                    if params.iter().any(|p| !p.is_finite()) {
                        return Err(Error::NonFinite("updated parameters".into()));
                    }
                    Ok((terms, total))
                });

            let (terms, total) = match outcome {
                Ok(v) => v,
                Err(Error::NonFinite(what)) => {
                    // Roll back to the last healthy parameters and persist
                    // them before reporting the abort.
                    params.copy_from_slice(&last_good);
                    assign(&params, &mut encoder, &mut decoder, &mut policy);
                    let ckpt = build_genosil_checkpoint(
                        config, env, &normalizer, encoder, decoder, policy,
                    );
                    if let Some(path) = &config.checkpoint_path {
                        ckpt.save(path)?;
                    }
                    log.finish()?;
                    return Err(Error::TrainingAborted {
                        step: global_step,
                        reason: format!("non-finite {what}"),
                    });
                }
                Err(e) => return Err(e),
            };

            last_good.copy_from_slice(&params);
            assign(&params, &mut encoder, &mut decoder, &mut policy);
            log.record(&TrainLogRecord {
                step: global_step,
                imitation: terms.imitation,
                kl: terms.kl,
                reconstruction: terms.reconstruction,
                beta,
                gamma,
                total,
            })?;

            let w = batch.len() as f64;
            sum_im += terms.imitation * w;
            sum_kl += terms.kl * w;
            sum_rec += terms.reconstruction * w;
            sum_total += total * w;
            global_step += 1;
        }

        let inv_n = 1.0 / n as f64;
        epochs_out.push(EpochStats {
            epoch,
            imitation: sum_im * inv_n,
            kl: sum_kl * inv_n,
            reconstruction: sum_rec * inv_n,
            total: sum_total * inv_n,
        });
    }

    log.finish()?;
    let checkpoint =
        build_genosil_checkpoint(config, env, &normalizer, encoder, decoder, policy);
    if let Some(path) = &config.checkpoint_path {
        checkpoint.save(path)?;
    }
    let report = TrainReport {
        epochs: epochs_out,
        global_steps: global_step,
        final_beta: anneal_factor(global_step, config.beta_max, config.t_anneal),
        final_gamma: anneal_factor(global_step, config.gamma_max, config.t_anneal),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((checkpoint, report))
}

fn build_genosil_checkpoint(
    config: &TrainConfig,
    env: EnvKind,
    normalizer: &Normalizer,
    encoder: Encoder,
    decoder: DenseNet,
    policy: PolicyNet,
) -> Checkpoint {
    Checkpoint {
        version: CHECKPOINT_VERSION,
        env,
        seed: config.seed,
        normalizer: normalizer.clone(),
        model: ModelSpec::Genosil {
            encoder,
            decoder,
            policy,
        },
        train: Some(config.clone()),
    }
}

/// Train the goal-conditioned baseline: the same policy architecture fed
/// `[state ; normalized goal]`, optimized with the imitation term only.
pub fn train_gcbc(dataset: &Dataset, config: &TrainConfig) -> Result<(Checkpoint, TrainReport)> {
    config.validate()?;
    check_dataset(dataset)?;
    let start = Instant::now();
    let env = dataset.manifest.env;
    let space = env.space_dim();
    let normalizer = dataset.manifest.ranges.normalizer(env);

    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, INIT_STREAM));
    let mut policy = PolicyNet::kaiming(
        env.state_dim(),
        space,
        &config.policy_hidden,
        env.action_dim(),
        &mut init_rng,
    );

    let c_norms = normalized_safety(dataset, &normalizer)?;
    let goals: Vec<&[f64]> = c_norms
        .iter()
        .map(|c| SafetyParams::goal_of(space, c))
        .collect();
    let n = dataset.records.len();
    let param_count = policy.param_count();
    let mut params = Vec::with_capacity(param_count);
    policy.flatten_params_into(&mut params);
    let mut last_good = params.clone();
    let mut adam = AdamState::new(param_count, config.learning_rate);
    let mut log = TrainLog::create(config.checkpoint_path.as_deref())?;

    let mut epochs_out = Vec::with_capacity(config.epochs);
    let mut global_step: u64 = 0;
    let mut indices: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(config.seed, EPOCH_STREAM_BASE + epoch as u64));
        indices.shuffle(&mut rng);
        let (mut sum_im, mut sum_total) = (0.0, 0.0);

        for batch in indices.chunks(config.batch_size) {
            let beta = anneal_factor(global_step, config.beta_max, config.t_anneal);
            let gamma = anneal_factor(global_step, config.gamma_max, config.t_anneal);
            let samples: Vec<(&[f64], &[f64], &[f64])> = batch
                .iter()
                .map(|&i| {
                    (
                        dataset.records[i].state.as_slice(),
                        goals[i],
                        dataset.records[i].action.as_slice(),
                    )
                })
                .collect();

            let outcome = gcbc_batch_grads(&policy, &samples).and_then(|(imitation, grads)| {
                if !imitation.is_finite() {
                    return Err(Error::NonFinite("training loss".into()));
                }
                adam.step(&mut params, &grads)?;
                if params.iter().any(|p| !p.is_finite()) {
                    return Err(Error::NonFinite("updated parameters".into()));
                }
                Ok(imitation)
            });

            let imitation = match outcome {
                Ok(v) => v,
                Err(Error::NonFinite(what)) => {
                    params.copy_from_slice(&last_good);
                    policy.assign_params(&params);
                    let ckpt = build_gcbc_checkpoint(config, env, &normalizer, policy);
                    if let Some(path) = &config.checkpoint_path {
                        ckpt.save(path)?;
                    }
                    log.finish()?;
                    return Err(Error::TrainingAborted {
                        step: global_step,
                        reason: format!("non-finite {what}"),
                    });
                }
                Err(e) => return Err(e),
            };

            last_good.copy_from_slice(&params);
            policy.assign_params(&params);
            let total = total_loss(imitation, 0.0, 0.0, beta, gamma);
            log.record(&TrainLogRecord {
                step: global_step,
                imitation,
                kl: 0.0,
                reconstruction: 0.0,
                beta,
                gamma,
                total,
            })?;
            let w = batch.len() as f64;
            sum_im += imitation * w;
            sum_total += total * w;
            global_step += 1;
        }

        let inv_n = 1.0 / n as f64;
        epochs_out.push(EpochStats {
            epoch,
            imitation: sum_im * inv_n,
            kl: 0.0,
            reconstruction: 0.0,
            total: sum_total * inv_n,
        });
    }

    log.finish()?;
    let checkpoint = build_gcbc_checkpoint(config, env, &normalizer, policy);
    if let Some(path) = &config.checkpoint_path {
        checkpoint.save(path)?;
    }
    let report = TrainReport {
        epochs: epochs_out,
        global_steps: global_step,
        final_beta: anneal_factor(global_step, config.beta_max, config.t_anneal),
        final_gamma: anneal_factor(global_step, config.gamma_max, config.t_anneal),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((checkpoint, report))
}

fn build_gcbc_checkpoint(
    config: &TrainConfig,
    env: EnvKind,
    normalizer: &Normalizer,
    policy: PolicyNet,
) -> Checkpoint {
    Checkpoint {
        version: CHECKPOINT_VERSION,
        env,
        seed: config.seed,
        normalizer: normalizer.clone(),
        model: ModelSpec::Gcbc { policy },
        train: Some(config.clone()),
    }
}
