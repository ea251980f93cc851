//! Latent safety embedding: a small VAE-style encoder/decoder over the
//! safety parameter vector, plus the closed-form losses used to train it.
//!
//! The safety parameter vector `c` packs the obstacle position, obstacle
//! velocity, obstacle radius, and goal position for one moment of one
//! scenario. The encoder maps a normalized `c` to a Gaussian over a latent
//! code `z`; during training `z = mu + sigma .* eps` with fresh standard
//! normal noise, during inference `z = mu`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseNet, Gradients, Tape};

/// Log-variance is clamped to `[-LOGVAR_CLAMP, LOGVAR_CLAMP]` before use so
/// `exp` stays in a sane range; gradients do not flow through a clamped
/// component.
pub const LOGVAR_CLAMP: f64 = 10.0;

/// Width of the flat safety parameter vector for a given space dimension:
/// obstacle position (d) + obstacle velocity (d) + radius (1) + goal (d).
pub const fn safety_dim(space_dim: usize) -> usize {
    3 * space_dim + 1
}

/// Structured view of the safety parameters of one scenario at one moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    pub obstacle_position: Vec<f64>,
    pub obstacle_velocity: Vec<f64>,
    pub obstacle_radius: f64,
    pub goal: Vec<f64>,
}

impl SafetyParams {
    /// Flat layout: `[obs_pos | obs_vel | radius | goal]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(safety_dim(self.goal.len()));
        c.extend_from_slice(&self.obstacle_position);
        c.extend_from_slice(&self.obstacle_velocity);
        c.push(self.obstacle_radius);
        c.extend_from_slice(&self.goal);
        c
    }

    pub fn from_slice(space_dim: usize, c: &[f64]) -> Result<Self> {
        if c.len() != safety_dim(space_dim) {
            return Err(Error::DimensionMismatch {
                what: "safety parameter vector",
                expected: safety_dim(space_dim),
                got: c.len(),
            });
        }
        let d = space_dim;
        Ok(SafetyParams {
            obstacle_position: c[..d].to_vec(),
            obstacle_velocity: c[d..2 * d].to_vec(),
            obstacle_radius: c[2 * d],
            goal: c[2 * d + 1..].to_vec(),
        })
    }

    /// Goal block of a flat safety vector (the last `space_dim` entries).
    /// This is all a goal-only baseline policy gets to see.
    pub fn goal_of(space_dim: usize, c: &[f64]) -> &[f64] {
        &c[c.len() - space_dim..]
    }
}

/// Per-component affine map taking raw safety parameters to roughly
/// `[-1, 1]`, derived from the sampling ranges of the scenario distribution.
/// Stored in checkpoints so evaluation applies the exact training map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Normalizer {
    /// Midpoint/half-width map from per-component `(lo, hi)` ranges.
    /// Degenerate ranges (`hi == lo`) normalize to 0 with unit scale.
    pub fn from_ranges(ranges: &[(f64, f64)]) -> Self {
        let offset = ranges.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let scale = ranges
            .iter()
            .map(|(lo, hi)| {
                let half = 0.5 * (hi - lo);
                if half.abs() < 1e-12 {
                    1.0
                } else {
                    half
                }
            })
            .collect();
        Normalizer { offset, scale }
    }

    pub fn identity(dim: usize) -> Self {
        Normalizer {
            offset: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn normalize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.offset.len() {
            return Err(Error::DimensionMismatch {
                what: "normalizer input",
                expected: self.offset.len(),
                got: raw.len(),
            });
        }
        Ok(raw
            .iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| (x - o) / s)
            .collect())
    }

    pub fn denormalize(&self, norm: &[f64]) -> Result<Vec<f64>> {
        if norm.len() != self.offset.len() {
            return Err(Error::DimensionMismatch {
                what: "normalizer input",
                expected: self.offset.len(),
                got: norm.len(),
            });
        }
        Ok(norm
            .iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(x, (o, s))| x * s + o)
            .collect())
    }
}

/// One draw from the encoder: the sampled code plus the Gaussian it came from.
#[derive(Debug, Clone)]
pub struct LatentSample {
    pub z: Vec<f64>,
    pub mu: Vec<f64>,
    /// Already clamped to `[-LOGVAR_CLAMP, LOGVAR_CLAMP]`.
    pub logvar: Vec<f64>,
}

/// Everything needed to run the encoder's reverse pass for one sample.
#[derive(Debug, Clone)]
pub struct EncoderTape {
    trunk: Tape,
    mu: Tape,
    logvar: Tape,
    eps: Vec<f64>,
    sigma: Vec<f64>,
    /// False where the log-variance clamp was active (gradient blocked).
    pass_through: Vec<bool>,
}

/// Parameter gradients for the three encoder nets plus d/d(c_norm).
#[derive(Debug, Clone)]
pub struct EncoderGradients {
    pub trunk: Gradients,
    pub mu_head: Gradients,
    pub logvar_head: Gradients,
    pub d_input: Vec<f64>,
}

impl EncoderGradients {
    /// Flat layout matches [`Encoder::flatten_params_into`]:
    /// trunk, mu head, logvar head.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        self.trunk.flatten_into(out);
        self.mu_head.flatten_into(out);
        self.logvar_head.flatten_into(out);
    }
}

/// Gaussian encoder: shared ReLU trunk feeding separate linear heads for the
/// mean and log-variance of the latent code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub trunk: DenseNet,
    pub mu_head: DenseNet,
    pub logvar_head: DenseNet,
}

impl Encoder {
    /// Kaiming-initialized encoder: trunk `[c_dim, hidden...]` (ReLU
    /// throughout), heads `[last hidden, latent_dim]` (linear).
    pub fn kaiming<R: Rng + ?Sized>(
        c_dim: usize,
        hidden: &[usize],
        latent_dim: usize,
        rng: &mut R,
    ) -> Self {
        assert!(!hidden.is_empty(), "encoder trunk needs at least one hidden layer");
        let mut trunk_dims = vec![c_dim];
        trunk_dims.extend_from_slice(hidden);
        let trunk = DenseNet::kaiming(&trunk_dims, Activation::Relu, rng);
        let head_dims = [*hidden.last().unwrap(), latent_dim];
        let mu_head = DenseNet::kaiming(&head_dims, Activation::Identity, rng);
        let logvar_head = DenseNet::kaiming(&head_dims, Activation::Identity, rng);
        Encoder {
            trunk,
            mu_head,
            logvar_head,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.trunk.input_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mu_head.output_dim()
    }

    /// Check that trunk and head widths line up (used after deserializing).
    pub fn validate(&self) -> Result<()> {
        self.trunk.validate()?;
        self.mu_head.validate()?;
        self.logvar_head.validate()?;
        let h = self.trunk.output_dim();
        for (name, head) in [("mu head", &self.mu_head), ("logvar head", &self.logvar_head)] {
            if head.input_dim() != h {
                return Err(Error::DimensionMismatch {
                    what: "encoder trunk/head widths",
                    expected: h,
                    got: head.input_dim(),
                });
            }
            let _ = name;
        }
        if self.mu_head.output_dim() != self.logvar_head.output_dim() {
            return Err(Error::DimensionMismatch {
                what: "encoder head widths",
                expected: self.mu_head.output_dim(),
                got: self.logvar_head.output_dim(),
            });
        }
        Ok(())
    }

    /// Training-time encode with explicit noise: `z = mu + sigma .* eps`,
    /// `sigma = exp(logvar / 2)` after clamping the log-variance.
    pub fn encode(&self, c_norm: &[f64], eps: &[f64]) -> Result<(LatentSample, EncoderTape)> {
        if eps.len() != self.latent_dim() {
            return Err(Error::DimensionMismatch {
                what: "latent noise vector",
                expected: self.latent_dim(),
                got: eps.len(),
            });
        }
        let (h, trunk_tape) = self.trunk.forward(c_norm)?;
        let (mu, mu_tape) = self.mu_head.forward(&h)?;
        let (raw_logvar, logvar_tape) = self.logvar_head.forward(&h)?;

        let mut logvar = Vec::with_capacity(raw_logvar.len());
        let mut pass_through = Vec::with_capacity(raw_logvar.len());
        for &lv in &raw_logvar {
            let clamped = lv.clamp(-LOGVAR_CLAMP, LOGVAR_CLAMP);
            pass_through.push(clamped == lv);
            logvar.push(clamped);
        }
        let sigma: Vec<f64> = logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
        let z: Vec<f64> = mu
            .iter()
            .zip(sigma.iter().zip(eps))
            .map(|(m, (s, e))| m + s * e)
            .collect();

        if z.iter().chain(&mu).chain(&logvar).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoder output".into()));
        }

        Ok((
            LatentSample { z, mu, logvar },
            EncoderTape {
                trunk: trunk_tape,
                mu: mu_tape,
                logvar: logvar_tape,
                eps: eps.to_vec(),
                sigma,
                pass_through,
            },
        ))
    }

    /// Training-time encode drawing `eps` from the given RNG.
    pub fn encode_sampled<R: Rng + ?Sized>(
        &self,
        c_norm: &[f64],
        rng: &mut R,
    ) -> Result<(LatentSample, EncoderTape)> {
        let eps: Vec<f64> = (0..self.latent_dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        self.encode(c_norm, &eps)
    }

    /// Inference-time encode: the deterministic code `z = mu`.
    pub fn encode_mean(&self, c_norm: &[f64]) -> Result<Vec<f64>> {
        let h = self.trunk.infer(c_norm)?;
        let mu = self.mu_head.infer(&h)?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoder output".into()));
        }
        Ok(mu)
    }

    /// Reverse pass. `d_z` is the loss gradient arriving at the sampled code,
    /// `d_mu` and `d_logvar` are gradients applied directly to the Gaussian
    /// parameters (the divergence penalty's); `d_logvar` is taken with
    /// respect to the clamped log-variance and is blocked where the clamp
    /// was active.
    pub fn backward(
        &self,
        tape: &EncoderTape,
        d_z: &[f64],
        d_mu: &[f64],
        d_logvar: &[f64],
    ) -> Result<EncoderGradients> {
        let k = self.latent_dim();
        if d_z.len() != k || d_mu.len() != k || d_logvar.len() != k {
            return Err(Error::DimensionMismatch {
                what: "latent gradient vectors",
                expected: k,
                got: d_z.len().min(d_mu.len()).min(d_logvar.len()),
            });
        }
        // z = mu + exp(logvar/2) * eps:
        //   dL/dmu      = d_z + d_mu
        //   dL/dlogvar  = d_z * eps * sigma / 2 + d_logvar   (before the clamp gate)
        let total_d_mu: Vec<f64> = d_z.iter().zip(d_mu).map(|(a, b)| a + b).collect();
        let total_d_logvar: Vec<f64> = (0..k)
            .map(|j| {
                if tape.pass_through[j] {
                    d_z[j] * tape.eps[j] * tape.sigma[j] * 0.5 + d_logvar[j]
                } else {
                    0.0
                }
            })
            .collect();

        let mu_grads = self.mu_head.backward(&tape.mu, &total_d_mu)?;
        let logvar_grads = self.logvar_head.backward(&tape.logvar, &total_d_logvar)?;
        let d_hidden: Vec<f64> = mu_grads
            .d_input
            .iter()
            .zip(&logvar_grads.d_input)
            .map(|(a, b)| a + b)
            .collect();
        let trunk_grads = self.trunk.backward(&tape.trunk, &d_hidden)?;
        let d_input = trunk_grads.d_input.clone();

        Ok(EncoderGradients {
            trunk: trunk_grads,
            mu_head: mu_grads,
            logvar_head: logvar_grads,
            d_input,
        })
    }

    pub fn param_count(&self) -> usize {
        self.trunk.param_count() + self.mu_head.param_count() + self.logvar_head.param_count()
    }

    pub fn flatten_params_into(&self, out: &mut Vec<f64>) {
        self.trunk.flatten_params_into(out);
        self.mu_head.flatten_params_into(out);
        self.logvar_head.flatten_params_into(out);
    }

    pub fn assign_params(&mut self, src: &[f64]) -> usize {
        let mut off = self.trunk.assign_params(src);
        off += self.mu_head.assign_params(&src[off..]);
        off += self.logvar_head.assign_params(&src[off..]);
        off
    }
}

/// Mirror-image decoder mapping a latent code back to normalized safety
/// parameters; reconstruction quality is judged in normalized space.
pub fn decoder_kaiming<R: Rng + ?Sized>(
    latent_dim: usize,
    hidden: &[usize],
    c_dim: usize,
    rng: &mut R,
) -> DenseNet {
    let mut dims = vec![latent_dim];
    dims.extend_from_slice(hidden);
    dims.push(c_dim);
    DenseNet::kaiming(&dims, Activation::Identity, rng)
}

/// Divergence of `N(mu, diag(exp(logvar)))` from the standard normal, for one
/// sample: `-1/2 * sum_j (1 + logvar_j - mu_j^2 - exp(logvar_j))`.
/// Non-negative, zero exactly at `mu = 0, logvar = 0`.
pub fn kl_divergence(mu: &[f64], logvar: &[f64]) -> f64 {
    mu.iter()
        .zip(logvar)
        .map(|(m, lv)| -0.5 * (1.0 + lv - m * m - lv.exp()))
        .sum()
}

/// Per-component gradients of [`kl_divergence`]:
/// `d/dmu_j = mu_j`, `d/dlogvar_j = (exp(logvar_j) - 1) / 2`.
pub fn kl_gradients(mu: &[f64], logvar: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d_mu = mu.to_vec();
    let d_logvar = logvar.iter().map(|lv| 0.5 * (lv.exp() - 1.0)).collect();
    (d_mu, d_logvar)
}

/// Summed squared error `sum_i (a_i - b_i)^2`; the caller divides by the
/// batch size. Gradient with respect to `a` is `2 (a - b)`.
pub fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn safety_params_round_trip_and_layout() {
        let p = SafetyParams {
            obstacle_position: vec![1.0, 2.0],
            obstacle_velocity: vec![0.1, -0.2],
            obstacle_radius: 0.5,
            goal: vec![3.0, 4.0],
        };
        let c = p.to_vec();
        assert_eq!(c, vec![1.0, 2.0, 0.1, -0.2, 0.5, 3.0, 4.0]);
        assert_eq!(c.len(), safety_dim(2));
        assert_eq!(SafetyParams::from_slice(2, &c).unwrap(), p);
        assert_eq!(SafetyParams::goal_of(2, &c), &[3.0, 4.0]);
    }

    #[test]
    fn normalizer_maps_range_bounds_to_unit_interval() {
        let n = Normalizer::from_ranges(&[(-5.0, 5.0), (0.3, 0.8)]);
        let lo = n.normalize(&[-5.0, 0.3]).unwrap();
        let hi = n.normalize(&[5.0, 0.8]).unwrap();
        for v in lo {
            assert!((v + 1.0).abs() < 1e-12);
        }
        for v in hi {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let raw = [1.7, 0.44];
        let back = n.denormalize(&n.normalize(&raw).unwrap()).unwrap();
        for (a, b) in raw.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_is_zero_at_standard_normal() {
        assert_eq!(kl_divergence(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]), 0.0);
    }

    /// Frozen values computed by hand from the closed form.
    #[test]
    fn kl_matches_hand_computed_values() {
        // mu = 1, logvar = 0: -1/2 (1 + 0 - 1 - 1) = 1/2.
        assert!((kl_divergence(&[1.0], &[0.0]) - 0.5).abs() < 1e-15);
        // mu = 0, logvar = ln 2: -1/2 (1 + ln 2 - 0 - 2) = (1 - ln 2) / 2.
        let expected = 0.5 * (1.0 - std::f64::consts::LN_2);
        assert!((kl_divergence(&[0.0], &[std::f64::consts::LN_2]) - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_is_nonnegative_everywhere() {
        use proptest::prelude::*;
        let mut cfg = proptest::test_runner::Config::default();
        cfg.cases = 1000;
        proptest::test_runner::TestRunner::new(cfg)
            .run(
                &(
                    proptest::collection::vec(-100.0f64..100.0, 1..8),
                    proptest::collection::vec(-LOGVAR_CLAMP..LOGVAR_CLAMP, 1..8),
                ),
                |(mu, logvar)| {
                    let k = mu.len().min(logvar.len());
                    prop_assert!(kl_divergence(&mu[..k], &logvar[..k]) >= 0.0);
                    Ok(())
                },
            )
            .unwrap();
    }

    #[test]
    fn kl_gradients_match_finite_differences() {
        let mu = [0.7, -1.3, 0.0];
        let logvar = [0.4, -2.0, 1.1];
        let (d_mu, d_lv) = kl_gradients(&mu, &logvar);
        let h = 1e-6;
        for j in 0..3 {
            let mut up = mu;
            up[j] += h;
            let mut down = mu;
            down[j] -= h;
            let numeric = (kl_divergence(&up, &logvar) - kl_divergence(&down, &logvar)) / (2.0 * h);
            assert!((d_mu[j] - numeric).abs() < 1e-6, "{} vs {}", d_mu[j], numeric);

            let mut up = logvar;
            up[j] += h;
            let mut down = logvar;
            down[j] -= h;
            let numeric = (kl_divergence(&mu, &up) - kl_divergence(&mu, &down)) / (2.0 * h);
            assert!((d_lv[j] - numeric).abs() < 1e-6, "{} vs {}", d_lv[j], numeric);
        }
    }

    #[test]
    fn zero_noise_recovers_the_mean_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let enc = Encoder::kaiming(5, &[16, 16], 3, &mut rng);
        let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (sample, _) = enc.encode(&c, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(sample.z, sample.mu);
        assert_eq!(sample.z, enc.encode_mean(&c).unwrap());
    }

    #[test]
    fn two_draws_differ_by_sigma_times_noise_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let enc = Encoder::kaiming(5, &[16, 16], 4, &mut rng);
        let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e1: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let e2: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (s1, t1) = enc.encode(&c, &e1).unwrap();
        let (s2, _) = enc.encode(&c, &e2).unwrap();
        let sigma: Vec<f64> = s1.logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
        let _ = t1;
        for j in 0..4 {
            let expected = sigma[j] * (e1[j] - e2[j]);
            let got = s1.z[j] - s2.z[j];
            assert!(
                (got - expected).abs() <= 1e-12 * (1.0 + expected.abs()),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn logvar_clamp_saturates_and_blocks_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut enc = Encoder::kaiming(3, &[8], 2, &mut rng);
        // Force a huge pre-clamp log-variance on component 0 via the bias.
        enc.logvar_head.layers_mut()[0].biases[0] = 500.0;
        let c = [0.2, -0.4, 0.9];
        let (sample, tape) = enc.encode(&c, &[0.3, -0.7]).unwrap();
        assert_eq!(sample.logvar[0], LOGVAR_CLAMP);
        assert!(sample.z[0].is_finite());

        let grads = enc
            .backward(&tape, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0])
            .unwrap();
        // Only component 0 of d_logvar was non-zero, and it was clamped, so
        // the logvar head receives no gradient at all.
        assert!(grads.logvar_head.d_biases[0].iter().all(|&g| g == 0.0));
        assert!(grads.logvar_head.d_weights[0].iter().all(|&g| g == 0.0));
    }

    /// Finite differences through the whole encoder for a loss that touches
    /// z, mu, and the clamped logvar at once. Only uses `encode`, never
    /// `backward`, on the numeric side.
    #[test]
    fn encoder_backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut enc = Encoder::kaiming(5, &[6], 3, &mut rng);
        let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eps: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g_z: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g_mu: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g_lv: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();

        let loss = |enc: &Encoder| -> f64 {
            let (s, _) = enc.encode(&c, &eps).unwrap();
            let mut l = 0.0;
            for j in 0..3 {
                l += g_z[j] * s.z[j] + g_mu[j] * s.mu[j] + g_lv[j] * s.logvar[j];
            }
            l
        };

        let (_, tape) = enc.encode(&c, &eps).unwrap();
        let grads = enc.backward(&tape, &g_z, &g_mu, &g_lv).unwrap();
        let mut analytic = Vec::new();
        grads.flatten_into(&mut analytic);

        let n = enc.param_count();
        let mut params = Vec::with_capacity(n);
        enc.flatten_params_into(&mut params);
        let h = 1e-5;
        for p in 0..n {
            let orig = params[p];
            params[p] = orig + h;
            enc.assign_params(&params);
            let up = loss(&enc);
            params[p] = orig - h;
            enc.assign_params(&params);
            let down = loss(&enc);
            params[p] = orig;
            enc.assign_params(&params);
            let numeric = (up - down) / (2.0 * h);
            let diff = (analytic[p] - numeric).abs();
            assert!(
                diff <= 1e-6 + 1e-4 * analytic[p].abs().max(numeric.abs()),
                "param {p}: analytic {} vs numeric {numeric}",
                analytic[p]
            );
        }
    }

    #[test]
    fn encoder_init_is_seed_deterministic() {
        let a = Encoder::kaiming(7, &[64, 64], 8, &mut ChaCha8Rng::seed_from_u64(4));
        let b = Encoder::kaiming(7, &[64, 64], 8, &mut ChaCha8Rng::seed_from_u64(4));
        let (mut pa, mut pb) = (Vec::new(), Vec::new());
        a.flatten_params_into(&mut pa);
        b.flatten_params_into(&mut pb);
        assert_eq!(pa, pb);
    }

    #[test]
    fn decoder_shapes_mirror_the_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dec = decoder_kaiming(8, &[64, 64], 7, &mut rng);
        assert_eq!(dec.input_dim(), 8);
        assert_eq!(dec.output_dim(), 7);
        assert_eq!(dec.dims(), vec![8, 64, 64, 7]);
    }

    #[test]
    fn squared_error_basics() {
        assert_eq!(squared_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(squared_error(&[3.0, 0.0], &[0.0, 4.0]), 25.0);
    }
}
