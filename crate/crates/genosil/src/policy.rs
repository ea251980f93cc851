//! Conditioned control policies: a dense net mapping `[state ; condition]`
//! to an action. The condition is a latent safety code for the full method
//! and the bare goal position for the goal-only baseline; the network itself
//! is identical in both cases.
//!
//! The raw (unclamped) network output is what the imitation loss sees during
//! training; actions are clamped to the actuator box only when executed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseNet, Gradients, Tape};

/// Per-component actuator box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ActionBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                what: "action bound vectors",
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::InvalidConfig("action bounds need lo < hi per component".into()));
        }
        Ok(ActionBounds { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamped(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(a, (l, h))| a.clamp(*l, *h))
            .collect()
    }

    pub fn contains(&self, action: &[f64], tol: f64) -> bool {
        action.len() == self.dim()
            && action
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(a, (l, h))| *a >= l - tol && *a <= h + tol)
    }
}

/// Dense policy over the concatenation `[state ; condition]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyNet {
    pub net: DenseNet,
    pub state_dim: usize,
    pub cond_dim: usize,
}

impl PolicyNet {
    /// Kaiming-initialized policy with ReLU hidden layers and a linear head.
    pub fn kaiming<R: Rng + ?Sized>(
        state_dim: usize,
        cond_dim: usize,
        hidden: &[usize],
        action_dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut dims = vec![state_dim + cond_dim];
        dims.extend_from_slice(hidden);
        dims.push(action_dim);
        PolicyNet {
            net: DenseNet::kaiming(&dims, Activation::Identity, rng),
            state_dim,
            cond_dim,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.net.output_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        if self.net.input_dim() != self.state_dim + self.cond_dim {
            return Err(Error::DimensionMismatch {
                what: "policy input width",
                expected: self.state_dim + self.cond_dim,
                got: self.net.input_dim(),
            });
        }
        Ok(())
    }

    fn concat_input(&self, state: &[f64], cond: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.state_dim {
            return Err(Error::DimensionMismatch {
                what: "policy state input",
                expected: self.state_dim,
                got: state.len(),
            });
        }
        if cond.len() != self.cond_dim {
            return Err(Error::DimensionMismatch {
                what: "policy condition input",
                expected: self.cond_dim,
                got: cond.len(),
            });
        }
        let mut input = Vec::with_capacity(self.state_dim + self.cond_dim);
        input.extend_from_slice(state);
        input.extend_from_slice(cond);
        Ok(input)
    }

    /// Unclamped network output (the quantity the imitation loss is taken on).
    pub fn act_raw(&self, state: &[f64], cond: &[f64]) -> Result<Vec<f64>> {
        let out = self.net.infer(&self.concat_input(state, cond)?)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("policy output".into()));
        }
        Ok(out)
    }

    /// Executable action: raw output clamped to the actuator box.
    pub fn act(&self, state: &[f64], cond: &[f64], bounds: &ActionBounds) -> Result<Vec<f64>> {
        if bounds.dim() != self.action_dim() {
            return Err(Error::DimensionMismatch {
                what: "action bounds",
                expected: self.action_dim(),
                got: bounds.dim(),
            });
        }
        Ok(bounds.clamped(&self.act_raw(state, cond)?))
    }

    /// Taped forward over the raw output, for training.
    pub fn forward(&self, state: &[f64], cond: &[f64]) -> Result<(Vec<f64>, Tape)> {
        self.net.forward(&self.concat_input(state, cond)?)
    }

    /// Reverse pass; `d_input` of the result splits as
    /// `[d_state (ignored) ; d_cond]`, and [`PolicyNet::cond_grad`] extracts
    /// the condition part for chaining into an encoder.
    pub fn backward(&self, tape: &Tape, d_raw: &[f64]) -> Result<Gradients> {
        self.net.backward(tape, d_raw)
    }

    /// Condition slice of a policy input gradient.
    pub fn cond_grad<'a>(&self, d_input: &'a [f64]) -> &'a [f64] {
        &d_input[self.state_dim..]
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }

    pub fn flatten_params_into(&self, out: &mut Vec<f64>) {
        self.net.flatten_params_into(out);
    }

    pub fn assign_params(&mut self, src: &[f64]) -> usize {
        self.net.assign_params(src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vehicle_bounds() -> ActionBounds {
        ActionBounds::new(vec![0.0, -2.0], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn bounds_reject_inverted_ranges() {
        assert!(ActionBounds::new(vec![1.0], vec![0.0]).is_err());
        assert!(ActionBounds::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn clamp_is_idempotent_and_stays_inside() {
        use proptest::prelude::*;
        let bounds = vehicle_bounds();
        proptest!(|(a in -10.0f64..10.0, b in -10.0f64..10.0)| {
            let once = bounds.clamped(&[a, b]);
            prop_assert!(bounds.contains(&once, 0.0));
            prop_assert_eq!(&bounds.clamped(&once), &once);
        });
    }

    #[test]
    fn input_is_state_then_condition() {
        // Identity net over 4 inputs reveals the concatenation order.
        let mut policy = PolicyNet {
            net: DenseNet::zeros(&[4, 4], Activation::Identity),
            state_dim: 3,
            cond_dim: 1,
        };
        for i in 0..4 {
            policy.net.layers_mut()[0].weights[i * 4 + i] = 1.0;
        }
        let out = policy.act_raw(&[1.0, 2.0, 3.0], &[9.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0, 9.0]);
    }

    #[test]
    fn act_clamps_only_out_of_range_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut policy = PolicyNet::kaiming(3, 2, &[8], 2, &mut rng);
        // Push the first output far above its bound via the head bias.
        let last = policy.net.layers().len() - 1;
        policy.net.layers_mut()[last].biases[0] = 50.0;
        let bounds = vehicle_bounds();
        let raw = policy.act_raw(&[0.1, 0.2, 0.3], &[0.4, 0.5]).unwrap();
        let act = policy.act(&[0.1, 0.2, 0.3], &[0.4, 0.5], &bounds).unwrap();
        assert!(raw[0] > 1.0);
        assert_eq!(act[0], 1.0);
        if raw[1] >= -2.0 && raw[1] <= 2.0 {
            assert_eq!(act[1], raw[1]);
        }
    }

    #[test]
    fn wrong_condition_width_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let policy = PolicyNet::kaiming(3, 8, &[16], 2, &mut rng);
        assert!(matches!(
            policy.act_raw(&[0.0; 3], &[0.0; 7]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Finite differences through the imitation objective
    /// `||pi(s, z) - a*||^2` for one sample, including the chain back into
    /// the condition input.
    #[test]
    fn imitation_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut policy = PolicyNet::kaiming(3, 4, &[6, 6], 2, &mut rng);
        let state: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut cond: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();

        let loss = |p: &PolicyNet, cond: &[f64]| -> f64 {
            let raw = p.act_raw(&state, cond).unwrap();
            crate::latent::squared_error(&raw, &target)
        };

        let (raw, tape) = policy.forward(&state, &cond).unwrap();
        let d_raw: Vec<f64> = raw.iter().zip(&target).map(|(a, t)| 2.0 * (a - t)).collect();
        let grads = policy.backward(&tape, &d_raw).unwrap();
        let mut analytic = Vec::new();
        grads.flatten_into(&mut analytic);

        let mut params = Vec::new();
        policy.flatten_params_into(&mut params);
        let h = 1e-5;
        for p in 0..params.len() {
            let orig = params[p];
            params[p] = orig + h;
            policy.assign_params(&params);
            let up = loss(&policy, &cond);
            params[p] = orig - h;
            policy.assign_params(&params);
            let down = loss(&policy, &cond);
            params[p] = orig;
            policy.assign_params(&params);
            let numeric = (up - down) / (2.0 * h);
            assert!(
                (analytic[p] - numeric).abs() <= 1e-6 + 1e-4 * numeric.abs().max(analytic[p].abs()),
                "param {p}: {} vs {numeric}",
                analytic[p]
            );
        }

        let cond_grad = policy.cond_grad(&grads.d_input).to_vec();
        for j in 0..cond.len() {
            let orig = cond[j];
            cond[j] = orig + h;
            let up = loss(&policy, &cond);
            cond[j] = orig - h;
            let down = loss(&policy, &cond);
            cond[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            assert!(
                (cond_grad[j] - numeric).abs() <= 1e-6 + 1e-4 * numeric.abs(),
                "cond {j}: {} vs {numeric}",
                cond_grad[j]
            );
        }
    }

    #[test]
    fn policy_init_is_seed_deterministic() {
        let a = PolicyNet::kaiming(3, 8, &[128, 128], 2, &mut ChaCha8Rng::seed_from_u64(7));
        let b = PolicyNet::kaiming(3, 8, &[128, 128], 2, &mut ChaCha8Rng::seed_from_u64(7));
        let (mut pa, mut pb) = (Vec::new(), Vec::new());
        a.flatten_params_into(&mut pa);
        b.flatten_params_into(&mut pb);
        assert_eq!(pa, pb);
    }
}
