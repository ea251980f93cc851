//! Minimal dense-network machinery: forward pass, reverse-mode gradients,
//! and Adam. Everything is `f64` and single-threaded; networks are plain
//! data and can be shared read-only once training is done.
//!
//! A [`DenseNet`] is a stack of affine layers with per-layer activations.
//! [`DenseNet::forward`] returns the output together with a [`Tape`] of the
//! intermediate activations; [`DenseNet::backward`] consumes the tape and an
//! upstream output gradient and produces parameter gradients plus the
//! gradient with respect to the input (needed to chain a downstream loss
//! back through a latent vector into an upstream network).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element-wise activation applied after a layer's affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Identity => x,
        }
    }

    /// Local derivative, recovered from the post-activation value.
    ///
    /// Valid because ReLU output is positive exactly when its pre-activation
    /// is positive (the derivative at 0 is taken as 0).
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One dense layer: `y = activation(W x + b)`, weights row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    /// Zero-initialized layer.
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Layer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
            activation,
        }
    }

    /// Kaiming-style uniform fan-in init: weights in `±sqrt(6 / in_dim)`,
    /// biases zero.
    pub fn kaiming<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Layer {
            in_dim,
            out_dim,
            weights,
            biases: vec![0.0; out_dim],
            activation,
        }
    }

    fn forward_into(&self, input: &[f64], out: &mut [f64]) {
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut sum = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                sum += w * x;
            }
            *slot = self.activation.apply(sum);
        }
    }
}

/// Stack of dense layers with matching widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    layers: Vec<Layer>,
}

/// Intermediate activations recorded by one forward pass.
///
/// `activations[0]` is the input; `activations[k + 1]` is layer `k`'s
/// post-activation output. The tape is only valid for the network that
/// produced it; [`DenseNet::backward`] rejects a tape whose widths disagree.
#[derive(Debug, Clone)]
pub struct Tape {
    activations: Vec<Vec<f64>>,
}

impl Tape {
    /// Network output recorded on this tape.
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("tape has at least the input")
    }
}

/// Per-layer parameter gradients plus the input gradient.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
    /// dL/d(input): lets a loss applied to this net's output flow into
    /// whatever produced the input.
    pub d_input: Vec<f64>,
}

impl Gradients {
    /// Append all parameter gradients (layer order, weights then biases) to a
    /// flat buffer; layout matches [`DenseNet::flatten_params_into`].
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for (dw, db) in self.d_weights.iter().zip(&self.d_biases) {
            out.extend_from_slice(dw);
            out.extend_from_slice(db);
        }
    }

    /// `self += scale * other`, over parameter gradients only.
    pub fn accumulate_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }
}

impl DenseNet {
    /// Build a network from explicit layers, checking width compatibility.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let net = DenseNet { layers };
        net.validate()?;
        Ok(net)
    }

    /// Check width compatibility, buffer sizes, and parameter finiteness
    /// (used after deserializing).
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for pair in self.layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::DimensionMismatch {
                    what: "consecutive layer widths",
                    expected: pair[0].out_dim,
                    got: pair[1].in_dim,
                });
            }
        }
        for layer in &self.layers {
            if layer.weights.len() != layer.in_dim * layer.out_dim
                || layer.biases.len() != layer.out_dim
            {
                return Err(Error::DimensionMismatch {
                    what: "layer parameter buffers",
                    expected: layer.in_dim * layer.out_dim,
                    got: layer.weights.len(),
                });
            }
            if layer.weights.iter().chain(&layer.biases).any(|p| !p.is_finite()) {
                return Err(Error::NonFinite("network parameters".into()));
            }
        }
        Ok(())
    }

    /// Kaiming-initialized net over the given widths; hidden layers use ReLU
    /// and the final layer uses `output_activation`.
    pub fn kaiming<R: Rng + ?Sized>(
        dims: &[usize],
        output_activation: Activation,
        rng: &mut R,
    ) -> Self {
        assert!(dims.len() >= 2, "need an input and an output width");
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k == last { output_activation } else { Activation::Relu };
                Layer::kaiming(w[0], w[1], act, rng)
            })
            .collect();
        DenseNet { layers }
    }

    /// All-zero net over the given widths (same layer/activation layout as
    /// [`DenseNet::kaiming`]).
    pub fn zeros(dims: &[usize], output_activation: Activation) -> Self {
        assert!(dims.len() >= 2, "need an input and an output width");
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k == last { output_activation } else { Activation::Relu };
                Layer::zeros(w[0], w[1], act)
            })
            .collect();
        DenseNet { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// Layer widths, input first: `[in, h1, ..., out]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.out_dim));
        d
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Append all parameters (layer order, weights then biases) to `out`.
    pub fn flatten_params_into(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
    }

    /// Overwrite parameters from a flat slice; returns the number consumed.
    pub fn assign_params(&mut self, src: &[f64]) -> usize {
        let mut off = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            layer.weights.copy_from_slice(&src[off..off + nw]);
            off += nw;
            let nb = layer.biases.len();
            layer.biases.copy_from_slice(&src[off..off + nb]);
            off += nb;
        }
        off
    }

    /// Forward pass, recording the activations needed by [`DenseNet::backward`].
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Tape)> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for layer in &self.layers {
            let mut out = vec![0.0; layer.out_dim];
            layer.forward_into(activations.last().unwrap(), &mut out);
            activations.push(out);
        }
        let output = activations.last().unwrap().clone();
        Ok((output, Tape { activations }))
    }

    /// Inference-only forward pass without taping.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut cur = input.to_vec();
        for layer in &self.layers {
            let mut out = vec![0.0; layer.out_dim];
            layer.forward_into(&cur, &mut out);
            cur = out;
        }
        Ok(cur)
    }

    /// Reverse-mode pass: given dL/d(output), produce dL/dθ for every
    /// parameter and dL/d(input).
    pub fn backward(&self, tape: &Tape, output_grad: &[f64]) -> Result<Gradients> {
        if tape.activations.len() != self.layers.len() + 1
            || tape
                .activations
                .iter()
                .zip(self.dims())
                .any(|(a, d)| a.len() != d)
        {
            return Err(Error::TapeMismatch);
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                what: "output gradient",
                expected: self.output_dim(),
                got: output_grad.len(),
            });
        }

        let mut d_weights = Vec::with_capacity(self.layers.len());
        let mut d_biases = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            d_weights.push(vec![0.0; layer.weights.len()]);
            d_biases.push(vec![0.0; layer.out_dim]);
        }

        let mut upstream = output_grad.to_vec();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let inputs = &tape.activations[k];
            let outputs = &tape.activations[k + 1];
            let mut d_input = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let dz = upstream[o] * layer.activation.grad_from_output(outputs[o]);
                d_biases[k][o] = dz;
                let row = o * layer.in_dim;
                for i in 0..layer.in_dim {
                    d_weights[k][row + i] = dz * inputs[i];
                    d_input[i] += dz * layer.weights[row + i];
                }
            }
            upstream = d_input;
        }

        Ok(Gradients {
            d_weights,
            d_biases,
            d_input: upstream,
        })
    }

    /// Zeroed gradient buffers shaped like this network, for accumulation.
    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            d_weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            d_biases: self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
            d_input: vec![0.0; self.input_dim()],
        }
    }
}

/// Adam with bias correction over one flat parameter vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
    ///
    /// A non-finite gradient aborts before touching any parameter.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch {
                what: "optimizer parameter vector",
                expected: self.m.len(),
                got: params.len().max(grads.len()),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient".into()));
        }
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
