//! Minimal dense-network engine.
//!
//! Fixed-architecture multilayer perceptrons with rectified-linear hidden
//! layers and an identity output layer, exact reverse-mode gradients, Adam,
//! and Polyak target tracking. Everything is `f64` and allocation is plain
//! `Vec`, which keeps finite-difference oracles tight and results identical
//! across platforms.
//!
//! Shape misuse (wrong input length, mismatched tape) is a programmer error
//! and panics; numeric failures surface as [`crate::Error::Numeric`].

mod adam;
mod checkpoint;

pub use adam::{adam_step, AdamState};

use rand::Rng;

use crate::seeding;

/// A dense feed-forward network.
///
/// `weights[i]` is row-major with shape `(layer_sizes[i+1], layer_sizes[i])`;
/// `biases[i]` has length `layer_sizes[i+1]`. All hidden layers apply
/// rectified-linear activation; the output layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// The default hidden stack: 3 layers of 256 units.
pub const DEFAULT_HIDDEN: [usize; 3] = [256, 256, 256];

/// Per-parameter gradient accumulators matching an [`Mlp`]'s shapes.
///
/// Zero it before a batch; `Mlp::backward` adds into it, so summing over the
/// samples of a batch is the natural usage.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// He-style uniform initialization for every layer: weights drawn from
    /// `U(-b, b)` with `b = sqrt(6 / fan_in)`, biases zero.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Mlp {
        assert!(
            layer_sizes.len() >= 2,
            "an Mlp needs at least input and output sizes, got {layer_sizes:?}"
        );
        assert!(
            layer_sizes.iter().all(|&n| n > 0),
            "layer sizes must be positive, got {layer_sizes:?}"
        );
        let mut rng = seeding::rng(seed, seeding::streams::NET_INIT, 0);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let layer: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            weights.push(layer);
            biases.push(vec![0.0; fan_out]);
        }
        Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        }
    }

    /// Initialization for a residual head: hidden layers as in [`Mlp::new`],
    /// final weight matrix and bias exactly zero, so the forward pass is
    /// identically zero no matter the input or seed.
    pub fn init_residual(layer_sizes: &[usize], seed: u64) -> Mlp {
        let mut net = Mlp::new(layer_sizes, seed);
        net.zero_output_layer();
        net
    }

    /// Convenience constructor: `input -> DEFAULT_HIDDEN -> output`.
    pub fn with_default_hidden(input: usize, output: usize, seed: u64) -> Mlp {
        let mut sizes = Vec::with_capacity(DEFAULT_HIDDEN.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(&DEFAULT_HIDDEN);
        sizes.push(output);
        Mlp::new(&sizes, seed)
    }

    /// Zeroes the last weight matrix and bias vector in place.
    pub fn zero_output_layer(&mut self) {
        let last = self.weights.len() - 1;
        self.weights[last].fill(0.0);
        self.biases[last].fill(0.0);
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub(crate) fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    /// Evaluates the network on one input vector.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(
            input.len(),
            self.input_dim(),
            "input length {} does not match input dim {}",
            input.len(),
            self.input_dim()
        );
        let mut cur = input.to_vec();
        for l in 0..self.n_layers() {
            cur = self.layer_forward(l, &cur, l + 1 < self.n_layers());
        }
        cur
    }

    fn layer_forward(&self, l: usize, x: &[f64], relu: bool) -> Vec<f64> {
        let in_dim = self.layer_sizes[l];
        let w = &self.weights[l];
        let mut out = self.biases[l].clone();
        for (o, out_o) in out.iter_mut().enumerate() {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            let mut sum = *out_o;
            for (wi, xi) in row.iter().zip(x.iter()) {
                sum += wi * xi;
            }
            *out_o = if relu { sum.max(0.0) } else { sum };
        }
        out
    }

    /// Forward pass that keeps every layer's post-activation output
    /// (index 0 is the input itself). Needed by `backward`.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(
            input.len(),
            self.input_dim(),
            "input length {} does not match input dim {}",
            input.len(),
            self.input_dim()
        );
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        acts.push(input.to_vec());
        for l in 0..self.n_layers() {
            let next = self.layer_forward(l, &acts[l], l + 1 < self.n_layers());
            acts.push(next);
        }
        acts
    }

    /// Reverse-mode gradients of `output_grad . output` with respect to every
    /// parameter, accumulated into `tape`. Returns the gradient with respect
    /// to the input (needed to differentiate a critic through its action
    /// coordinates).
    pub fn backward(&self, input: &[f64], output_grad: &[f64], tape: &mut GradientTape) -> Vec<f64> {
        assert_eq!(
            output_grad.len(),
            self.output_dim(),
            "output_grad length {} does not match output dim {}",
            output_grad.len(),
            self.output_dim()
        );
        tape.assert_shapes(self);
        let acts = self.forward_trace(input);
        let mut delta = output_grad.to_vec();
        for l in (0..self.n_layers()).rev() {
            let in_dim = self.layer_sizes[l];
            let out_dim = self.layer_sizes[l + 1];
            // Hidden outputs went through relu; fold its derivative into delta.
            if l + 1 < self.n_layers() {
                for (d, &a) in delta.iter_mut().zip(acts[l + 1].iter()) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let x = &acts[l];
            let dw = &mut tape.d_weights[l];
            for o in 0..out_dim {
                let d = delta[o];
                tape.d_biases[l][o] += d;
                let row = &mut dw[o * in_dim..(o + 1) * in_dim];
                for (g, &xi) in row.iter_mut().zip(x.iter()) {
                    *g += d * xi;
                }
            }
            let w = &self.weights[l];
            let mut prev = vec![0.0; in_dim];
            for o in 0..out_dim {
                let d = delta[o];
                let row = &w[o * in_dim..(o + 1) * in_dim];
                for (p, &wi) in prev.iter_mut().zip(row.iter()) {
                    *p += d * wi;
                }
            }
            delta = prev;
        }
        delta
    }

    /// One-shot variant of [`Mlp::backward`] returning a fresh tape.
    pub fn backward_new(&self, input: &[f64], output_grad: &[f64]) -> (GradientTape, Vec<f64>) {
        let mut tape = GradientTape::zeros_like(self);
        let input_grad = self.backward(input, output_grad, &mut tape);
        (tape, input_grad)
    }

    /// Smallest hidden pre-activation magnitude over the forward pass.
    ///
    /// Finite-difference oracles are invalid within a step of a relu kink;
    /// tests use this to resample configurations that sit on one.
    pub fn min_hidden_preactivation(&self, input: &[f64]) -> f64 {
        let mut cur = input.to_vec();
        let mut min_abs = f64::INFINITY;
        for l in 0..self.n_layers() {
            let in_dim = self.layer_sizes[l];
            let hidden = l + 1 < self.n_layers();
            let w = &self.weights[l];
            let mut out = self.biases[l].clone();
            for (o, out_o) in out.iter_mut().enumerate() {
                let row = &w[o * in_dim..(o + 1) * in_dim];
                for (wi, xi) in row.iter().zip(cur.iter()) {
                    *out_o += wi * xi;
                }
                if hidden {
                    min_abs = min_abs.min(out_o.abs());
                    *out_o = out_o.max(0.0);
                }
            }
            cur = out;
        }
        min_abs
    }

    /// All parameters in layer order (weights row-major, then bias, per layer).
    pub fn param_iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(self.biases.iter())
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Mutable view of all parameters in layer order.
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().chain(b.iter_mut()) {
                f(v);
            }
        }
    }
}

impl GradientTape {
    pub fn zeros_like(net: &Mlp) -> GradientTape {
        GradientTape {
            d_weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            d_biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.d_weights {
            w.fill(0.0);
        }
        for b in &mut self.d_biases {
            b.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.d_weights {
            for v in w.iter_mut() {
                *v *= factor;
            }
        }
        for b in &mut self.d_biases {
            for v in b.iter_mut() {
                *v *= factor;
            }
        }
    }

    fn assert_shapes(&self, net: &Mlp) {
        assert_eq!(self.d_weights.len(), net.weights.len(), "tape/net layer count mismatch");
        for l in 0..net.weights.len() {
            assert_eq!(
                self.d_weights[l].len(),
                net.weights[l].len(),
                "tape/net weight shape mismatch at layer {l}"
            );
            assert_eq!(
                self.d_biases[l].len(),
                net.biases[l].len(),
                "tape/net bias shape mismatch at layer {l}"
            );
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.d_weights
            .iter()
            .zip(self.d_biases.iter())
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }
}

/// Exponential target tracking: every target parameter becomes
/// `tau * target + (1 - tau) * online`. `tau = 1` keeps the target,
/// `tau = 0` copies the online network.
pub fn polyak_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    assert_eq!(
        target.layer_sizes, online.layer_sizes,
        "polyak_update requires identical architectures"
    );
    assert!((0.0..=1.0).contains(&tau), "tau must lie in [0, 1], got {tau}");
    for l in 0..target.weights.len() {
        for (t, &o) in target.weights[l].iter_mut().zip(online.weights[l].iter()) {
            *t = tau * *t + (1.0 - tau) * o;
        }
        for (t, &o) in target.biases[l].iter_mut().zip(online.biases[l].iter()) {
            *t = tau * *t + (1.0 - tau) * o;
        }
    }
}
