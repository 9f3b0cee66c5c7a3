//! Minimal feedforward network engine.
//!
//! Dense layers with tanh hidden activations and a linear output, stored as
//! row-major `f64` matrices. Forward passes fill a reusable [`ForwardCache`];
//! [`MlpNetwork::backward`] turns an output-side sensitivity into exact
//! parameter gradients plus the input sensitivity. Training uses full-batch
//! Adam ([`AdamState`]); [`gradient_check`] compares any analytic gradient
//! against central finite differences.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-layer activation. The output layer is always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn tag(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a = f(x)`.
    fn derivative_from_output(&self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// One dense layer: `rows x cols` row-major weights and a bias per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// Feedforward network with tanh hidden layers and a linear output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNetwork {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub activation: Activation,
}

/// Per-layer activations of a single forward pass; `values[0]` is the input,
/// `values[L]` the network output.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    values: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.values.last().expect("cache filled by forward pass")
    }
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                    rows: l.rows,
                    cols: l.cols,
                })
                .collect(),
        }
    }

    pub fn reset(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w *= s);
            l.biases.iter_mut().for_each(|b| *b *= s);
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }
}

impl MlpNetwork {
    /// Initialize with zero-mean uniform weights scaled by `1/sqrt(fan_in)`
    /// and zero biases, deterministically from `seed`.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least input and output sizes, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidShape(format!(
                "layer sizes must be positive, got {layer_sizes:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (cols, rows) = (w[0], w[1]);
            let bound = 1.0 / (cols as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            layers.push(Layer {
                weights: (0..rows * cols).map(|_| dist.sample(&mut rng)).collect(),
                biases: vec![0.0; rows],
                rows,
                cols,
            });
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            activation: Activation::Tanh,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Forward pass, filling `cache` (reused across calls to avoid
    /// allocation in training loops). Returns nothing; read
    /// `cache.output()`.
    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        cache.values.resize(self.layers.len() + 1, Vec::new());
        cache.values[0].clear();
        cache.values[0].extend_from_slice(x);
        let n_layers = self.layers.len();
        for (li, layer) in self.layers.iter().enumerate() {
            let (before, after) = cache.values.split_at_mut(li + 1);
            let input = &before[li];
            let out = &mut after[0];
            out.clear();
            out.resize(layer.rows, 0.0);
            let last = li == n_layers - 1;
            for r in 0..layer.rows {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = layer.biases[r];
                for (w, v) in row.iter().zip(input.iter()) {
                    acc += w * v;
                }
                out[r] = if last { acc } else { self.activation.apply(acc) };
            }
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`Self::forward_cached`].
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let mut cache = ForwardCache::default();
        self.forward_cached(x, &mut cache)?;
        Ok((cache.output().to_vec(), cache))
    }

    /// Reverse-mode pass: accumulate `d(dl_dy . y)/d(params)` into `grads`
    /// and return the input sensitivity. `cache` must come from a matching
    /// forward pass on this network.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        dl_dy: &[f64],
        grads: &mut Gradients,
    ) -> Result<Vec<f64>> {
        if dl_dy.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: dl_dy.len(),
            });
        }
        if cache.values.len() != self.layers.len() + 1 {
            return Err(Error::InvalidShape(
                "forward cache does not match network depth".into(),
            ));
        }
        let mut delta = dl_dy.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let g = &mut grads.layers[li];
            let input = &cache.values[li];
            // Parameter gradients for this layer.
            for r in 0..layer.rows {
                let d = delta[r];
                g.biases[r] += d;
                let grow = &mut g.weights[r * layer.cols..(r + 1) * layer.cols];
                for (gw, v) in grow.iter_mut().zip(input.iter()) {
                    *gw += d * v;
                }
            }
            // Sensitivity with respect to this layer's input.
            let mut next = vec![0.0; layer.cols];
            for r in 0..layer.rows {
                let d = delta[r];
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (n, w) in next.iter_mut().zip(row.iter()) {
                    *n += d * w;
                }
            }
            // Pass through the activation of the previous hidden layer.
            if li > 0 {
                for (n, &a) in next.iter_mut().zip(cache.values[li].iter()) {
                    *n *= self.activation.derivative_from_output(a);
                }
            }
            delta = next;
        }
        Ok(delta)
    }
}

/// Adam optimizer state: first/second moment accumulators shaped like the
/// parameters, plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &MlpNetwork, learning_rate: f64) -> Self {
        Self {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update with bias correction; mutates the network in place and
/// advances the step counter.
pub fn adam_update(net: &mut MlpNetwork, grads: &Gradients, opt: &mut AdamState) {
    opt.step += 1;
    let t = opt.step as i32;
    let bc1 = 1.0 - opt.beta1.powi(t);
    let bc2 = 1.0 - opt.beta2.powi(t);
    for li in 0..net.layers.len() {
        let layer = &mut net.layers[li];
        let g = &grads.layers[li];
        let m = &mut opt.m.layers[li];
        let v = &mut opt.v.layers[li];
        for i in 0..layer.weights.len() {
            m.weights[i] = opt.beta1 * m.weights[i] + (1.0 - opt.beta1) * g.weights[i];
            v.weights[i] = opt.beta2 * v.weights[i] + (1.0 - opt.beta2) * g.weights[i] * g.weights[i];
            let m_hat = m.weights[i] / bc1;
            let v_hat = v.weights[i] / bc2;
            layer.weights[i] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
        for i in 0..layer.biases.len() {
            m.biases[i] = opt.beta1 * m.biases[i] + (1.0 - opt.beta1) * g.biases[i];
            v.biases[i] = opt.beta2 * v.biases[i] + (1.0 - opt.beta2) * g.biases[i] * g.biases[i];
            let m_hat = m.biases[i] / bc1;
            let v_hat = v.biases[i] / bc2;
            layer.biases[i] -= opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
    }
}

/// Result of a finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// `(layer index, flat parameter index within the layer)` of the worst
    /// deviation; weights first, then biases.
    pub worst: (usize, usize),
    pub passed: bool,
}

/// Compare an analytic gradient against central finite differences.
///
/// `loss_fn` must be deterministic. `analytic` is the gradient to verify,
/// typically produced by the caller's backward pass at the same parameters.
/// For networks above 200 parameters a deterministic subsample of at least
/// 200 parameters is checked.
pub fn gradient_check<F>(
    net: &MlpNetwork,
    loss_fn: F,
    analytic: &Gradients,
    tolerance: f64,
) -> GradCheckReport
where
    F: Fn(&MlpNetwork) -> f64,
{
    const H: f64 = 1e-5;
    const SAMPLE_TARGET: usize = 200;
    let total = net.param_count();
    let stride = (total / SAMPLE_TARGET).max(1);

    let mut max_rel: f64 = 0.0;
    let mut worst = (0, 0);
    let mut checked = 0;
    let mut flat_index = 0;

    let mut probe = |layer_idx: usize, local_idx: usize, a: f64, set: &dyn Fn(&mut MlpNetwork, f64), base: f64| {
        let mut plus = net.clone();
        set(&mut plus, base + H);
        let mut minus = net.clone();
        set(&mut minus, base - H);
        let numeric = (loss_fn(&plus) - loss_fn(&minus)) / (2.0 * H);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        if rel > max_rel {
            max_rel = rel;
            worst = (layer_idx, local_idx);
        }
        checked += 1;
    };

    for (li, layer) in net.layers.iter().enumerate() {
        for wi in 0..layer.weights.len() {
            if flat_index % stride == 0 {
                let base = layer.weights[wi];
                probe(
                    li,
                    wi,
                    analytic.layers[li].weights[wi],
                    &move |n: &mut MlpNetwork, v: f64| n.layers[li].weights[wi] = v,
                    base,
                );
            }
            flat_index += 1;
        }
        for bi in 0..layer.biases.len() {
            if flat_index % stride == 0 {
                let base = layer.biases[bi];
                probe(
                    li,
                    layer.weights.len() + bi,
                    analytic.layers[li].biases[bi],
                    &move |n: &mut MlpNetwork, v: f64| n.layers[li].biases[bi] = v,
                    base,
                );
            }
            flat_index += 1;
        }
    }

    GradCheckReport {
        max_rel_error: max_rel,
        checked,
        worst,
        passed: max_rel < tolerance,
    }
}
