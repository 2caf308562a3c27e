use rand::Rng;
use rand_distr::StandardNormal;

use super::{Batch, Objective, ProblemConstants, ProblemKind};
use crate::error::{Error, Result};
use crate::noise;

/// Fully-connected `tanh` network with a softmax cross-entropy head, trained
/// on Gaussian blobs (one blob per class).
///
/// Parameters are flattened layer by layer: the `out × in` weight matrix in
/// row-major order, then the `out` biases. There is no analytic
/// Hessian-vector product; the handle falls back to finite differences.
#[derive(Debug, Clone)]
pub struct MlpClassifier {
    layers: Vec<usize>,
    inputs: Vec<f64>,
    labels: Vec<usize>,
    n_params: usize,
}

impl MlpClassifier {
    pub fn generate(layer_sizes: &[usize], n_samples: usize, seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::invalid("layer_sizes", "need an input and an output layer"));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::invalid("layer_sizes", "layer widths must be positive"));
        }
        let classes = *layer_sizes.last().unwrap();
        if classes < 2 {
            return Err(Error::invalid("layer_sizes", "need at least two classes"));
        }
        if n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be positive"));
        }
        let in_dim = layer_sizes[0];
        let mut rng = noise::stream(seed, u64::MAX);
        let centers: Vec<Vec<f64>> = (0..classes)
            .map(|_| (0..in_dim).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut inputs = Vec::with_capacity(n_samples * in_dim);
        let mut labels = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let c = i % classes;
            labels.push(c);
            for k in 0..in_dim {
                inputs.push(centers[c][k] + rng.sample::<f64, _>(StandardNormal));
            }
        }
        let n_params = layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self { layers: layer_sizes.to_vec(), inputs, labels, n_params })
    }

    /// Weights `~ N(0, 1/fan_in)`, zero biases.
    pub fn initial_weights(&self, seed: u64) -> Vec<f64> {
        let mut rng = noise::stream(seed, u64::MAX - 1);
        let mut w = Vec::with_capacity(self.n_params);
        for pair in self.layers.windows(2) {
            let (fan_in, out) = (pair[0], pair[1]);
            let s = 1.0 / (fan_in as f64).sqrt();
            w.extend((0..fan_in * out).map(|_| s * rng.sample::<f64, _>(StandardNormal)));
            w.extend(std::iter::repeat_n(0.0, out));
        }
        w
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layers
    }

    fn input(&self, i: usize) -> &[f64] {
        let d = self.layers[0];
        &self.inputs[i * d..(i + 1) * d]
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    /// Activations of every layer; the last entry holds the logits.
    fn forward(&self, params: &[f64], input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        let mut off = 0;
        let n_layers = self.layers.len() - 1;
        for (l, pair) in self.layers.windows(2).enumerate() {
            let (fan_in, out) = (pair[0], pair[1]);
            let w = &params[off..off + fan_in * out];
            let b = &params[off + fan_in * out..off + fan_in * out + out];
            off += fan_in * out + out;
            let prev = acts.last().unwrap();
            let mut z: Vec<f64> = (0..out)
                .map(|r| b[r] + w[r * fan_in..(r + 1) * fan_in].iter().zip(prev).map(|(a, c)| a * c).sum::<f64>())
                .collect();
            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    fn log_softmax(logits: &[f64]) -> Vec<f64> {
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
        logits.iter().map(|z| z - lse).collect()
    }

    fn sample_loss(&self, params: &[f64], i: usize) -> f64 {
        let acts = self.forward(params, self.input(i));
        -Self::log_softmax(acts.last().unwrap())[self.labels[i]]
    }

    fn accumulate_grad(&self, params: &[f64], i: usize, grad: &mut [f64]) {
        let acts = self.forward(params, self.input(i));
        let logp = Self::log_softmax(acts.last().unwrap());
        let mut delta: Vec<f64> = logp.iter().map(|lp| lp.exp()).collect();
        delta[self.labels[i]] -= 1.0;

        let n_layers = self.layers.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut off = 0;
        for pair in self.layers.windows(2) {
            offsets.push(off);
            off += pair[0] * pair[1] + pair[1];
        }
        for l in (0..n_layers).rev() {
            let (fan_in, out) = (self.layers[l], self.layers[l + 1]);
            let off = offsets[l];
            let prev = &acts[l];
            for r in 0..out {
                let row = &mut grad[off + r * fan_in..off + (r + 1) * fan_in];
                row.iter_mut().zip(prev).for_each(|(g, a)| *g += delta[r] * a);
                grad[off + fan_in * out + r] += delta[r];
            }
            if l > 0 {
                let w = &params[off..off + fan_in * out];
                let mut back = vec![0.0; fan_in];
                for r in 0..out {
                    for (k, bk) in back.iter_mut().enumerate() {
                        *bk += w[r * fan_in + k] * delta[r];
                    }
                }
                // prev = tanh(z), so d tanh = 1 − prev²
                delta = back.iter().zip(prev).map(|(b, a)| b * (1.0 - a * a)).collect();
            }
        }
    }

    fn indices<'a>(&self, batch: Batch<'a>) -> Box<dyn Iterator<Item = usize> + 'a> {
        match batch {
            Batch::Full => Box::new(0..self.len()),
            Batch::Samples(idx) => Box::new(idx.iter().copied()),
        }
    }
}

impl Objective for MlpClassifier {
    fn kind(&self) -> ProblemKind {
        ProblemKind::MlpClassifier
    }

    fn dim(&self) -> usize {
        self.n_params
    }

    fn n_samples(&self) -> Option<usize> {
        Some(self.len())
    }

    fn loss(&self, x: &[f64], batch: Batch<'_>) -> f64 {
        let (mut total, mut m) = (0.0, 0usize);
        for i in self.indices(batch) {
            total += self.sample_loss(x, i);
            m += 1;
        }
        total / m as f64
    }

    fn grad(&self, x: &[f64], batch: Batch<'_>) -> Vec<f64> {
        let mut g = vec![0.0; self.n_params];
        let mut m = 0usize;
        for i in self.indices(batch) {
            self.accumulate_grad(x, i, &mut g);
            m += 1;
        }
        g.iter_mut().for_each(|v| *v /= m as f64);
        g
    }

    fn constants(&self, _x0: &[f64]) -> ProblemConstants {
        ProblemConstants::default()
    }
}
