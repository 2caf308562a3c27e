//! Splitting one batch of `m` samples across `k` simulated compute units.
//!
//! Each unit returns the mean gradient over its contiguous chunk of the batch;
//! the `k` unit gradients then play the role of `k` stochastic gradients for
//! the norm estimator.

use crate::error::{Error, Result};
use crate::estimators::GradientBatch;
use crate::problems::{BatchSelector, ProblemHandle};

#[derive(Debug, Clone, PartialEq)]
pub struct ShardedGradients {
    pub batch: GradientBatch,
    /// Samples behind each shard gradient.
    pub counts: Vec<usize>,
    /// The resolved sample indices of the whole batch, in shard order.
    pub indices: Vec<usize>,
}

impl ShardedGradients {
    /// Shard gradients averaged with weights proportional to their sample
    /// counts; equals the gradient over the whole batch.
    pub fn weighted_mean(&self) -> Vec<f64> {
        let m: usize = self.counts.iter().sum();
        let mut acc = vec![0.0; self.batch.dim()];
        for (g, &c) in self.batch.grads().iter().zip(&self.counts) {
            let w = c as f64 / m as f64;
            acc.iter_mut().zip(g).for_each(|(a, gi)| *a += w * gi);
        }
        acc
    }

    /// Whole-batch selector, for oracle calls that must reuse the same samples.
    pub fn selector(&self) -> BatchSelector {
        BatchSelector::Indices(self.indices.clone())
    }
}

/// Chunk boundaries: `k` chunks of `m / k`, the remainder going to the last.
pub fn shard_ranges(m: usize, k: usize) -> Vec<std::ops::Range<usize>> {
    let size = m / k;
    (0..k)
        .map(|i| {
            let start = i * size;
            let end = if i + 1 == k { m } else { start + size };
            start..end
        })
        .collect()
}

pub fn shard_gradients(
    problem: &mut ProblemHandle,
    x: &[f64],
    total_batch: &BatchSelector,
    k: usize,
) -> Result<ShardedGradients> {
    if k < 2 {
        return Err(Error::TooFewGradients(k));
    }
    let indices = match problem.resolve(total_batch)? {
        BatchSelector::Indices(idx) => idx,
        BatchSelector::Full => match problem.n_samples() {
            Some(n) => (0..n).collect(),
            None => return Err(Error::invalid("total_batch", "the full objective has no samples to shard")),
        },
        BatchSelector::Fresh(_) => unreachable!("resolve returns explicit indices"),
    };
    let m = indices.len();
    if k > m {
        return Err(Error::invalid("k", format!("{k} shards exceed the batch of {m} samples")));
    }
    let ranges = shard_ranges(m, k);
    let mut grads = Vec::with_capacity(k);
    let mut counts = Vec::with_capacity(k);
    for r in ranges {
        counts.push(r.len());
        grads.push(problem.stochastic_grad(x, &BatchSelector::Indices(indices[r].to_vec()))?);
    }
    Ok(ShardedGradients { batch: GradientBatch::new(grads)?, counts, indices })
}
