//! Per-batch backpropagation masks.
//!
//! Every function here returns the within-batch positions that will go
//! through the loss and the optimizer step. An empty mask means the batch is
//! skipped entirely.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{argmax, Matrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskOrigin {
    Confidence,
    Misclassification,
    RandomK,
    RandomMatched,
    Count,
    LossThreshold,
    Full,
}

/// Strictly increasing positions within one batch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchMask {
    indices: Vec<usize>,
    origin: MaskOrigin,
}

impl BatchMask {
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            origin: MaskOrigin::Full,
        }
    }

    pub fn empty(origin: MaskOrigin) -> Self {
        Self {
            indices: Vec::new(),
            origin,
        }
    }

    /// Sorts and checks the positions against the batch size.
    pub fn from_indices(mut indices: Vec<usize>, n: usize, origin: MaskOrigin) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("duplicate mask index".into()));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::Domain(format!("mask index outside batch of {n}")));
        }
        Ok(Self { indices, origin })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn origin(&self) -> MaskOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Rows the model is unsure about: top probability strictly below `tau`.
/// With `tau == 0` the rule switches to "argmax differs from the label".
pub fn select_by_confidence(probabilities: &Matrix, labels: &[usize], tau: f64) -> BatchMask {
    debug_assert_eq!(probabilities.rows(), labels.len());
    if tau == 0.0 {
        let indices = (0..probabilities.rows())
            .filter(|&r| argmax(probabilities.row(r)) != labels[r])
            .collect();
        return BatchMask {
            indices,
            origin: MaskOrigin::Misclassification,
        };
    }
    let indices = (0..probabilities.rows())
        .filter(|&r| {
            let top = probabilities
                .row(r)
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            top < tau
        })
        .collect();
    BatchMask {
        indices,
        origin: MaskOrigin::Confidence,
    }
}

/// `k = ⌊r·n⌋` uniform positions without replacement; `k = 0` gives an
/// empty mask.
pub fn select_random_k<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> BatchMask {
    let k = random_k_size(n, r);
    BatchMask {
        indices: sample_sorted(n, k, rng),
        origin: MaskOrigin::RandomK,
    }
}

/// `⌊r·n⌋`, the mask size [`select_random_k`] draws.
pub fn random_k_size(n: usize, r: f64) -> usize {
    ((r.clamp(0.0, 1.0) * n as f64).floor() as usize).min(n)
}

/// A uniformly random subset with the same size as `difficulty`, chosen
/// without looking at which rows were hard.
pub fn select_random_matched<R: Rng + ?Sized>(
    difficulty: &BatchMask,
    n: usize,
    rng: &mut R,
) -> Result<BatchMask> {
    if difficulty.len() > n {
        return Err(Error::Domain(format!(
            "difficulty mask of {} exceeds batch of {n}",
            difficulty.len()
        )));
    }
    Ok(BatchMask {
        indices: sample_sorted(n, difficulty.len(), rng),
        origin: MaskOrigin::RandomMatched,
    })
}

/// Exactly `k` uniform positions without replacement.
pub fn select_by_count<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<BatchMask> {
    if k > n {
        return Err(Error::Domain(format!("cannot select {k} of {n}")));
    }
    Ok(BatchMask {
        indices: sample_sorted(n, k, rng),
        origin: MaskOrigin::Count,
    })
}

/// Rows still fit poorly: loss at or above `threshold`.
pub fn select_by_loss(losses: &[f64], threshold: f64) -> BatchMask {
    BatchMask {
        indices: losses
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= threshold)
            .map(|(i, _)| i)
            .collect(),
        origin: MaskOrigin::LossThreshold,
    }
}

fn sample_sorted<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    match k {
        0 => Vec::new(),
        k if k == n => (0..n).collect(),
        k => {
            let mut v = index::sample(rng, n, k).into_vec();
            v.sort_unstable();
            v
        }
    }
}

/// Splits `total` over batches in proportion to their sizes (largest
/// remainder, ties to the earlier batch). Each share is at most its batch
/// size and the shares sum to `total`.
pub fn apportion(total: usize, sizes: &[usize]) -> Result<Vec<usize>> {
    let n: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::Domain(format!(
            "cannot apportion {total} over {n} samples"
        )));
    }
    if n == 0 {
        return Ok(vec![0; sizes.len()]);
    }
    let (total_w, n_w) = (total as u128, n as u128);
    let mut shares: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(sizes.len());
    for (i, &s) in sizes.iter().enumerate() {
        let q = total_w * s as u128;
        shares.push((q / n_w) as usize);
        remainders.push((q % n_w, i));
    }
    let leftover = total - shares.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(leftover) {
        shares[i] += 1;
    }
    debug_assert!(shares.iter().zip(sizes).all(|(k, s)| k <= s));
    Ok(shares)
}
