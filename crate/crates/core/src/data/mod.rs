//! Datasets and seeded per-epoch batching.

mod idx;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx, IMAGES_MAGIC, LABELS_MAGIC};

use crate::nn::Matrix;
use crate::rng::{self, STREAM_SHUFFLE, STREAM_SPLIT, STREAM_SYNTH};
use crate::{Error, Result};

/// Immutable labelled samples. Sample ids are the row indices `0..N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    classes: usize,
    /// `[rows, cols]` of each sample when stored as an IDX image.
    image_dims: [usize; 2],
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        let dims = [1, features.cols()];
        Self::with_image_dims(features, labels, classes, dims)
    }

    pub fn with_image_dims(
        features: Matrix,
        labels: Vec<usize>,
        classes: usize,
        image_dims: [usize; 2],
    ) -> Result<Self> {
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::Dimension(
                "dataset must have samples and features".into(),
            ));
        }
        if labels.len() != features.rows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if image_dims[0] * image_dims[1] != features.cols() {
            return Err(Error::Dimension(format!(
                "image dims {image_dims:?} do not cover {} features",
                features.cols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::Dimension(format!(
                "label {bad} outside {classes} classes"
            )));
        }
        Ok(Self {
            features,
            labels,
            classes,
            image_dims,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.cols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn image_dims(&self) -> [usize; 2] {
        self.image_dims
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Widens the class count, e.g. so a test split that lacks a class still
    /// lines up with its training split.
    pub fn with_classes(mut self, classes: usize) -> Result<Self> {
        if classes < self.classes {
            return Err(Error::Dimension(format!(
                "cannot shrink class count from {} to {classes}",
                self.classes
            )));
        }
        self.classes = classes;
        Ok(self)
    }
}

/// Gaussian blobs around the vertices of a scaled simplex.
///
/// Class `c` is centred at `0.25 + 0.5·e_c`, noise is isotropic with standard
/// deviation `spread`, and values are clamped to `[0, 1]` and quantized to
/// multiples of `1/255` so the data survives an IDX round trip unchanged.
/// Samples are ordered by class. Centres do not depend on the seed, so
/// different seeds give train/test splits of the same distribution.
pub fn gen_synthetic(
    classes: usize,
    per_class: usize,
    dims: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes == 0 || per_class == 0 || dims == 0 {
        return Err(Error::Config("synthetic data needs positive counts".into()));
    }
    if classes > 256 {
        return Err(Error::Config(
            "at most 256 classes fit in IDX labels".into(),
        ));
    }
    if dims < classes {
        return Err(Error::Config(format!(
            "need dims >= classes for distinct simplex centres ({dims} < {classes})"
        )));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(Error::Config(
            "spread must be finite and non-negative".into(),
        ));
    }

    let mut rng = rng::stream(seed, &[STREAM_SYNTH]);
    let noise = Normal::new(0.0, spread.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let n = classes * per_class;
    let mut data = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for class in 0..classes {
        for _ in 0..per_class {
            for d in 0..dims {
                let centre = if d == class { 0.75 } else { 0.25 };
                let v = if spread == 0.0 {
                    centre
                } else {
                    centre + noise.sample(&mut rng)
                };
                data.push(quantize(v));
            }
            labels.push(class);
        }
    }
    Dataset::new(Matrix::from_vec(n, dims, data)?, labels, classes)
}

/// Train and test splits of the same blobs; the test split draws its noise
/// from a seed derived from `seed`.
pub fn gen_synthetic_splits(
    classes: usize,
    per_class: usize,
    test_per_class: usize,
    dims: usize,
    spread: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let train = gen_synthetic(classes, per_class, dims, spread, seed)?;
    let test_seed = rng::derive_seed(seed, &[STREAM_SPLIT]);
    let test = gen_synthetic(classes, test_per_class, dims, spread, test_seed)?;
    Ok((train, test))
}

fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

/// Sample order and batch size for one epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchPlan {
    pub epoch_seed: u64,
    pub batch_size: usize,
    pub ordering: Vec<usize>,
}

impl BatchPlan {
    /// Shuffles `0..n` with a seed derived from `(run_seed, epoch)`.
    pub fn new(run_seed: u64, epoch: usize, batch_size: usize, n: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let epoch_seed = rng::derive_seed(run_seed, &[STREAM_SHUFFLE, epoch as u64]);
        let mut ordering: Vec<usize> = (0..n).collect();
        ordering.shuffle(&mut rng::Rng::seed_from_u64(epoch_seed));
        Ok(Self {
            epoch_seed,
            batch_size,
            ordering,
        })
    }
}

/// One mini-batch. `ids` are the original dataset indices of the rows.
#[derive(Clone, Debug)]
pub struct Batch {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub ids: Vec<usize>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Sizes of the batches covering `n` samples; the last one may be short.
pub fn batch_sizes(n: usize, batch_size: usize) -> Vec<usize> {
    let mut sizes = vec![batch_size; n / batch_size];
    if !n.is_multiple_of(batch_size) {
        sizes.push(n % batch_size);
    }
    sizes
}

pub fn epoch_batches(ds: &Dataset, plan: &BatchPlan) -> Result<Vec<Batch>> {
    if plan.ordering.len() != ds.len() {
        return Err(Error::Dimension(format!(
            "plan orders {} samples, dataset has {}",
            plan.ordering.len(),
            ds.len()
        )));
    }
    Ok(plan
        .ordering
        .chunks(plan.batch_size)
        .map(|ids| Batch {
            features: ds.features.select_rows(ids),
            labels: ids.iter().map(|&i| ds.labels[i]).collect(),
            ids: ids.to_vec(),
        })
        .collect())
}
