//! Fully-connected classifier with analytic gradients.
//!
//! Hidden layers use ReLU, the output layer is linear and feeds a softmax
//! cross-entropy loss. Backpropagation only visits the rows named in the
//! mask, so unselected samples cost a forward pass and nothing else.

mod matrix;
mod optim;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use matrix::Matrix;
pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState};

use crate::rng::{self, STREAM_INIT};
use crate::{Error, Result};
use matrix::affine;

/// One affine layer: `weights` is `[out×in]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }
}

/// The model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Gradients with exactly the shape of an [`Mlp`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(model: &Mlp) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| Layer {
                    weights: Matrix::zeros(l.outputs(), l.inputs()),
                    bias: vec![0.0; l.outputs()],
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct LayerCache {
    input: Matrix,
    pre: Matrix,
}

#[derive(Clone, Debug)]
pub struct ForwardResult {
    pub logits: Matrix,
    pub probabilities: Matrix,
    cache: Vec<LayerCache>,
}

impl ForwardResult {
    pub fn batch_size(&self) -> usize {
        self.logits.rows()
    }

    /// `-ln p(label)` for every row, computed from the logits.
    pub fn per_sample_losses(&self, labels: &[usize]) -> Result<Vec<f64>> {
        check_labels(self, labels)?;
        Ok((0..self.batch_size())
            .map(|r| row_loss(self.logits.row(r), labels[r]))
            .collect())
    }

    /// Highest-probability class per row, ties to the lowest index.
    pub fn predictions(&self) -> Vec<usize> {
        (0..self.batch_size())
            .map(|r| argmax(self.logits.row(r)))
            .collect()
    }
}

impl Mlp {
    /// Builds a network with the given layer widths, e.g. `[784, 128, 64, 10]`.
    /// Weights are uniform in `±sqrt(6 / (in + out))`, biases zero.
    pub fn new(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Config(format!("invalid layer widths {widths:?}")));
        }
        let mut rng = rng::stream(seed, &[STREAM_INIT]);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-limit..=limit))
                    .collect();
                Layer {
                    weights: Matrix::from_vec(fan_out, fan_in, data).expect("sized"),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Dimension("model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.outputs() {
                return Err(Error::Dimension(format!("layer {i}: bias length")));
            }
            if i > 0 && layers[i - 1].outputs() != l.inputs() {
                return Err(Error::Dimension(format!(
                    "layer {i} expects {} inputs, previous layer emits {}",
                    l.inputs(),
                    layers[i - 1].outputs()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn classes(&self) -> usize {
        self.layers.last().expect("non-empty").outputs()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub fn forward(&self, batch: &Matrix) -> Result<ForwardResult> {
        if batch.cols() != self.input_width() {
            return Err(Error::Dimension(format!(
                "batch has {} features, model expects {}",
                batch.cols(),
                self.input_width()
            )));
        }
        let last = self.layers.len() - 1;
        let mut cache = Vec::with_capacity(self.layers.len());
        let mut input = batch.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let pre = affine(&input, &layer.weights, &layer.bias);
            let next = if i < last {
                let mut a = pre.clone();
                a.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
                a
            } else {
                pre.clone()
            };
            cache.push(LayerCache { input, pre });
            input = next;
        }
        let logits = input;
        let mut probabilities = logits.clone();
        for r in 0..probabilities.rows() {
            softmax_in_place(probabilities.row_mut(r));
        }
        Ok(ForwardResult {
            logits,
            probabilities,
            cache,
        })
    }

    /// Mean cross-entropy over the rows in `mask` and its exact gradient.
    /// Rows outside the mask contribute nothing.
    pub fn loss_and_grad(
        &self,
        fwd: &ForwardResult,
        labels: &[usize],
        mask: &[usize],
    ) -> Result<(f64, Gradients)> {
        check_labels(fwd, labels)?;
        if mask.is_empty() {
            return Err(Error::Domain(
                "empty mask: the batch must be skipped, not backpropagated".into(),
            ));
        }
        if let Some(&bad) = mask.iter().find(|&&i| i >= fwd.batch_size()) {
            return Err(Error::Dimension(format!(
                "mask index {bad} outside batch of {}",
                fwd.batch_size()
            )));
        }
        if fwd.cache.len() != self.layers.len() {
            return Err(Error::Dimension("forward cache from another model".into()));
        }

        let m = mask.len();
        let scale = 1.0 / m as f64;
        let classes = self.classes();

        let mut loss = 0.0;
        let mut delta = Matrix::zeros(m, classes);
        for (i, &r) in mask.iter().enumerate() {
            let y = labels[r];
            loss += row_loss(fwd.logits.row(r), y);
            let d = delta.row_mut(i);
            d.copy_from_slice(fwd.probabilities.row(r));
            d[y] -= 1.0;
            d.iter_mut().for_each(|v| *v *= scale);
        }
        loss *= scale;

        let mut grads = Gradients::zeros_like(self);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let cache = &fwd.cache[l];
            let g = &mut grads.layers[l];
            for (i, &r) in mask.iter().enumerate() {
                let a = cache.input.row(r);
                let d = delta.row(i);
                for (j, &dj) in d.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    g.bias[j] += dj;
                    for (w, &ak) in g.weights.row_mut(j).iter_mut().zip(a) {
                        *w += dj * ak;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let below = &fwd.cache[l - 1];
            let mut next = Matrix::zeros(m, layer.inputs());
            for (i, &r) in mask.iter().enumerate() {
                let d = delta.row(i);
                let out = next.row_mut(i);
                for (j, &dj) in d.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    for (o, &w) in out.iter_mut().zip(layer.weights.row(j)) {
                        *o += dj * w;
                    }
                }
                for (o, &z) in out.iter_mut().zip(below.pre.row(r)) {
                    if z <= 0.0 {
                        *o = 0.0;
                    }
                }
            }
            delta = next;
        }
        Ok((loss, grads))
    }
}

fn check_labels(fwd: &ForwardResult, labels: &[usize]) -> Result<()> {
    if labels.len() != fwd.batch_size() {
        return Err(Error::Dimension(format!(
            "{} labels for a batch of {}",
            labels.len(),
            fwd.batch_size()
        )));
    }
    let classes = fwd.logits.cols();
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Dimension(format!(
            "label {bad} outside {classes} classes"
        )));
    }
    Ok(())
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    row.iter_mut().for_each(|v| *v /= sum);
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn row_loss(logits: &[f64], label: usize) -> f64 {
    log_sum_exp(logits) - logits[label]
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}
