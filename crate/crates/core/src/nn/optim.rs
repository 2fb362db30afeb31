use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    SgdMomentum,
    Adamw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    /// Heavy-ball coefficient for `sgd-momentum`.
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Per-epoch learning-rate factor (step decay with period 1).
    pub lr_decay: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Adamw,
            lr: 3e-4,
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
            lr_decay: 0.97,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("optimizer: {what}")));
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must be in [0, 1)");
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad("eps must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be non-negative");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must be in (0, 1]");
        }
        Ok(())
    }
}

/// Optimizer state for one model. Moment buffers mirror the parameter shapes.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    config: OptimizerConfig,
    step: u64,
    lr: f64,
    first: Gradients,
    second: Gradients,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, model: &Mlp) -> Self {
        Self {
            config,
            step: 0,
            lr: config.lr,
            first: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    /// Applies the per-epoch decay: after `e` boundaries the rate is `lr₀·ρᵉ`.
    pub fn end_epoch(&mut self) {
        self.lr *= self.config.lr_decay;
    }

    pub fn step(&mut self, model: &mut Mlp, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != model.layers.len() {
            return Err(Error::Dimension("gradient layer count".into()));
        }
        for (i, (g, p)) in grads.layers.iter().zip(&model.layers).enumerate() {
            if g.weights.rows() != p.weights.rows()
                || g.weights.cols() != p.weights.cols()
                || g.bias.len() != p.bias.len()
            {
                return Err(Error::Dimension(format!("gradient shape in layer {i}")));
            }
            if !g.weights.is_finite() || g.bias.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { layer: i });
            }
        }

        self.step += 1;
        let c = self.config;
        let lr = self.lr;
        match c.kind {
            OptimizerKind::SgdMomentum => {
                for ((p, g), v) in model
                    .layers
                    .iter_mut()
                    .zip(&grads.layers)
                    .zip(&mut self.first.layers)
                {
                    sgd(
                        p.weights.as_mut_slice(),
                        g.weights.as_slice(),
                        v.weights.as_mut_slice(),
                        lr,
                        &c,
                    );
                    sgd(&mut p.bias, &g.bias, &mut v.bias, lr, &c);
                }
            }
            OptimizerKind::Adamw => {
                let t = self.step as i32;
                let bc1 = 1.0 - c.beta1.powi(t);
                let bc2 = 1.0 - c.beta2.powi(t);
                for (((p, g), m), v) in model
                    .layers
                    .iter_mut()
                    .zip(&grads.layers)
                    .zip(&mut self.first.layers)
                    .zip(&mut self.second.layers)
                {
                    adamw(
                        p.weights.as_mut_slice(),
                        g.weights.as_slice(),
                        m.weights.as_mut_slice(),
                        v.weights.as_mut_slice(),
                        lr,
                        bc1,
                        bc2,
                        &c,
                    );
                    adamw(
                        &mut p.bias,
                        &g.bias,
                        &mut m.bias,
                        &mut v.bias,
                        lr,
                        bc1,
                        bc2,
                        &c,
                    );
                }
            }
        }
        Ok(())
    }
}

fn sgd(p: &mut [f64], g: &[f64], v: &mut [f64], lr: f64, c: &OptimizerConfig) {
    for ((p, &g), v) in p.iter_mut().zip(g).zip(v) {
        let g = g + c.weight_decay * *p;
        *v = c.momentum * *v + g;
        *p -= lr * *v;
    }
}

#[allow(clippy::too_many_arguments)]
fn adamw(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    bc1: f64,
    bc2: f64,
    c: &OptimizerConfig,
) {
    for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m).zip(v) {
        *m = c.beta1 * *m + (1.0 - c.beta1) * g;
        *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        // Decoupled decay acts on the pre-update weight.
        *p -= lr * (m_hat / (v_hat.sqrt() + c.eps) + c.weight_decay * *p);
    }
}
