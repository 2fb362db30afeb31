//! Test-only oracles, written independently of the library code paths they
//! check.
#![allow(dead_code)]

use pdd::nn::{Matrix, Mlp};

/// Masked mean cross-entropy computed row by row with a naive softmax.
pub fn masked_loss_oracle(model: &Mlp, x: &Matrix, labels: &[usize], mask: &[usize]) -> f64 {
    let mut total = 0.0;
    for &r in mask {
        let mut a: Vec<f64> = x.row(r).to_vec();
        for (i, layer) in model.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.outputs()];
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = layer.bias[j]
                    + (0..layer.inputs())
                        .map(|k| layer.weights.get(j, k) * a[k])
                        .sum::<f64>();
            }
            if i + 1 < model.layers.len() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        let denom: f64 = a.iter().map(|v| v.exp()).sum();
        total -= (a[labels[r]].exp() / denom).ln();
    }
    total / mask.len() as f64
}

/// Central differences of [`masked_loss_oracle`] for every parameter, in
/// layer order: weights row-major, then biases.
pub fn finite_difference_grads(
    model: &Mlp,
    x: &Matrix,
    labels: &[usize],
    mask: &[usize],
    h: f64,
) -> Vec<Vec<f64>> {
    let mut probe = model.clone();
    let mut out = Vec::new();
    for l in 0..model.layers.len() {
        let mut g = Vec::new();
        let nw = model.layers[l].weights.as_slice().len();
        for i in 0..nw {
            let orig = probe.layers[l].weights.as_slice()[i];
            probe.layers[l].weights.as_mut_slice()[i] = orig + h;
            let up = masked_loss_oracle(&probe, x, labels, mask);
            probe.layers[l].weights.as_mut_slice()[i] = orig - h;
            let down = masked_loss_oracle(&probe, x, labels, mask);
            probe.layers[l].weights.as_mut_slice()[i] = orig;
            g.push((up - down) / (2.0 * h));
        }
        for i in 0..model.layers[l].bias.len() {
            let orig = probe.layers[l].bias[i];
            probe.layers[l].bias[i] = orig + h;
            let up = masked_loss_oracle(&probe, x, labels, mask);
            probe.layers[l].bias[i] = orig - h;
            let down = masked_loss_oracle(&probe, x, labels, mask);
            probe.layers[l].bias[i] = orig;
            g.push((up - down) / (2.0 * h));
        }
        out.push(g);
    }
    out
}

/// `|a - b| / max(|a|, |b|)`, with a floor on the denominator so two
/// vanishing entries compare as equal.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(1e-8);
    (a - b).abs() / denom
}

/// Deterministic pseudo-random values in [-1, 1) from a seed (xorshift).
pub fn noise(seed: u64, len: usize) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..len)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// For integer `a, b`: `I_x(a, b) = P(Bin(a + b - 1, x) >= a)`.
pub fn beta_cdf_binomial_oracle(x: f64, a: u64, b: u64) -> f64 {
    let n = a + b - 1;
    (a..=n)
        .map(|j| binomial(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
        .sum()
}

/// `I_x(a, b)` as a ratio of two Simpson integrals of the unnormalized
/// density after the substitution `t = sin²θ`, which smooths the endpoints.
pub fn beta_cdf_simpson_oracle(x: f64, a: f64, b: f64, intervals: usize) -> f64 {
    let f = |theta: f64| 2.0 * theta.sin().powf(2.0 * a - 1.0) * theta.cos().powf(2.0 * b - 1.0);
    let simpson = |hi: f64| {
        let n = intervals + intervals % 2;
        let h = hi / n as f64;
        let mut s = f(0.0) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let upper = x.sqrt().asin();
    simpson(upper) / simpson(std::f64::consts::FRAC_PI_2)
}
