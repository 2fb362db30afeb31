//! Predicted retained counts when top-class confidences follow a Beta law,
//! next to what a trained model actually keeps.
//!
//!     cargo run --release --example beta_count_model

use pdd::data::gen_synthetic_splits;
use pdd::nn::Mlp;
use pdd::policy::{beta_cdf, smrd_count_model, DropoutPolicy};
use pdd::selection::select_by_confidence;
use pdd::trainer::{run_training, RunConfig};

fn main() -> pdd::Result<()> {
    println!("I_0.3(2, 5) = {:.6}", beta_cdf(0.3, 2.0, 5.0)?);

    let (train, test) = gen_synthetic_splits(10, 300, 50, 32, 0.2, 4)?;
    let model: Mlp = run_training(
        &train,
        &test,
        &RunConfig::new(DropoutPolicy::baseline(3)?, 1),
    )?
    .model;
    let probs = model.forward(train.features())?.probabilities;

    // Method-of-moments Beta fit to the observed top-class confidences.
    let top: Vec<f64> = (0..probs.rows())
        .map(|r| probs.row(r).iter().cloned().fold(0.0, f64::max))
        .collect();
    let mean = top.iter().sum::<f64>() / top.len() as f64;
    let var = top.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / top.len() as f64;
    let common = mean * (1.0 - mean) / var - 1.0;
    let (a, b) = (mean * common, (1.0 - mean) * common);
    println!("fitted Beta({a:.3}, {b:.3}) to {} confidences", top.len());

    println!("tau   observed  predicted");
    for t in 1..=9 {
        let tau = t as f64 / 10.0;
        let observed = select_by_confidence(&probs, train.labels(), tau).len();
        let predicted = smrd_count_model(tau, a, b, train.len())?;
        println!("{tau:.1}  {observed:>8}  {predicted:>9}");
    }
    Ok(())
}
