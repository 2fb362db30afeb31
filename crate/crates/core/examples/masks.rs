//! The selection rules on one hand-made batch.
//!
//!     cargo run --example masks

use pdd::nn::Matrix;
use pdd::rng;
use pdd::selection::{
    apportion, select_by_confidence, select_by_loss, select_random_k, select_random_matched,
};

fn main() -> pdd::Result<()> {
    let probs = Matrix::from_rows(&[
        vec![0.90, 0.05, 0.05],
        vec![0.40, 0.35, 0.25],
        vec![0.20, 0.70, 0.10],
        vec![0.34, 0.33, 0.33],
        vec![0.10, 0.10, 0.80],
    ])?;
    let labels = [0, 1, 1, 2, 0];
    let mut r = rng::stream(1, &[0]);

    for tau in [0.0, 0.5, 0.75, 1.0] {
        let hard = select_by_confidence(&probs, &labels, tau);
        let random = select_random_matched(&hard, labels.len(), &mut r)?;
        println!(
            "tau {tau:<4}  difficulty {:?}  matched random {:?}",
            hard.indices(),
            random.indices()
        );
    }
    let losses: Vec<f64> = (0..5).map(|i| -probs.get(i, labels[i]).ln()).collect();
    println!("loss >= 1.0   {:?}", select_by_loss(&losses, 1.0).indices());
    for fraction in [0.1, 0.5, 0.99] {
        println!(
            "random {fraction:<4}   {:?}",
            select_random_k(5, fraction, &mut r).indices()
        );
    }
    println!(
        "78 over batches [32, 32, 32, 8]: {:?}",
        apportion(78, &[32, 32, 32, 8])?
    );
    Ok(())
}
