//! Difficulty judged by loss instead of confidence, and its random twin.
//!
//!     cargo run --release --example loss_threshold

use pdd::data::gen_synthetic_splits;
use pdd::policy::{Difficulty, DropoutPolicy, Variant};
use pdd::trainer::{run_training, RunConfig};

fn main() -> pdd::Result<()> {
    let (train, test) = gen_synthetic_splits(10, 300, 100, 32, 0.15, 5)?;
    println!("threshold  variant      EE      accuracy");
    for threshold in [0.1, 0.5, 1.0] {
        let criterion = Difficulty::Loss { threshold };
        for variant in [
            Variant::Dbpd { criterion },
            Variant::SmrdInline { criterion },
        ] {
            let name = variant.name();
            let policy = DropoutPolicy::new(variant, 10, 1)?;
            let m = run_training(&train, &test, &RunConfig::new(policy, 6))?.metrics;
            println!(
                "{threshold:<9}  {name:<11}  {:>6.3}  {:.4}",
                m.effective_epochs,
                m.final_accuracy()
            );
        }
    }
    Ok(())
}
