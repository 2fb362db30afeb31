//! Baseline against difficulty-based dropout on synthetic blobs.
//!
//!     cargo run --release --example quickstart

use pdd::data::gen_synthetic_splits;
use pdd::policy::{Difficulty, DropoutPolicy, Variant};
use pdd::trainer::{run_training_with, RunConfig};

fn main() -> pdd::Result<()> {
    let (train, test) = gen_synthetic_splits(10, 400, 100, 32, 0.15, 1)?;

    let runs = [
        ("baseline", DropoutPolicy::baseline(10)?),
        (
            "dbpd tau=0.3",
            DropoutPolicy::new(
                Variant::Dbpd {
                    criterion: Difficulty::Confidence { tau: 0.3 },
                },
                10,
                1,
            )?,
        ),
    ];
    for (label, policy) in runs {
        println!("== {label}");
        let cfg = RunConfig::new(policy, 7);
        let run = run_training_with(&train, &test, &cfg, |m, _| {
            println!(
                "epoch {:>2}  retained {:>5}  test acc {:.4}",
                m.epoch, m.retained, m.test_accuracy
            );
        })?;
        println!(
            "effective epochs {:.2}, final accuracy {:.4}\n",
            run.metrics.effective_epochs,
            run.metrics.final_accuracy()
        );
    }
    Ok(())
}
