//! Synthetic data through the IDX format and back into training.
//!
//!     cargo run --release --example idx_data

use pdd::data::{gen_synthetic_splits, load_idx, write_idx, Dataset};
use pdd::policy::{DropoutPolicy, SrdGranularity, Variant};
use pdd::trainer::{run_training, RunConfig};

fn main() -> pdd::Result<()> {
    let dir = std::env::temp_dir().join("pdd-idx-data");
    std::fs::create_dir_all(&dir).map_err(|e| pdd::Error::Config(e.to_string()))?;
    let (train, test) = gen_synthetic_splits(10, 200, 50, 64, 0.2, 8)?;
    let as_image = |d: Dataset| {
        Dataset::with_image_dims(
            d.features().clone(),
            d.labels().to_vec(),
            d.classes(),
            [8, 8],
        )
    };
    let (train, test) = (as_image(train)?, as_image(test)?);
    let paths = |split: &str| {
        (
            dir.join(format!("{split}-images")),
            dir.join(format!("{split}-labels")),
        )
    };
    let (ti, tl) = paths("train");
    let (vi, vl) = paths("test");
    write_idx(&train, &ti, &tl)?;
    write_idx(&test, &vi, &vl)?;

    let train_back = load_idx(&ti, &tl)?;
    let test_back = load_idx(&vi, &vl)?;
    assert_eq!(train_back.features(), train.features());
    println!(
        "read {} train / {} test images of {:?} from {}",
        train_back.len(),
        test_back.len(),
        train_back.image_dims(),
        dir.display()
    );

    let policy = DropoutPolicy::new(
        Variant::Srd {
            gamma: 0.8,
            granularity: SrdGranularity::Epoch,
        },
        8,
        1,
    )?;
    let mut cfg = RunConfig::new(policy, 2);
    cfg.optimizer.lr = 1e-3;
    let m = run_training(&train_back, &test_back, &cfg)?.metrics;
    println!(
        "srd: EE {:.3}, accuracy {:.4}",
        m.effective_epochs,
        m.final_accuracy()
    );
    Ok(())
}
