//! Record the schedule of a difficulty-based run, then spend exactly the same
//! budget on random samples.
//!
//!     cargo run --release --example schedule_replay

use pdd::data::gen_synthetic_splits;
use pdd::policy::{Difficulty, DropoutPolicy, Variant};
use pdd::trainer::{record_dbpd_schedule, run_training, RunConfig};

fn main() -> pdd::Result<()> {
    let (train, test) = gen_synthetic_splits(10, 300, 100, 32, 0.15, 2)?;
    let dbpd = DropoutPolicy::new(
        Variant::Dbpd {
            criterion: Difficulty::Confidence { tau: 0.5 },
        },
        12,
        1,
    )?;
    let recorded = run_training(&train, &test, &RunConfig::new(dbpd, 3))?;
    let schedule = record_dbpd_schedule(&recorded.metrics)?;
    print!("{}", schedule.to_csv()?);

    let dir = std::env::temp_dir().join("pdd-schedule-replay");
    std::fs::create_dir_all(&dir).map_err(|e| pdd::Error::Config(e.to_string()))?;
    let path = dir.join("schedule.csv");
    schedule.write(&path)?;
    let loaded = pdd::policy::ScheduleRecord::read(&path, Some(train.len()))?;

    let replay = DropoutPolicy::new(Variant::SmrdReplay { schedule: loaded }, 12, 1)?;
    let replayed = run_training(&train, &test, &RunConfig::new(replay, 3))?;
    assert_eq!(replayed.metrics.retained(), recorded.metrics.retained());

    println!("schedule written to {}", path.display());
    for (name, m) in [
        ("dbpd", &recorded.metrics),
        ("smrd-replay", &replayed.metrics),
    ] {
        println!(
            "{name:<12} EE {:.3}  accuracy {:.4}",
            m.effective_epochs,
            m.final_accuracy()
        );
    }
    Ok(())
}
