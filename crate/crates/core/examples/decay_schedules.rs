//! The five closed-form decay curves as retained-count schedules.
//!
//!     cargo run --release --example decay_schedules [alpha]

use pdd::policy::{DecayKind, DropoutPolicy, Variant};
use pdd::trainer::dry_run_schedule;

fn main() -> pdd::Result<()> {
    let alpha: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(1.0), |a| a.parse())
        .unwrap_or(1.0);
    let (n, epochs) = (10_000, 12);
    print!("{:<20}", "epoch");
    for e in 1..=epochs {
        print!("{e:>7}");
    }
    println!("{:>8}", "EE");
    for kind in DecayKind::ALL {
        let policy = DropoutPolicy::new(Variant::Analytic { decay: kind, alpha }, epochs, 1)?;
        let (record, ee) = dry_run_schedule(&policy, n, 32)?;
        print!("{:<20}", kind.as_str());
        for k in record.retained() {
            print!("{k:>7}");
        }
        println!("{ee:>8.3}");
    }
    Ok(())
}
