//! Scalar random dropout costs, counted without training.
//!
//!     cargo run --release --example srd_dry_run

use pdd::policy::{srd_effective_epochs_closed_form, DropoutPolicy, SrdGranularity, Variant};
use pdd::trainer::dry_run_schedule;

fn main() -> pdd::Result<()> {
    let n = 50_000;
    println!("gamma  epochs  revision  granularity  EE (counted)  EE (closed form)");
    for &(gamma, epochs, revision) in
        &[(0.95, 30, 1), (0.98, 800, 0), (0.98, 800, 1), (0.9, 100, 1)]
    {
        for granularity in [SrdGranularity::Epoch, SrdGranularity::Batch] {
            let policy = DropoutPolicy::new(Variant::Srd { gamma, granularity }, epochs, revision)?;
            let (_, ee) = dry_run_schedule(&policy, n, 32)?;
            println!(
                "{gamma:<5}  {epochs:>6}  {revision:>8}  {:<11}  {ee:>12.4}  {:>16.4}",
                format!("{granularity:?}").to_lowercase(),
                srd_effective_epochs_closed_form(gamma, epochs, revision)
            );
        }
    }
    Ok(())
}
