//! Progressive data dropout.
//!
//! A small training engine that decides, batch by batch, which samples go
//! through backpropagation. Every sample is always forwarded; only the
//! selected subset contributes to the loss and the optimizer step. The final
//! `revision` epochs always train on the full dataset.
//!
//! Policies:
//!
//! - **baseline**: every sample, every epoch.
//! - **dbpd** (difficulty-based): keep samples whose top softmax probability
//!   is below `tau`, misclassified samples when `tau == 0`, or samples whose
//!   loss is at least a threshold.
//! - **srd** (scalar random): keep a random `gamma^epoch` fraction.
//! - **smrd-inline** (schedule-matched random): keep as many random samples
//!   as the difficulty criterion would have kept in the same batch.
//! - **smrd-replay**: replay the per-epoch counts of a recorded dbpd run.
//! - **analytic**: per-epoch counts from one of five closed-form decay curves.
//!
//! Training cost is reported in *effective epochs*: the number of samples that
//! went through backpropagation divided by the dataset size.
//!
//! ```
//! use pdd::policy::{DropoutPolicy, SrdGranularity, Variant};
//! use pdd::trainer::dry_run_schedule;
//!
//! let policy = DropoutPolicy::new(
//!     Variant::Srd { gamma: 0.95, granularity: SrdGranularity::Epoch },
//!     30,
//!     1,
//! )
//! .unwrap();
//! let (_, ee) = dry_run_schedule(&policy, 50_000, 32).unwrap();
//! assert!((ee - 15.71).abs() < 0.01);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod nn;
pub mod policy;
pub mod rng;
pub mod selection;
pub mod trainer;

pub use error::{Error, Result};
