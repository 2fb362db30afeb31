//! Dropout policies and the closed-form schedule models.

mod beta;
mod decay;
mod schedule;
mod srd;

use serde::{Deserialize, Serialize};

pub use beta::{beta_cdf, ln_gamma, smrd_count_model};
pub use decay::{decay_count, DecayKind};
pub use schedule::{ScheduleEntry, ScheduleRecord, SCHEDULE_HEADER};
pub use srd::{srd_effective_epochs_closed_form, srd_epoch_count, srd_fraction};

use crate::{Error, Result};

/// How difficulty is judged for `dbpd` and `smrd-inline`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Difficulty {
    /// Keep rows whose top softmax probability is below `tau`; with
    /// `tau == 0`, keep misclassified rows.
    Confidence { tau: f64 },
    /// Keep rows whose cross-entropy is at least `threshold`.
    Loss { threshold: f64 },
}

/// Where the `floor` of the SRD keep-fraction is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrdGranularity {
    /// `K = ⌊r·N⌋` per epoch, split over batches by largest remainder.
    #[default]
    Epoch,
    /// `k = ⌊r·n⌋` independently in every batch; `k = 0` skips the batch.
    Batch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Variant {
    Baseline,
    Dbpd {
        criterion: Difficulty,
    },
    Srd {
        gamma: f64,
        #[serde(default)]
        granularity: SrdGranularity,
    },
    SmrdInline {
        criterion: Difficulty,
    },
    SmrdReplay {
        schedule: ScheduleRecord,
    },
    Analytic {
        decay: DecayKind,
        alpha: f64,
    },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Dbpd { .. } => "dbpd",
            Variant::Srd { .. } => "srd",
            Variant::SmrdInline { .. } => "smrd-inline",
            Variant::SmrdReplay { .. } => "smrd-replay",
            Variant::Analytic { .. } => "analytic",
        }
    }

    /// Variants whose mask sizes never depend on the model.
    pub fn is_model_free(&self) -> bool {
        matches!(
            self,
            Variant::Srd { .. } | Variant::SmrdReplay { .. } | Variant::Analytic { .. }
        )
    }
}

/// A validated policy: the variant plus the epoch budget. The last
/// `revision` epochs always train on every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropoutPolicy {
    variant: Variant,
    epochs: usize,
    revision: usize,
}

impl DropoutPolicy {
    pub fn new(variant: Variant, epochs: usize, revision: usize) -> Result<Self> {
        let policy = Self {
            variant,
            epochs,
            revision,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn baseline(epochs: usize) -> Result<Self> {
        Self::new(Variant::Baseline, epochs, 0)
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn revision(&self) -> usize {
        self.revision
    }

    /// Epochs are numbered from 1.
    pub fn is_revision(&self, epoch: usize) -> bool {
        epoch + self.revision > self.epochs
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        match &self.variant {
            Variant::Baseline => {
                if self.revision > self.epochs {
                    return bad(format!(
                        "revision ({}) exceeds epochs ({})",
                        self.revision, self.epochs
                    ));
                }
                return Ok(());
            }
            _ if self.revision >= self.epochs => {
                return bad(format!(
                    "revision ({}) must be smaller than epochs ({})",
                    self.revision, self.epochs
                ));
            }
            Variant::Dbpd { criterion } | Variant::SmrdInline { criterion } => {
                validate_difficulty(criterion)?
            }
            Variant::Srd { gamma, .. } => {
                // γ = 1 is the no-dropout limit and is accepted here; the
                // configuration layer insists on γ < 1.
                if !(*gamma > 0.0 && *gamma <= 1.0) {
                    return bad(format!("gamma must be in (0, 1], got {gamma}"));
                }
            }
            Variant::SmrdReplay { schedule } => {
                if schedule.epochs() != self.epochs {
                    return bad(format!(
                        "schedule covers {} epochs, policy runs {}",
                        schedule.epochs(),
                        self.epochs
                    ));
                }
            }
            Variant::Analytic { decay, alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
                // Fails early for domains the curve cannot cover.
                decay_count(*decay, *alpha, 1, 1, self.epochs.max(2))?;
            }
        }
        Ok(())
    }

    /// Per-epoch retained count for model-free variants, `None` otherwise.
    pub fn planned_count(&self, epoch: usize, n: usize) -> Result<Option<usize>> {
        if epoch == 0 || epoch > self.epochs {
            return Err(Error::Domain(format!(
                "epoch {epoch} outside 1..={}",
                self.epochs
            )));
        }
        if self.is_revision(epoch) {
            return Ok(Some(n));
        }
        Ok(match &self.variant {
            Variant::Baseline => Some(n),
            Variant::Dbpd { .. } | Variant::SmrdInline { .. } => None,
            Variant::Srd { gamma, .. } => Some(srd_epoch_count(
                *gamma,
                epoch,
                self.epochs,
                self.revision,
                n,
            )),
            Variant::SmrdReplay { schedule } => {
                if schedule.n() != n {
                    return Err(Error::Config(format!(
                        "schedule recorded for N={}, dataset has N={n}",
                        schedule.n()
                    )));
                }
                Some(schedule.entries()[epoch - 1].retained)
            }
            Variant::Analytic { decay, alpha } => {
                Some(decay_count(*decay, *alpha, epoch, n, self.epochs)?)
            }
        })
    }
}

fn validate_difficulty(d: &Difficulty) -> Result<()> {
    match *d {
        Difficulty::Confidence { tau } if !(0.0..=1.0).contains(&tau) => {
            Err(Error::Config(format!("tau must be in [0, 1], got {tau}")))
        }
        Difficulty::Loss { threshold } if threshold.is_nan() || threshold < 0.0 => Err(
            Error::Config(format!("loss threshold must be >= 0, got {threshold}")),
        ),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn srd(gamma: f64) -> Variant {
        Variant::Srd {
            gamma,
            granularity: SrdGranularity::Epoch,
        }
    }

    #[test]
    fn validation() {
        assert!(DropoutPolicy::new(srd(0.9), 10, 1).is_ok());
        assert!(DropoutPolicy::new(srd(0.9), 10, 10).is_err());
        assert!(DropoutPolicy::new(srd(0.0), 10, 1).is_err());
        assert!(DropoutPolicy::new(srd(1.5), 10, 1).is_err());
        assert!(DropoutPolicy::new(srd(0.9), 0, 0).is_err());
        let conf = |tau| Variant::Dbpd {
            criterion: Difficulty::Confidence { tau },
        };
        assert!(DropoutPolicy::new(conf(0.0), 5, 1).is_ok());
        assert!(DropoutPolicy::new(conf(1.2), 5, 1).is_err());
        let analytic = |alpha| Variant::Analytic {
            decay: DecayKind::PowerLaw,
            alpha,
        };
        assert!(DropoutPolicy::new(analytic(1.0), 5, 1).is_ok());
        assert!(DropoutPolicy::new(analytic(-1.0), 5, 1).is_err());
        assert!(DropoutPolicy::baseline(3).is_ok());
    }

    #[test]
    fn replay_schedule_must_cover_the_run() {
        let rec = ScheduleRecord::new(10, vec![6, 4, 10]).unwrap();
        let v = Variant::SmrdReplay { schedule: rec };
        assert!(DropoutPolicy::new(v.clone(), 3, 1).is_ok());
        assert!(DropoutPolicy::new(v, 4, 1).is_err());
    }

    #[test]
    fn planned_counts() {
        let p = DropoutPolicy::new(
            Variant::Analytic {
                decay: DecayKind::PowerLaw,
                alpha: 1.0,
            },
            4,
            1,
        )
        .unwrap();
        let counts: Vec<_> = (1..=4)
            .map(|e| p.planned_count(e, 100).unwrap().unwrap())
            .collect();
        assert_eq!(counts, vec![100, 50, 33, 100]);
        assert!(p.planned_count(5, 100).is_err());

        let d = DropoutPolicy::new(
            Variant::Dbpd {
                criterion: Difficulty::Confidence { tau: 0.3 },
            },
            4,
            2,
        )
        .unwrap();
        assert_eq!(d.planned_count(2, 10).unwrap(), None);
        assert_eq!(d.planned_count(3, 10).unwrap(), Some(10));
        assert!(d.is_revision(3) && !d.is_revision(2));
    }
}
