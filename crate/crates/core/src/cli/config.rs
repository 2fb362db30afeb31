//! TOML experiment files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{gen_synthetic_splits, load_idx, Dataset};
use crate::nn::OptimizerConfig;
use crate::policy::{
    DecayKind, Difficulty, DropoutPolicy, ScheduleRecord, SrdGranularity, Variant,
};
use crate::trainer::RunConfig;
use crate::{Error, Result};

fn default_revision() -> usize {
    1
}

fn default_batch_size() -> usize {
    32
}

fn default_hidden() -> Vec<usize> {
    vec![128, 64]
}

/// One experiment: a training run, or a sweep of runs when `[sweep]` is set.
/// Relative paths are resolved against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub epochs: usize,
    #[serde(default = "default_revision")]
    pub revision: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub dry_run: bool,
    pub output_dir: PathBuf,
    pub policy: PolicySection,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub data: DataSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Flat policy table; which keys are allowed depends on `variant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<SrdGranularity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// `synthetic` or `idx`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_per_class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_labels: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<Vec<usize>>,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

/// Rejects any key in `present` that is not in `allowed`.
fn only(section: &str, owner: &str, present: &[(&str, bool)], allowed: &[&str]) -> Result<()> {
    for (name, set) in present {
        if *set && !allowed.contains(name) {
            return Err(field_error(
                &format!("{section}.{name}"),
                format!("not used by {owner}"),
            ));
        }
    }
    Ok(())
}

fn require<T: Copy>(field: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| field_error(field, "required"))
}

impl PolicySection {
    fn present(&self) -> [(&'static str, bool); 7] {
        [
            ("tau", self.tau.is_some()),
            ("loss_threshold", self.loss_threshold.is_some()),
            ("gamma", self.gamma.is_some()),
            ("granularity", self.granularity.is_some()),
            ("decay", self.decay.is_some()),
            ("alpha", self.alpha.is_some()),
            ("schedule", self.schedule.is_some()),
        ]
    }

    fn difficulty(&self) -> Result<Difficulty> {
        match (self.tau, self.loss_threshold) {
            (Some(tau), None) => {
                if !(0.0..=1.0).contains(&tau) {
                    return Err(field_error("policy.tau", "must be in [0, 1]"));
                }
                Ok(Difficulty::Confidence { tau })
            }
            (None, Some(threshold)) => {
                if threshold.is_nan() || threshold < 0.0 {
                    return Err(field_error("policy.loss_threshold", "must be >= 0"));
                }
                Ok(Difficulty::Loss { threshold })
            }
            (Some(_), Some(_)) => Err(field_error(
                "policy",
                "set either tau or loss_threshold, not both",
            )),
            (None, None) => Err(field_error("policy.tau", "required (or loss_threshold)")),
        }
    }

    /// Builds the validated policy. `base` resolves a relative schedule path.
    pub fn to_policy(&self, epochs: usize, revision: usize, base: &Path) -> Result<DropoutPolicy> {
        let present = self.present();
        let owner = format!("variant {}", self.variant);
        let variant = match self.variant.as_str() {
            "baseline" => {
                only("policy", &owner, &present, &[])?;
                Variant::Baseline
            }
            "dbpd" | "smrd-inline" => {
                only("policy", &owner, &present, &["tau", "loss_threshold"])?;
                let criterion = self.difficulty()?;
                if self.variant == "dbpd" {
                    Variant::Dbpd { criterion }
                } else {
                    Variant::SmrdInline { criterion }
                }
            }
            "srd" => {
                only("policy", &owner, &present, &["gamma", "granularity"])?;
                let gamma = require("policy.gamma", self.gamma)?;
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(field_error("policy.gamma", format!("must be in (0, 1), got {gamma}")));
                }
                Variant::Srd {
                    gamma,
                    granularity: self.granularity.unwrap_or_default(),
                }
            }
            "smrd-replay" => {
                only("policy", &owner, &present, &["schedule"])?;
                let path = self
                    .schedule
                    .as_ref()
                    .ok_or_else(|| field_error("policy.schedule", "required"))?;
                Variant::SmrdReplay {
                    schedule: ScheduleRecord::read(&resolve(base, path), None)?,
                }
            }
            "analytic" => {
                only("policy", &owner, &present, &["decay", "alpha"])?;
                let decay = require("policy.decay", self.decay)?;
                let alpha = require("policy.alpha", self.alpha)?;
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(field_error("policy.alpha", "must be positive"));
                }
                Variant::Analytic { decay, alpha }
            }
            other => {
                return Err(field_error(
                    "policy.variant",
                    format!(
                        "unknown variant '{other}' (expected baseline, dbpd, srd, smrd-inline, smrd-replay or analytic)"
                    ),
                ))
            }
        };
        let revision = if matches!(variant, Variant::Baseline) {
            0
        } else {
            revision
        };
        DropoutPolicy::new(variant, epochs, revision)
    }
}

impl DataSection {
    fn present(&self) -> [(&'static str, bool); 10] {
        [
            ("classes", self.classes.is_some()),
            ("per_class", self.per_class.is_some()),
            ("test_per_class", self.test_per_class.is_some()),
            ("dims", self.dims.is_some()),
            ("spread", self.spread.is_some()),
            ("seed", self.seed.is_some()),
            ("train_images", self.train_images.is_some()),
            ("train_labels", self.train_labels.is_some()),
            ("test_images", self.test_images.is_some()),
            ("test_labels", self.test_labels.is_some()),
        ]
    }

    /// Loads or generates `(train, test)`.
    pub fn load(&self, base: &Path) -> Result<(Dataset, Dataset)> {
        let present = self.present();
        let owner = format!("source {}", self.source);
        match self.source.as_str() {
            "synthetic" => {
                only(
                    "data",
                    &owner,
                    &present,
                    &[
                        "classes",
                        "per_class",
                        "test_per_class",
                        "dims",
                        "spread",
                        "seed",
                    ],
                )?;
                let classes = require("data.classes", self.classes)?;
                let per_class = require("data.per_class", self.per_class)?;
                let test_per_class = require("data.test_per_class", self.test_per_class)?;
                let dims = require("data.dims", self.dims)?;
                let spread = require("data.spread", self.spread)?;
                let seed = require("data.seed", self.seed)?;
                gen_synthetic_splits(classes, per_class, test_per_class, dims, spread, seed)
            }
            "idx" => {
                only(
                    "data",
                    &owner,
                    &present,
                    &["train_images", "train_labels", "test_images", "test_labels"],
                )?;
                let path = |field: &str, v: &Option<PathBuf>| {
                    v.as_ref()
                        .map(|p| resolve(base, p))
                        .ok_or_else(|| field_error(field, "required"))
                };
                let train = load_idx(
                    &path("data.train_images", &self.train_images)?,
                    &path("data.train_labels", &self.train_labels)?,
                )?;
                let test = load_idx(
                    &path("data.test_images", &self.test_images)?,
                    &path("data.test_labels", &self.test_labels)?,
                )?;
                let classes = train.classes().max(test.classes());
                Ok((train.with_classes(classes)?, test.with_classes(classes)?))
            }
            other => Err(field_error(
                "data.source",
                format!("unknown source '{other}' (expected synthetic or idx)"),
            )),
        }
    }
}

pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validates everything except data loading and builds the run config.
    pub fn run_config(&self, base: &Path) -> Result<RunConfig> {
        let policy = self.policy.to_policy(self.epochs, self.revision, base)?;
        let cfg = RunConfig {
            policy,
            seed: self.seed,
            batch_size: self.batch_size,
            optimizer: self.optimizer,
            hidden: self.hidden.clone(),
            dry_run: self.dry_run,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
