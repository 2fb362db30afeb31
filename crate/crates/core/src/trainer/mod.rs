//! The training loop: forward every batch, pick a mask, backpropagate the
//! masked rows, and count every sample that goes through backpropagation.

mod report;

use serde::{Deserialize, Serialize};

pub use report::{histogram_csv, metrics_csv, HISTOGRAM_HEADER, METRICS_HEADER};

use crate::data::{batch_sizes, epoch_batches, BatchPlan, Dataset};
use crate::nn::{ForwardResult, Matrix, Mlp, OptimizerConfig, OptimizerState};
use crate::policy::{
    srd_fraction, Difficulty, DropoutPolicy, ScheduleRecord, SrdGranularity, Variant,
};
use crate::rng::{self, STREAM_SELECT};
use crate::selection::{
    apportion, random_k_size, select_by_confidence, select_by_count, select_by_loss,
    select_random_k, select_random_matched, BatchMask,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub policy: DropoutPolicy,
    pub seed: u64,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
    /// Hidden layer widths; input and output widths come from the data.
    pub hidden: Vec<usize>,
    /// Only count, never train. Valid for model-free variants.
    pub dry_run: bool,
}

impl RunConfig {
    pub fn new(policy: DropoutPolicy, seed: u64) -> Self {
        Self {
            policy,
            seed,
            batch_size: 32,
            optimizer: OptimizerConfig::default(),
            hidden: vec![128, 64],
            dry_run: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be positive".into()));
        }
        if self.dry_run && !self.policy.variant().is_model_free() {
            return Err(Error::Config(format!(
                "dry run needs a model-free variant (srd, smrd-replay, analytic), got {}",
                self.policy.variant().name()
            )));
        }
        self.optimizer.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Samples backpropagated during this epoch.
    pub retained: usize,
    /// Samples backpropagated so far, this epoch included.
    pub backprop_cum: u64,
    /// Mean loss over the backpropagated samples; `None` if there were none.
    pub train_loss: Option<f64>,
    pub test_accuracy: f64,
}

/// One batch of one epoch. `candidates` is the difficulty-mask size for
/// variants that compute one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    pub batch: usize,
    pub batch_size: usize,
    pub candidates: Option<usize>,
    pub selected: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub variant: String,
    pub n: usize,
    pub epochs: Vec<EpochMetrics>,
    pub backprop_total: u64,
    pub per_sample: Vec<u64>,
    pub effective_epochs: f64,
    pub steps: Vec<StepRecord>,
}

impl RunMetrics {
    pub fn final_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.test_accuracy)
    }

    pub fn retained(&self) -> Vec<usize> {
        self.epochs.iter().map(|e| e.retained).collect()
    }
}

#[derive(Clone, Debug)]
pub struct TrainedRun {
    pub metrics: RunMetrics,
    pub model: Mlp,
}

/// Per-batch mask sizes for model-free variants outside revision.
fn planned_batch_counts(
    policy: &DropoutPolicy,
    epoch: usize,
    n: usize,
    sizes: &[usize],
) -> Result<Option<Vec<usize>>> {
    if policy.is_revision(epoch) {
        return Ok(Some(sizes.to_vec()));
    }
    if let Variant::Srd {
        gamma,
        granularity: SrdGranularity::Batch,
    } = policy.variant()
    {
        let r = srd_fraction(*gamma, epoch, policy.epochs(), policy.revision());
        return Ok(Some(sizes.iter().map(|&s| random_k_size(s, r)).collect()));
    }
    match policy.planned_count(epoch, n)? {
        Some(k) => Ok(Some(apportion(k, sizes)?)),
        None => Ok(None),
    }
}

fn difficulty_mask(
    criterion: &Difficulty,
    fwd: &ForwardResult,
    labels: &[usize],
) -> Result<BatchMask> {
    Ok(match *criterion {
        Difficulty::Confidence { tau } => select_by_confidence(&fwd.probabilities, labels, tau),
        Difficulty::Loss { threshold } => {
            select_by_loss(&fwd.per_sample_losses(labels)?, threshold)
        }
    })
}

/// Trains from scratch and returns the metrics and the final model.
pub fn run_training(train: &Dataset, test: &Dataset, cfg: &RunConfig) -> Result<TrainedRun> {
    run_training_with(train, test, cfg, |_, _| {})
}

/// [`run_training`] with a callback after every epoch, receiving that
/// epoch's metrics and the per-sample backprop counts so far.
pub fn run_training_with<F>(
    train: &Dataset,
    test: &Dataset,
    cfg: &RunConfig,
    mut on_epoch: F,
) -> Result<TrainedRun>
where
    F: FnMut(&EpochMetrics, &[u64]),
{
    cfg.validate()?;
    if cfg.dry_run {
        return Err(Error::Config(
            "dry-run configs go through dry_run_schedule".into(),
        ));
    }
    if train.classes() != test.classes() || train.dims() != test.dims() {
        return Err(Error::Config(format!(
            "train ({} classes, {} features) and test ({} classes, {} features) disagree",
            train.classes(),
            train.dims(),
            test.classes(),
            test.dims()
        )));
    }

    let policy = &cfg.policy;
    let n = train.len();
    let mut widths = vec![train.dims()];
    widths.extend_from_slice(&cfg.hidden);
    widths.push(train.classes());
    let mut model = Mlp::new(&widths, cfg.seed)?;
    let mut opt = OptimizerState::new(cfg.optimizer, &model);

    let sizes = batch_sizes(n, cfg.batch_size);
    let mut per_sample = vec![0u64; n];
    let mut backprop_total = 0u64;
    let mut epochs = Vec::with_capacity(policy.epochs());
    let mut steps = Vec::with_capacity(policy.epochs() * sizes.len());

    for epoch in 1..=policy.epochs() {
        let plan = BatchPlan::new(cfg.seed, epoch, cfg.batch_size, n)?;
        let batches = epoch_batches(train, &plan)?;
        let planned = planned_batch_counts(policy, epoch, n, &sizes)?;
        let revision = policy.is_revision(epoch);

        let mut retained = 0usize;
        let mut loss_sum = 0.0;
        for (b, batch) in batches.iter().enumerate() {
            let size = batch.len();
            let fwd = model.forward(&batch.features)?;
            let mut rng = rng::stream(cfg.seed, &[STREAM_SELECT, epoch as u64, b as u64]);
            let mut candidates = None;

            let mask = if revision {
                BatchMask::full(size)
            } else {
                match policy.variant() {
                    Variant::Baseline => BatchMask::full(size),
                    Variant::Dbpd { criterion } => {
                        let m = difficulty_mask(criterion, &fwd, &batch.labels)?;
                        candidates = Some(m.len());
                        m
                    }
                    Variant::SmrdInline { criterion } => {
                        let hard = difficulty_mask(criterion, &fwd, &batch.labels)?;
                        candidates = Some(hard.len());
                        let m = select_random_matched(&hard, size, &mut rng)?;
                        assert_eq!(m.len(), hard.len(), "matched mask size");
                        m
                    }
                    Variant::Srd {
                        gamma,
                        granularity: SrdGranularity::Batch,
                    } => {
                        let r = srd_fraction(*gamma, epoch, policy.epochs(), policy.revision());
                        select_random_k(size, r, &mut rng)
                    }
                    Variant::Srd { .. } | Variant::SmrdReplay { .. } | Variant::Analytic { .. } => {
                        let k = planned.as_ref().expect("model-free counts")[b];
                        select_by_count(size, k, &mut rng)?
                    }
                }
            };

            steps.push(StepRecord {
                epoch,
                batch: b,
                batch_size: size,
                candidates,
                selected: mask.len(),
            });
            if mask.is_empty() {
                continue;
            }

            let (loss, grads) = model.loss_and_grad(&fwd, &batch.labels, mask.indices())?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    reason: format!("loss is {loss}"),
                });
            }
            opt.step(&mut model, &grads).map_err(|e| match e {
                Error::NonFiniteGradient { layer } => Error::Divergence {
                    epoch,
                    batch: b,
                    reason: format!("non-finite gradient in layer {layer}"),
                },
                other => other,
            })?;

            for &i in mask.indices() {
                per_sample[batch.ids[i]] += 1;
            }
            retained += mask.len();
            backprop_total += mask.len() as u64;
            loss_sum += loss * mask.len() as f64;
        }
        opt.end_epoch();

        if let Some(expected) = &planned {
            debug_assert_eq!(retained, expected.iter().sum::<usize>());
        }
        let metrics = EpochMetrics {
            epoch,
            retained,
            backprop_cum: backprop_total,
            train_loss: (retained > 0).then(|| loss_sum / retained as f64),
            test_accuracy: evaluate(&model, test)?,
        };
        on_epoch(&metrics, &per_sample);
        epochs.push(metrics);
    }

    let metrics = RunMetrics {
        variant: policy.variant().name().to_string(),
        n,
        epochs,
        backprop_total,
        effective_epochs: backprop_total as f64 / n as f64,
        per_sample,
        steps,
    };
    Ok(TrainedRun { metrics, model })
}

/// Counts what a model-free run would backpropagate, without a model.
/// The counts equal those of a real run of the same policy.
pub fn dry_run_schedule(
    policy: &DropoutPolicy,
    n: usize,
    batch_size: usize,
) -> Result<(ScheduleRecord, f64)> {
    if !policy.variant().is_model_free() {
        return Err(Error::Config(format!(
            "dry run needs a model-free variant (srd, smrd-replay, analytic), got {}",
            policy.variant().name()
        )));
    }
    if n == 0 || batch_size == 0 {
        return Err(Error::Config(
            "dry run needs N > 0 and batch size > 0".into(),
        ));
    }
    let sizes = batch_sizes(n, batch_size);
    let retained = (1..=policy.epochs())
        .map(|epoch| {
            let counts = planned_batch_counts(policy, epoch, n, &sizes)?.expect("model-free");
            Ok(counts.iter().sum())
        })
        .collect::<Result<Vec<usize>>>()?;
    let record = ScheduleRecord::new(n, retained)?;
    let ee = record.effective_epochs();
    Ok((record, ee))
}

/// Per-epoch retained counts of a dbpd run, ready for `smrd-replay`.
pub fn record_dbpd_schedule(metrics: &RunMetrics) -> Result<ScheduleRecord> {
    if metrics.variant != "dbpd" {
        return Err(Error::Config(format!(
            "schedules are recorded from dbpd runs, not {}",
            metrics.variant
        )));
    }
    ScheduleRecord::new(metrics.n, metrics.retained())
}

/// Fraction of `test` whose highest logit is the label (ties go to the
/// lowest class).
pub fn evaluate(model: &Mlp, test: &Dataset) -> Result<f64> {
    const CHUNK: usize = 512;
    let mut correct = 0usize;
    let ids: Vec<usize> = (0..test.len()).collect();
    for chunk in ids.chunks(CHUNK) {
        let x: Matrix = test.features().select_rows(chunk);
        let fwd = model.forward(&x)?;
        correct += fwd
            .predictions()
            .iter()
            .zip(chunk)
            .filter(|(p, &i)| **p == test.labels()[i])
            .count();
    }
    Ok(correct as f64 / test.len() as f64)
}
