//! Command implementations behind the `pdd` binary.
//!
//! Exit codes: 0 success, 1 I/O or ingestion failure, 2 configuration
//! error, 3 numerical failure.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{DataSection, ExperimentConfig, PolicySection, SweepSection};

use crate::data::{gen_synthetic_splits, write_idx};
use crate::policy::ScheduleRecord;
use crate::trainer::{
    dry_run_schedule, histogram_csv, metrics_csv, record_dbpd_schedule, run_training,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SWEEP_HEADER: &str = "axis_values,effective_epochs,final_acc";

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::NonFiniteGradient { .. } => EXIT_NUMERICAL,
        Error::Io { .. } | Error::Ingestion { .. } => EXIT_IO,
        Error::Config(_) | Error::Dimension(_) | Error::Domain(_) | Error::Parse { .. } => {
            EXIT_CONFIG
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Allow writing into a non-empty output directory.
    pub force: bool,
    /// Replaces the config seed (the binary reads it from `PDD_SEED`).
    pub seed_override: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub output_dir: PathBuf,
    pub effective_epochs: f64,
    /// `None` for dry runs.
    pub final_accuracy: Option<f64>,
}

fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() && !force {
            return Err(Error::Config(format!(
                "output directory {} is not empty (pass --force to overwrite)",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

/// Runs one experiment config and writes its artifacts.
pub fn cmd_train(config_path: &Path, opts: &RunOptions) -> Result<TrainSummary> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = opts.seed_override {
        cfg.seed = seed;
    }
    let base = base_dir(config_path);
    train_experiment(&cfg, &base, opts.force)
}

/// Runs an already-parsed config. `base` anchors relative paths.
pub fn train_experiment(cfg: &ExperimentConfig, base: &Path, force: bool) -> Result<TrainSummary> {
    let run_cfg = cfg.run_config(base)?;
    let out = config::resolve(base, &cfg.output_dir);

    if run_cfg.dry_run {
        let n = cfg.data.load(base)?.0.len();
        let (record, ee) = dry_run_schedule(&run_cfg.policy, n, run_cfg.batch_size)?;
        prepare_output_dir(&out, force)?;
        if record.ends_with_revision() {
            record.write(&out.join("schedule.csv"))?;
        }
        let summary = json!({
            "effective_epochs": ee,
            "final_accuracy": null,
            "dry_run": true,
            "config": cfg,
        });
        write_file(&out.join("summary.json"), pretty(&summary))?;
        println!("effective_epochs: {ee:.4}");
        return Ok(TrainSummary {
            output_dir: out,
            effective_epochs: ee,
            final_accuracy: None,
        });
    }

    let (train, test) = cfg.data.load(base)?;
    let run = run_training(&train, &test, &run_cfg)?;
    let m = &run.metrics;

    prepare_output_dir(&out, force)?;
    write_file(&out.join("metrics.csv"), metrics_csv(m))?;
    write_file(&out.join("histogram.csv"), histogram_csv(m))?;
    if m.variant == "dbpd" {
        let record = record_dbpd_schedule(m)?;
        if record.ends_with_revision() {
            record.write(&out.join("schedule.csv"))?;
        } else {
            eprintln!("note: no revision epoch, schedule.csv not written");
        }
    }
    let summary = json!({
        "effective_epochs": m.effective_epochs,
        "final_accuracy": m.final_accuracy(),
        "backprop_total": m.backprop_total,
        "n": m.n,
        "variant": m.variant,
        "config": cfg,
    });
    write_file(&out.join("summary.json"), pretty(&summary))?;
    println!(
        "effective_epochs: {:.4}\nfinal_accuracy: {:.4}",
        m.effective_epochs,
        m.final_accuracy()
    );
    Ok(TrainSummary {
        output_dir: out,
        effective_epochs: m.effective_epochs,
        final_accuracy: Some(m.final_accuracy()),
    })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis_values: String,
    pub result: std::result::Result<TrainSummary, String>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Exit code of the first failed run, 0 if all succeeded.
    pub exit_code: i32,
}

/// Runs the cross product of the sweep axes, one subdirectory per point,
/// and writes `sweep.csv` sorted by the axis values.
pub fn cmd_sweep(config_path: &Path, opts: &RunOptions) -> Result<SweepOutcome> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = opts.seed_override {
        cfg.seed = seed;
    }
    let base = base_dir(config_path);
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("sweep: section missing".into()))?;

    let mut taus: Vec<Option<f64>> = match &sweep.tau {
        Some(v) if v.is_empty() => return Err(Error::Config("sweep.tau: empty".into())),
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut budgets: Vec<Option<usize>> = match &sweep.epochs {
        Some(v) if v.is_empty() => return Err(Error::Config("sweep.epochs: empty".into())),
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    if taus == [None] && budgets == [None] {
        return Err(Error::Config("sweep: no axes given (tau, epochs)".into()));
    }
    if taus.iter().flatten().any(|t| t.is_nan()) {
        return Err(Error::Config("sweep.tau: NaN".into()));
    }
    if taus[0].is_some() && !matches!(cfg.policy.variant.as_str(), "dbpd" | "smrd-inline") {
        return Err(Error::Config(format!(
            "sweep.tau: variant {} has no tau",
            cfg.policy.variant
        )));
    }
    taus.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    budgets.sort_unstable();

    let root = config::resolve(&base, &cfg.output_dir);
    prepare_output_dir(&root, opts.force)?;

    let mut rows = Vec::new();
    let mut exit = EXIT_OK;
    for tau in &taus {
        for budget in &budgets {
            let mut parts = Vec::new();
            let mut point = cfg.clone();
            point.sweep = None;
            if let Some(t) = tau {
                point.policy.tau = Some(*t);
                point.policy.loss_threshold = None;
                parts.push(format!("tau={t}"));
            }
            if let Some(e) = budget {
                point.epochs = *e;
                parts.push(format!("epochs={e}"));
            }
            let name = parts.join("_");
            point.output_dir = root.join(&name);
            println!("== {name}");
            let result = train_experiment(&point, &base, opts.force).map_err(|e| {
                eprintln!("run {name} failed: {e}");
                if exit == EXIT_OK {
                    exit = exit_code(&e);
                }
                e.to_string()
            });
            rows.push(SweepRow {
                axis_values: name,
                result,
            });
        }
    }

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        match &row.result {
            Ok(s) => {
                let acc = s
                    .final_accuracy
                    .map_or_else(|| "n/a".into(), |a| format!("{a:.6}"));
                csv.push_str(&format!(
                    "{},{:.6},{acc}\n",
                    row.axis_values, s.effective_epochs
                ));
            }
            Err(_) => csv.push_str(&format!("{},failed,failed\n", row.axis_values)),
        }
    }
    write_file(&root.join("sweep.csv"), csv)?;
    Ok(SweepOutcome {
        rows,
        exit_code: exit,
    })
}

/// Flag-level description of a model-free schedule for `dry-run`.
#[derive(Clone, Debug)]
pub struct DryRunRequest {
    pub policy: PolicySection,
    pub n: usize,
    pub epochs: usize,
    pub revision: usize,
    pub batch_size: usize,
    pub out: Option<PathBuf>,
}

pub fn cmd_dry_run(req: &DryRunRequest) -> Result<(ScheduleRecord, f64)> {
    if !matches!(
        req.policy.variant.as_str(),
        "srd" | "smrd-replay" | "analytic"
    ) {
        return Err(Error::Config(format!(
            "--variant {}: dry runs need a model-free variant (srd, smrd-replay, analytic)",
            req.policy.variant
        )));
    }
    let policy = req
        .policy
        .to_policy(req.epochs, req.revision, Path::new(""))?;
    let (record, ee) = dry_run_schedule(&policy, req.n, req.batch_size)?;
    println!("epoch,retained");
    for e in record.entries() {
        println!("{},{}", e.epoch, e.retained);
    }
    println!("effective_epochs: {ee:.4}");
    if let Some(path) = &req.out {
        record.write(path)?;
    }
    Ok((record, ee))
}

#[derive(Clone, Debug)]
pub struct GenDataRequest {
    pub classes: usize,
    pub per_class: usize,
    pub test_per_class: usize,
    pub dims: usize,
    pub spread: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
}

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "test-images-idx3-ubyte";
pub const TEST_LABELS: &str = "test-labels-idx1-ubyte";

/// Writes synthetic train/test IDX pairs into `out_dir`.
pub fn cmd_gen_data(req: &GenDataRequest) -> Result<()> {
    let (train, test) = gen_synthetic_splits(
        req.classes,
        req.per_class,
        req.test_per_class,
        req.dims,
        req.spread,
        req.seed,
    )?;
    fs::create_dir_all(&req.out_dir).map_err(|e| Error::io(&req.out_dir, e))?;
    let p = |name: &str| req.out_dir.join(name);
    write_idx(&train, &p(TRAIN_IMAGES), &p(TRAIN_LABELS))?;
    write_idx(&test, &p(TEST_IMAGES), &p(TEST_LABELS))?;
    println!(
        "wrote {} train and {} test samples to {}",
        train.len(),
        test.len(),
        req.out_dir.display()
    );
    Ok(())
}

/// Validates a schedule file and prints a one-line summary.
pub fn cmd_schedule_check(path: &Path, n: Option<usize>) -> Result<ScheduleRecord> {
    let record = ScheduleRecord::read(path, n)?;
    println!(
        "ok: {} epochs, N={}, effective_epochs={:.4}",
        record.epochs(),
        record.n(),
        record.effective_epochs()
    );
    Ok(record)
}
