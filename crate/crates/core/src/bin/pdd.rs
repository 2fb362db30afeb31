use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdd::cli::{self, DryRunRequest, GenDataRequest, PolicySection, RunOptions};
use pdd::policy::{DecayKind, SrdGranularity};
use pdd::Error;

#[derive(Parser)]
#[command(
    name = "pdd",
    version,
    about = "Progressive data dropout training and schedule tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train from an experiment config.
    Train(RunArgs),
    /// Run every point of the config's [sweep] axes.
    Sweep(RunArgs),
    /// Count backpropagated samples of a model-free policy without training.
    DryRun(DryRunArgs),
    /// Write synthetic train/test IDX files.
    GenData(GenDataArgs),
    /// Schedule file tools.
    Schedule {
        #[command(subcommand)]
        command: ScheduleCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct DryRunArgs {
    #[arg(long)]
    variant: String,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_parser = parse_granularity)]
    granularity: Option<SrdGranularity>,
    #[arg(long = "fn", value_parser = parse_decay)]
    decay: Option<DecayKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long)]
    epochs: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    revision: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Also write the predicted schedule here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 800)]
    per_class: usize,
    #[arg(long, default_value_t = 200)]
    test_per_class: usize,
    #[arg(long, default_value_t = 32)]
    dims: usize,
    #[arg(long, default_value_t = 0.15)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Validate a schedule file.
    Check {
        file: PathBuf,
        /// Dataset size the schedule must match.
        #[arg(long)]
        n: Option<usize>,
    },
}

fn parse_decay(s: &str) -> Result<DecayKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_granularity(s: &str) -> Result<SrdGranularity, String> {
    match s {
        "epoch" => Ok(SrdGranularity::Epoch),
        "batch" => Ok(SrdGranularity::Batch),
        _ => Err(format!("expected epoch or batch, got {s}")),
    }
}

fn seed_override() -> Result<Option<u64>, Error> {
    match std::env::var("PDD_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("PDD_SEED: not an integer: {v}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Train(args) => {
            let opts = RunOptions {
                force: args.force,
                seed_override: seed_override()?,
            };
            cli::cmd_train(&args.config, &opts)?;
            Ok(cli::EXIT_OK)
        }
        Command::Sweep(args) => {
            let opts = RunOptions {
                force: args.force,
                seed_override: seed_override()?,
            };
            Ok(cli::cmd_sweep(&args.config, &opts)?.exit_code)
        }
        Command::DryRun(a) => {
            let req = DryRunRequest {
                policy: PolicySection {
                    variant: a.variant,
                    gamma: a.gamma,
                    granularity: a.granularity,
                    decay: a.decay,
                    alpha: a.alpha,
                    schedule: a.schedule,
                    ..Default::default()
                },
                n: a.n,
                epochs: a.epochs,
                revision: a.revision,
                batch_size: a.batch,
                out: a.out,
            };
            cli::cmd_dry_run(&req)?;
            Ok(cli::EXIT_OK)
        }
        Command::GenData(a) => {
            cli::cmd_gen_data(&GenDataRequest {
                classes: a.classes,
                per_class: a.per_class,
                test_per_class: a.test_per_class,
                dims: a.dims,
                spread: a.spread,
                seed: a.seed,
                out_dir: a.out,
            })?;
            Ok(cli::EXIT_OK)
        }
        Command::Schedule {
            command: ScheduleCommand::Check { file, n },
        } => {
            cli::cmd_schedule_check(&file, n)?;
            Ok(cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
