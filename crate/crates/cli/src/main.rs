use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stg_cli::config::{preset, ExperimentConfig, ExperimentKind};
use stg_cli::report;
use stg_cli::runner::{self, RunnerError};

/// Experiment runner for gated feature selection benchmarks.
#[derive(Parser)]
#[command(name = "stg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep from a config file or a built-in preset.
    Run(RunArgs),
    /// Summarize a runs.csv into per-group statistics.
    Summarize(SummarizeArgs),
    /// Generate a preset's dataset and write it as CSV.
    Datagen(DatagenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML experiment config.
    config: Option<PathBuf>,
    /// Built-in preset name (alternative to a config file).
    #[arg(long)]
    preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// runs.csv produced by `stg run`.
    runs: PathBuf,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DatagenArgs {
    /// Preset whose dataset to generate.
    preset: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Datagen(args) => cmd_datagen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RunnerError::Config(_) => ExitCode::from(EXIT_CONFIG),
                RunnerError::Runtime(_) => ExitCode::from(EXIT_RUNTIME),
            }
        }
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, RunnerError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(RunnerError::Config)?
        }
        (None, Some(name)) => {
            let kind = ExperimentKind::parse(name)
                .ok_or_else(|| RunnerError::Config(format!("unknown preset '{name}'")))?;
            preset(kind)
        }
        _ => {
            return Err(RunnerError::Config(
                "pass exactly one of <config> or --preset <name>".into(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        cfg.experiment.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.experiment.out_dir = out.clone();
    }
    cfg.validate().map_err(RunnerError::Config)?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<(), RunnerError> {
    let cfg = load_config(&args)?;
    let reports = runner::run_experiment(&cfg, args.jobs)?;
    let emitted = runner::emit(&cfg, &reports)?;
    let failed = reports.iter().filter(|r| r.failed).count();
    eprintln!(
        "[stg] {} runs ({failed} failed) -> {}",
        reports.len(),
        emitted.runs_csv.display()
    );
    println!("{}", emitted.runs_csv.display());
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<(), RunnerError> {
    let text = std::fs::read_to_string(&args.runs)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", args.runs.display())))?;
    let reports = report::runs_from_csv(&text).map_err(RunnerError::Config)?;
    let groups = report::summarize(&reports).map_err(RunnerError::Runtime)?;
    let csv = report::summary_to_csv(&groups);
    match &args.out {
        Some(path) => report::write_atomic(path, &csv)
            .map_err(|e| RunnerError::Runtime(format!("{}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_datagen(args: DatagenArgs) -> Result<(), RunnerError> {
    let kind = ExperimentKind::parse(&args.preset)
        .ok_or_else(|| RunnerError::Config(format!("unknown preset '{}'", args.preset)))?;
    if kind == ExperimentKind::CustomCsv {
        return Err(RunnerError::Config(
            "custom_csv loads data, it has nothing to generate".into(),
        ));
    }
    let mut cfg = preset(kind);
    if let Some(seed) = args.seed {
        cfg.experiment.master_seed = seed;
    }
    let ds = runner::preset_dataset(&cfg).map_err(|e| RunnerError::Runtime(e.to_string()))?;
    stg_core::datagen::write_csv(&ds, &args.out)
        .map_err(|e| RunnerError::Runtime(format!("{}: {e}", args.out.display())))?;
    eprintln!(
        "[stg] wrote {} rows x {} features to {}",
        ds.n(),
        ds.d(),
        args.out.display()
    );
    Ok(())
}
