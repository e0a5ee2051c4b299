use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use denoiser_cli::{cmd_analyze, cmd_evaluate, cmd_optimize, cmd_sample, cmd_sweep, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "denoiser", version, about = "Compressed quasiprobability denoisers for noisy Trotter circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the configured denoiser and write its parameter file.
    Optimize(Args),
    /// Evaluate the observable tasks of the config.
    Evaluate(Args),
    /// Estimate an observable by sampling the denoiser ensemble.
    Sample(Args),
    /// Spectra, Choi entropies and sampling overheads.
    Analyze(Args),
    /// Optimized cost against noise strength.
    Sweep(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Denoiser parameter file written by `optimize`.
    #[arg(long)]
    denoiser: Option<PathBuf>,
    /// Shot count for `sample`; defaults to the Hoeffding budget.
    #[arg(long)]
    shots: Option<u64>,
}

impl Args {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Optimize(a) => cmd_optimize(&a.load()?).map(drop),
        Command::Evaluate(a) => cmd_evaluate(&a.load()?, a.denoiser.as_deref()).map(drop),
        Command::Sample(a) => cmd_sample(&a.load()?, a.denoiser.as_deref(), a.shots).map(drop),
        Command::Analyze(a) => cmd_analyze(&a.load()?, a.denoiser.as_deref()).map(drop),
        Command::Sweep(a) => cmd_sweep(&a.load()?).map(drop),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
