//! `sdwave` — experiment runner for the structurally damped wave toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdwave::runner;

#[derive(Parser)]
#[command(
    name = "sdwave",
    about = "Pseudo-spectral simulation and decay/blow-up verification for \
             structurally damped semilinear waves",
    after_help = "Exit codes: 0 all verdicts pass, 1 verdict failure, \
                  2 configuration error, 3 runtime error.\nSet SDWAVE_THREADS \
                  to bound the worker count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration file (section.key = value lines).
    #[arg(long, global = true, default_value = "experiment.cfg")]
    config: PathBuf,
    /// Output directory for manifest, report and CSV series.
    #[arg(long, global = true, default_value = "sdwave_out")]
    out: PathBuf,
    /// Suppress progress output (the report file is still written).
    #[arg(long, global = true)]
    quiet: bool,
    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Linear decay rates vs the predicted tables (grid or oracle mode).
    LinearDecay,
    /// Semilinear ETD run with norm histories.
    Semilinear,
    /// Blow-up probe: requires positive data functional, reports the outcome.
    BlowupProbe,
    /// Picard iteration contraction diagnostics.
    Picard,
    /// Critical exponents, admissible ranges, blow-up bounds and gaps.
    Exponents,
    /// Grid-mode vs radial-oracle norm comparison.
    OracleCompare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Ok(threads) = std::env::var("SDWAVE_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    let sub = match cli.command {
        Command::LinearDecay => runner::Subcommand::LinearDecay,
        Command::Semilinear => runner::Subcommand::Semilinear,
        Command::BlowupProbe => runner::Subcommand::BlowupProbe,
        Command::Picard => runner::Subcommand::Picard,
        Command::Exponents => runner::Subcommand::Exponents,
        Command::OracleCompare => runner::Subcommand::OracleCompare,
    };
    let cfg_text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", cli.config.display());
            return ExitCode::from(runner::EXIT_CONFIG_ERROR as u8);
        }
    };
    let code = runner::execute(sub, &cfg_text, &cli.out, cli.quiet, cli.seed);
    ExitCode::from(code as u8)
}
