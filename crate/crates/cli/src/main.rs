use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plurality_cli::{run_experiment, CliError, ExperimentFile, Mode, Overrides};

/// Reproducible experiment front-end for the plurality-consensus
/// simulators: seeded runs, exact-oracle dumps, md sweeps and phase
/// analysis, all emitting CSV traces plus JSON summaries and a manifest.
#[derive(Parser)]
#[command(name = "plurality-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment file (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for every random choice of the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the dynamics on the complete graph.
    SimulateComplete(CommonArgs),
    /// Simulate the token-phase variant on a random regular graph.
    SimulateExpander(CommonArgs),
    /// Dump the exact one-step distribution (and optionally absorption).
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Also compute absorption probabilities and expected time.
        #[arg(long)]
        absorption: bool,
        /// Truncated-iteration horizon; omit for the exact linear solve.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Run a family of initial specs and fit convergence time against md.
    Sweep(CommonArgs),
    /// Run once and report phase boundaries plus the monotonicity audit.
    Phases(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common, absorption, horizon) = match cli.command {
        Command::SimulateComplete(c) => (Mode::Complete, c, false, None),
        Command::SimulateExpander(c) => (Mode::Expander, c, false, None),
        Command::Oracle {
            common,
            absorption,
            horizon,
        } => (Mode::Oracle, common, absorption, horizon),
        Command::Sweep(c) => (Mode::Sweep, c, false, None),
        Command::Phases(c) => (Mode::Phases, c, false, None),
    };

    match execute(mode, common, absorption, horizon) {
        Ok(out_dir) => {
            println!("artifacts written to {}", out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(
    mode: Mode,
    common: CommonArgs,
    absorption: bool,
    horizon: Option<u64>,
) -> Result<PathBuf, CliError> {
    let file = match &common.config {
        Some(path) => ExperimentFile::load(path)?,
        None => ExperimentFile::default(),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out,
        absorption,
        horizon,
    };
    run_experiment(mode, &file, &overrides)
}
