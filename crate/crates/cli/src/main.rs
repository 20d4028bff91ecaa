use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blowup_cli::config::RunConfig;
use blowup_cli::{bound, check_to_file, oracle, simulate, sweep, CliError, VarySpec};
use blowup_core::concavity::ConcavitySetup;

#[derive(Parser)]
#[command(
    name = "blowup",
    version,
    about = "Blow-up criteria, bounds, and simulations for damped semilinear wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SetupArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    c1: f64,
    #[arg(long, allow_negative_numbers = true)]
    c2: f64,
    #[arg(long, allow_negative_numbers = true)]
    psi0: f64,
    #[arg(long, allow_negative_numbers = true)]
    dpsi0: f64,
}

impl SetupArgs {
    fn setup(&self) -> ConcavitySetup {
        ConcavitySetup {
            alpha: self.alpha,
            c1: self.c1,
            c2: self.c2,
            psi0: self.psi0,
            dpsi0: self.dpsi0,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the blow-up criterion without simulating.
    Check {
        config: PathBuf,
        /// Where to write the verdict.
        #[arg(long, default_value = "verdict.txt")]
        verdict: PathBuf,
    },
    /// Closed-form concavity bound.
    Bound(SetupArgs),
    /// Integrate the extremal ODE and compare with the bound.
    Oracle {
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 1e8)]
        threshold: f64,
    },
    /// Run a scenario and write series.csv and report.txt.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario over a range of one parameter.
    Sweep {
        config: PathBuf,
        /// key=lo:hi:n
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Check { config, verdict } => check_to_file(&RunConfig::load(&config)?, &verdict),
        Command::Bound(args) => bound(&args.setup()),
        Command::Oracle { setup, threshold } => oracle(&setup.setup(), threshold),
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config)?;
            Ok(simulate(&cfg, &out)?.1)
        }
        Command::Sweep { config, vary, out } => {
            let vary = VarySpec::parse(&vary)?;
            sweep(&RunConfig::load(&config)?, &vary, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("blowup: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
