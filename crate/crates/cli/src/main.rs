//! `zerocap`: zero-error quantities of channels and non-commutative graphs
//! from JSON specs.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "zerocap",
    version,
    about = "Zero-error capacities and simulation costs assisted by no-signalling correlations"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Relative duality-gap tolerance of the SDP solver.
    #[arg(long, global = true, env = "ZEROCAP_GAP_TOL", default_value_t = 1e-7)]
    pub gap_tol: f64,
    /// Feasibility tolerance of the SDP solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub feas_tol: f64,
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write primal/dual witnesses (or the constructed correlation) as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub dump_witness: Option<PathBuf>,
    /// Seed of the randomized suites.
    #[arg(long, global = true, default_value_t = zerocap::regress::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assisted zero-error capacity Υ, superdense bound, feasibility.
    Capacity { spec: PathBuf },
    /// Simulation cost Σ of the graph and, when determined, of the channel.
    Simcost { spec: PathBuf },
    /// Packing numbers A, Ã, Â and the product A·Â.
    Packing { spec: PathBuf },
    /// Lovász number of a graph (or of the confusability graph of a spec).
    Theta { spec: PathBuf },
    /// Fractional packing number of a classical channel.
    Alphastar { spec: PathBuf },
    /// A quantity on the n-fold tensor power of the spec.
    Power {
        spec: PathBuf,
        #[arg(short = 'n', default_value_t = 2)]
        n: usize,
        quantity: PowerQuantity,
        /// Write the tensor-power spec as JSON.
        #[arg(long, value_name = "PATH")]
        emit_spec: Option<PathBuf>,
    },
    /// Build an M-message correlation, compose it and check the result.
    Verify {
        spec: PathBuf,
        #[arg(short = 'M', value_name = "M")]
        m: usize,
        /// Simulation correlation instead of a code.
        #[arg(long)]
        simulate: bool,
    },
    /// Sampled curves of a one-parameter family.
    Sweep {
        family: SweepFamily,
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Acceptance suite with a pass/fail table.
    Regress,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerQuantity {
    Upsilon,
    Sigma,
    SigmaChannel,
    Aram,
    AramTilde,
    AramHat,
    Theta,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepFamily {
    #[value(name = "two_state")]
    TwoState,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error code=usage exit=2: {first}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command, &cli.global) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error code={} exit={}: {}", e.kind(), e.exit_code(), e.message().replace('\n', " "));
            ExitCode::from(e.exit_code())
        }
    }
}
