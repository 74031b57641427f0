//! `qdisorder` command-line front-end.
//!
//! Every command reads an optional JSON config, applies flag overrides, runs
//! the experiment and writes CSV series and a JSON report into `--out`.
//! Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
//! routine fails to converge, 1 when outputs cannot be written.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{AuditArgs, IonChainArgs, NeighborDecayArgs, QnnArgs, QnnSizesArgs, SweepArgs};

#[derive(Debug, Parser)]
#[command(name = "qdisorder", version, about = "Disordered spin glasses and ion-chain neural networks")]
struct Cli {
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Edwards-Anderson quench experiments.
    #[command(subcommand)]
    SpinGlass(SpinGlass),
    /// Trapped-ion chain equilibrium, modes and couplings.
    #[command(subcommand)]
    IonChain(IonChain),
    /// Hopfield network audits.
    #[command(subcommand)]
    Nn(Nn),
    /// Entanglement dynamics of the ion-chain network.
    #[command(subcommand)]
    Qnn(Qnn),
}

#[derive(Debug, Subcommand)]
enum SpinGlass {
    /// Disorder-averaged nearest-neighbor log-negativity versus time.
    Sweep(SweepArgs),
    /// Plateau versus exterior-neighbor count across lattice kinds.
    NeighborDecay(NeighborDecayArgs),
}

#[derive(Debug, Subcommand)]
enum IonChain {
    Solve(IonChainArgs),
}

#[derive(Debug, Subcommand)]
enum Nn {
    Audit(AuditArgs),
}

#[derive(Debug, Subcommand)]
enum Qnn {
    /// Pair entanglement series with collapse and revival detection.
    Revivals(QnnArgs),
    /// End-pair series for several chain lengths.
    IonNumber(QnnSizesArgs),
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Output(_) => 1,
        }
    }
}

impl From<qdisorder::Error> for Failure {
    fn from(e: qdisorder::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

/// Shared `--config` flag.
#[derive(Debug, Clone, Args)]
pub struct ConfigFile {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SpinGlass(SpinGlass::Sweep(a)) => commands::spin_glass_sweep(&cli.out, a),
        Command::SpinGlass(SpinGlass::NeighborDecay(a)) => commands::neighbor_decay(&cli.out, a),
        Command::IonChain(IonChain::Solve(a)) => commands::ion_chain_solve(&cli.out, a),
        Command::Nn(Nn::Audit(a)) => commands::nn_audit(&cli.out, a),
        Command::Qnn(Qnn::Revivals(a)) => commands::qnn_revivals(&cli.out, a),
        Command::Qnn(Qnn::IonNumber(a)) => commands::qnn_ion_number(&cli.out, a),
    };
    match result {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("qdisorder: {f}");
            ExitCode::from(f.code())
        }
    }
}
