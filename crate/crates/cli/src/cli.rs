use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "kerr-echo", version, about = "Echo and revival simulations of a kicked Kerr oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML), or a manifest.json from an earlier run. Defaults to the
    /// built-in scenario of the subcommand.
    #[arg(long, global = true, env = "KERR_ECHO_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "KERR_ECHO_OUT", default_value = "kerr-echo-out")]
    pub out: PathBuf,

    /// Seed of the Monte Carlo ensemble (overrides `ensemble.seed`).
    #[arg(long, global = true, env = "KERR_ECHO_SEED")]
    pub seed: Option<u64>,

    /// Write into a non-empty output directory.
    #[arg(long, global = true, env = "KERR_ECHO_FORCE")]
    pub force: bool,

    /// Allow master-equation runs with a Fock cutoff above 64.
    #[arg(long, global = true, env = "KERR_ECHO_LONG")]
    pub long: bool,

    /// Override a scenario value, e.g. `--set pulse.g0=0.02`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "KERR_ECHO_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Monte Carlo ensemble: mean position, echoes and phase-space snapshots.
    ClassicalEnsemble,
    /// Fock-space evolution of a coherent state, free and kicked.
    QuantumEvolve,
    /// Fock-space evolution of a cat state, free and kicked.
    CatEvolve,
    /// First-echo amplitudes of kicked cat states over (theta, N+).
    EchoSweep,
    /// Master-equation evolution with damping, free and kicked.
    LindbladEvolve,
    /// Fractional-revival decompositions and Gauss-sum tables.
    RevivalDecompose,
    /// Compare every engine with its closed-form reference.
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ClassicalEnsemble => "classical-ensemble",
            Command::QuantumEvolve => "quantum-evolve",
            Command::CatEvolve => "cat-evolve",
            Command::EchoSweep => "echo-sweep",
            Command::LindbladEvolve => "lindblad-evolve",
            Command::RevivalDecompose => "revival-decompose",
            Command::OracleCheck => "oracle-check",
        }
    }
}
