//! `walklab`: command-line front end for the experiments.

mod commands;
mod params;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "walklab", version, about = "Random walks on the torus-by-line skew product")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; the built-in reference model when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Root directory for run outputs.
    #[arg(long, env = "WALKLAB_OUT", default_value = "runs")]
    out: PathBuf,
    /// Replica count (meaning depends on the command).
    #[arg(long)]
    replicas: Option<u64>,
    /// Override `key=value`; keys other than model fields go to `[params]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory.
    Simulate(Common),
    /// Exact orbit of a rational point and its block components.
    Orbit(Common),
    /// Lyapunov exponent and flag density convergence.
    Lyapunov(Common),
    /// Growth and contraction sweep of Cartan projections.
    CartanCheck(Common),
    /// Return-time tail of the real coordinate.
    Tail(Common),
    /// Search for a drift certificate.
    Certify(Common),
    /// Exact one-dimensional local limit check.
    Llt1d(Common),
    /// Joint local limit estimate.
    Jointllt(Common),
    /// Conditioned vs unconditioned law of angles.
    Angles(Common),
    /// Drift demonstration along fibers.
    Drift(Common),
    /// Cell masses of conditioned fiber pieces.
    Equidist(Common),
    /// Weyl sums, real-marginal invariance and atoms of a trajectory.
    Weyl(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::Simulate(c) => ("simulate", c),
            Command::Orbit(c) => ("orbit", c),
            Command::Lyapunov(c) => ("lyapunov", c),
            Command::CartanCheck(c) => ("cartan-check", c),
            Command::Tail(c) => ("tail", c),
            Command::Certify(c) => ("certify", c),
            Command::Llt1d(c) => ("llt1d", c),
            Command::Jointllt(c) => ("jointllt", c),
            Command::Angles(c) => ("angles", c),
            Command::Drift(c) => ("drift", c),
            Command::Equidist(c) => ("equidist", c),
            Command::Weyl(c) => ("weyl", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.split();
    debug_assert!(commands::SUBCOMMANDS.contains(&name));
    let mut overrides = common.set.clone();
    if let Some(r) = common.replicas {
        overrides.push(format!("replicas={r}"));
    }
    let result = params::load_table(common.config.as_deref(), &overrides).and_then(|table| {
        run::execute(run::Invocation { subcommand: name.to_string(), table, seed: common.seed, out: common.out })
    });
    match result {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("walklab {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
