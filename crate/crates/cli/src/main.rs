// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! `om-entangle`: runs the simulator pipelines from a TOML configuration and
//! writes CSV tables plus JSON summaries into an output directory.
//!
//! Exit status: 0 success, 2 configuration or I/O error, 3 numerical
//! failure, 4 no feasible candidate.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use om_entangle::config::RunConfig;
use om_entangle::propagator::TrotterConfig;
use om_entangle::Error;

#[derive(Debug, Parser)]
#[command(name = "om-entangle", version, about = "Entanglement of two remote microwave cavities")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "OM_ENTANGLE_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed of the random searches.
    #[arg(long, global = true, env = "OM_ENTANGLE_SEED")]
    seed: Option<u64>,

    /// Number of search trials.
    #[arg(long, global = true, env = "OM_ENTANGLE_TRIALS")]
    trials: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "OM_ENTANGLE_WORKERS")]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "OM_ENTANGLE_OUT", default_value = "out")]
    out: PathBuf,

    /// Trotter sub-steps per output interval.
    #[arg(long = "trotter-n", global = true, env = "OM_ENTANGLE_TROTTER_N")]
    trotter_n: Option<usize>,

    /// Trapezoid panels per time integral.
    #[arg(long = "trap-n", global = true, env = "OM_ENTANGLE_TRAP_N")]
    trap_n: Option<usize>,

    /// Number of output times.
    #[arg(long, global = true, env = "OM_ENTANGLE_POINTS")]
    points: Option<usize>,

    /// Convergence-grade discretization (1600 sub-steps, 10 panels).
    #[arg(long, global = true, env = "OM_ENTANGLE_CONVERGENCE")]
    convergence: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the reference parameter file.
    DeriveParams {
        /// Unenhanced laser coupling, rad/s.
        #[arg(long)]
        g0: Option<f64>,
    },
    /// RH metric over a grid of constant optical couplings.
    StabilityScan,
    /// Time series of the configured drive schedule.
    Simulate,
    /// Filtered entanglement spectrum of the configured constant drives.
    Spectral,
    /// Random search over trapezoid pulse sets.
    SearchPulses,
    /// Random search over constant drives, scored in frequency.
    SearchSpectral,
    /// Re-evaluate a candidate over mechanical-bath occupations.
    ThermalSweep {
        /// Winner record to sweep instead of the configured drives.
        #[arg(long)]
        winner: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::DeriveParams { .. } => "derive-params",
            Command::StabilityScan => "stability-scan",
            Command::Simulate => "simulate",
            Command::Spectral => "spectral",
            Command::SearchPulses => "search-pulses",
            Command::SearchSpectral => "search-spectral",
            Command::ThermalSweep { .. } => "thermal-sweep",
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => 2,
        Error::Numeric(_) | Error::IndexOutOfRange { .. } => 3,
        Error::NoFeasibleCandidate { .. } => 4,
    }
}

/// The configuration file with command-line overrides applied.
fn resolve_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.convergence {
        cfg.trotter = TrotterConfig::convergence();
    }
    if let Some(n) = cli.trotter_n {
        cfg.trotter.n_trotter = n;
    }
    if let Some(n) = cli.trap_n {
        cfg.trotter.n_trap = n;
    }
    if let Some(n) = cli.points {
        cfg.time.n_points = n;
    }
    if let Some(s) = cli.seed {
        cfg.search.master_seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.search.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = resolve_config(cli)?;
    let ctx = commands::Context::new(cli.command.name(), cfg, cli.out.clone(), rayon::current_num_threads())?;
    match &cli.command {
        Command::DeriveParams { g0 } => commands::derive_params(ctx, *g0),
        Command::StabilityScan => commands::stability_scan(ctx),
        Command::Simulate => commands::simulate(ctx),
        Command::Spectral => commands::spectral(ctx),
        Command::SearchPulses => commands::search_pulses(ctx),
        Command::SearchSpectral => commands::search_spectral(ctx),
        Command::ThermalSweep { winner } => commands::thermal_sweep(ctx, winner.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("om-entangle {}: {e}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
