//! `chemstab`: batch front-end for the chemotaxis-competition stability
//! toolkit.
//!
//! Subcommands: `check` (region membership + hypothesis checks), `atlas`
//! (membership CSV over a rectangle), `simulate` (PDE run), `energy`
//! (energy functional over a prior run), `rate` (decay-rate fits),
//! `compare-regions` (strict-inclusion witness). Exit codes: 0 success /
//! in-region, 1 out-of-region or solver failure, 2 config or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use chemstab_core::Error;
use clap::{Parser, Subcommand};

mod commands;
mod manifest;
mod output;

#[derive(Parser)]
#[command(
    name = "chemstab",
    version,
    about = "Stability toolkit for a two-species chemotaxis-competition system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Region membership, witness pair, and hypothesis checks for a config.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Optional output directory for the manifest and report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the membership predicates over an (s, t) rectangle.
    Atlas {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rectangle as s0,s1,t0,t1.
        #[arg(long)]
        rect: String,
        /// Points per axis.
        #[arg(long)]
        res: usize,
    },
    /// Run the finite-difference solver.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the energy functional over a prior simulation directory.
    Energy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Discretization allowance for the decay inequality.
        #[arg(long, default_value_t = 0.1)]
        slack: f64,
    },
    /// Fit exponential decay rates to a prior simulation's diagnostics.
    Rate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit window as fractions of total time, e.g. 0.25,0.9.
        #[arg(long)]
        window: Option<String>,
        /// Certification threshold for the fitted rate.
        #[arg(long, default_value_t = 0.1)]
        threshold_ell: f64,
    },
    /// Show that the union region strictly contains the fixed-slope region.
    CompareRegions {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_rect(text: &str) -> Result<(f64, f64, f64, f64), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "--rect expects s0,s1,t0,t1 (got {text:?})"
        )));
    }
    let mut vals = [0.0_f64; 4];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("--rect component {p:?} is not a number")))?;
    }
    Ok((vals[0], vals[1], vals[2], vals[3]))
}

fn parse_window(text: &str) -> Result<(f64, f64), Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "--window expects a,b fractions (got {text:?})"
        )));
    }
    let a = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("--window component {:?} is not a number", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("--window component {:?} is not a number", parts[1])))?;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Config(format!(
            "--window fractions must satisfy 0 <= a < b <= 1, got ({a}, {b})"
        )));
    }
    Ok((a, b))
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Check { config, out } => commands::cmd_check(&config, out.as_deref()),
        Command::Atlas {
            config,
            out,
            rect,
            res,
        } => commands::cmd_atlas(&config, &out, parse_rect(&rect)?, res),
        Command::Simulate { config, out } => commands::cmd_simulate(&config, &out),
        Command::Energy { config, out, slack } => commands::cmd_energy(&config, &out, slack),
        Command::Rate {
            config,
            out,
            window,
            threshold_ell,
        } => {
            let frac = match window {
                Some(w) => parse_window(&w)?,
                None => chemstab_core::rate::DEFAULT_WINDOW_FRAC,
            };
            commands::cmd_rate(&config, &out, frac, threshold_ell)
        }
        Command::CompareRegions { config, out } => {
            commands::cmd_compare_regions(&config, out.as_deref())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidSeries(_) | Error::Io(_) => 2,
        Error::OutOfRegion { .. }
        | Error::Blowup { .. }
        | Error::CflViolation { .. }
        | Error::LinearSolve { .. }
        | Error::HypothesisNotSatisfied { .. }
        | Error::InconsistentWitness(_)
        | Error::NonpositiveField { .. } => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
