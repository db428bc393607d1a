//! `pqsys`: classify, evaluate, realize and compare passive systems stored
//! as JSON files.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 when the
//! command line or an input file cannot be used.

mod commands;
mod inputs;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Function};
use inputs::{parse_complex, parse_grid, parse_tol, Grid};
use pqsys::{Tolerances, C64};

const DEFAULT_SEED: u64 = 20240101;

#[derive(Parser)]
#[command(name = "pqsys", version, about = "Passive quasi-selfadjoint systems toolkit")]
struct Cli {
    /// Override a tolerance (`rank_tol`, `eq_tol`, `psd_tol`, `grid_tol`).
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol, global = true)]
    tol: Vec<(String, f64)>,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,

    /// Write the produced artifact here instead of embedding it in the report.
    #[arg(long, value_name = "FILE", global = true)]
    out: Option<PathBuf>,

    /// Also write the JSON report to this file.
    #[arg(long, value_name = "FILE", global = true)]
    report: Option<PathBuf>,

    /// Print only the JSON report.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class flags, subspace dimensions and stability of a system.
    Classify { system: PathBuf },
    /// Sample the transfer, characteristic or Q-function.
    Eval {
        system: PathBuf,
        #[arg(long, value_enum, default_value = "theta")]
        function: Function,
        /// Evaluation point `re,im`; may be repeated.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Vec<C64>,
        /// `circle:N[:r]` or `disk:N[:r]`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
    },
    /// Build a minimal pqs system from spectral data.
    Realize { measure: PathBuf },
    /// Jacobi realization of a scalar system or spectral data.
    Jacobi {
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
    },
    /// Conservative bi-inner dilation of a pqs system.
    Dilate { system: PathBuf },
    /// Unitary similarity between two minimal pqs systems.
    Similar {
        first: PathBuf,
        second: PathBuf,
        /// Coupling matrix `S` with `C = S B*`.
        #[arg(long = "S", value_name = "FILE")]
        s: Option<PathBuf>,
    },
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pqsys: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut tol = Tolerances::default();
    for (name, value) in &cli.tol {
        if let Err(e) = tol.set(name, *value) {
            return input_error(e);
        }
    }
    let ctx = Context { tol, seed: cli.seed, out: cli.out.clone() };
    let outcome = match &cli.command {
        Command::Classify { system } => commands::classify(&ctx, system),
        Command::Eval { system, function, lambda, grid } => commands::eval(&ctx, system, *function, lambda, grid.as_ref()),
        Command::Realize { measure } => commands::realize(&ctx, measure),
        Command::Jacobi { input, max_len } => commands::jacobi(&ctx, input, *max_len),
        Command::Dilate { system } => commands::dilate(&ctx, system),
        Command::Similar { first, second, s } => commands::similar(&ctx, first, second, s.as_deref()),
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };

    let machine = report.to_json();
    let text = if cli.json { format!("{machine}\n") } else { format!("{}{machine}\n", report.human()) };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, machine + "\n") {
            return input_error(format!("{}: {e}", path.display()));
        }
    }
    // Classification only reports; its flags are not pass/fail gates.
    if matches!(cli.command, Command::Classify { .. }) || report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
