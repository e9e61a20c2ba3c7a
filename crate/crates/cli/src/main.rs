// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch front end: derive TCL coefficients from a model file, grade
//! relaxation conditions, assemble the weak-coupling solution, compare
//! approximations against exact propagation, and reproduce the built-in
//! three-level example end to end.

mod commands;
mod emit;
mod modelfile;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "tclq",
    version,
    about = "Time-convolutionless master equations for projected open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate per-order TCL generators K_n(t) and inhomogeneities I_n(t)
    /// on a time grid and write them as a JSON document.
    Derive {
        /// Model file (JSON).
        model: PathBuf,
        /// Highest series order to evaluate (1..=6).
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Time grid as start:stop:count (linear).
        #[arg(long)]
        times: String,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grade the relaxation conditions. Exit code: 0 enhanced, 2 plain
    /// only, 3 neither.
    CheckRelaxation {
        model: PathBuf,
        /// Highest tuple order to sample (1..=3).
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Random ordered time tuples per order.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Weak-coupling limit data: K2(inf), I2(inf), the renormalization map,
    /// vanishing-limit residuals, and the renormalized initial state.
    Bvh {
        model: PathBuf,
        /// Initial state file (d x d complex matrix as [re, im] pairs).
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error-vs-exact table (CSV) for truncated TCL orders and the
    /// weak-coupling solutions.
    Compare {
        model: PathBuf,
        #[arg(long)]
        rho0: PathBuf,
        /// Comma-separated list of TCL truncation orders, e.g. 1,2.
        #[arg(long, default_value = "1,2")]
        orders: String,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in three-level pipeline and write a pass/fail
    /// checklist with residuals. Exit code 0 iff everything passes.
    ReproduceExample {
        /// Output directory for the checklist.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Derive { model, order, times, out } => {
            commands::cmd_derive(model, *order, times, out)
        }
        Command::CheckRelaxation { model, order, samples, seed, tol } => {
            commands::cmd_check_relaxation(model, *order, *samples, *seed, *tol)
        }
        Command::Bvh { model, rho0, out } => commands::cmd_bvh(model, rho0, out),
        Command::Compare { model, rho0, orders, tmax, points, out } => {
            commands::cmd_compare(model, rho0, orders, *tmax, *points, out)
        }
        Command::ReproduceExample { out, gamma, g, lambda } => {
            commands::cmd_reproduce_example(out, *gamma, *g, *lambda)
        }
    };
    ExitCode::from(outcome.exit_code as u8)
}
