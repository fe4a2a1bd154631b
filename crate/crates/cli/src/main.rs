//! `ermakov`: solve, verify and export the Airy-type similarity solution of
//! `u_t + u_xxx + λ(t+a)⁻²u⁻⁴u_x = 0`, its Stefan problem and their
//! reciprocal and modulated images.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{PlotKind, RhoArgs};
use crate::config::RunArgs;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ermakov", version, about = "Exact similarity solutions of a modulated third-order evolution equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print Ai, Ai', Bi, Bi' and the Wronskian defect for each z as CSV.
    Airy {
        #[arg(required = true, allow_negative_numbers = true)]
        z: Vec<f64>,
    },
    /// Evaluate the solution on the grid and write solution, problem and residual files.
    Solve(RunArgs),
    /// Find gamma from P_m and print the resulting problem.
    Inverse(RunArgs),
    /// Build the reciprocal image and verify its compatibility equation.
    Reciprocal(RunArgs),
    /// Push the solution through a temporal modulation and verify the round trip.
    Modulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        rho: RhoArgs,
    },
    /// Render a CSV written by another subcommand as SVG.
    Plot {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "profile")]
        kind: PlotKind,
        /// Output file; defaults to the input with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Column to plot (profile: u or u_star; heatmap: residual).
        #[arg(long)]
        column: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Airy { z } => print!("{}", commands::cmd_airy(&z)?),
        Command::Solve(args) => commands::cmd_solve(&args.resolve()?)?,
        Command::Inverse(args) => print!("{}", commands::cmd_inverse(&args.resolve()?)?),
        Command::Reciprocal(args) => commands::cmd_reciprocal(&args.resolve()?)?,
        Command::Modulate { run, rho } => {
            let cfg = run.resolve()?;
            let family = rho.family(&cfg.modulation)?;
            commands::cmd_modulate(&cfg, family)?
        }
        Command::Plot { input, kind, out, column } => {
            let path = commands::cmd_plot(&input, kind, out, column)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
