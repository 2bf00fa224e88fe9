//! `equitile`: equitable partitions, unitary block triangularization and
//! deviation analysis from the command line.
//!
//! Reports go to stdout as JSON, matrices to `--out-dir` as Matrix Market
//! files. Exit codes: 0 success, 2 input or parse error, 3 negative result
//! (not equitable, rank deficient), 4 numerical failure.

mod commands;
mod error;
mod inputs;
mod matrix_market;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{CheckArgs, RectArgs, RefineArgs, SplitArgs, TransformArgs};
use crate::error::exit;

#[derive(Parser, Debug)]
#[command(name = "equitile", version, about = "Equitable partitions and unitary block triangularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coarsest front equitable refinement of a partition.
    Refine(RefineArgs),
    /// Tests front/rear equitability; exit code 3 when not equitable.
    Check(CheckArgs),
    /// Block triangularization; writes the requested blocks and a run report.
    Transform(TransformArgs),
    /// Spectra of the diagonal blocks and the Weyl bound for Hermitian input.
    Split(SplitArgs),
    /// Two-sided transform of a rectangular matrix by block SVDs.
    Rect(RectArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INPUT } else { exit::SUCCESS });
        }
    };
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let result = match &cli.command {
        Command::Refine(a) => commands::refine(a),
        Command::Check(a) => commands::check(a),
        Command::Transform(a) => commands::transform(a, echo),
        Command::Split(a) => commands::split(a),
        Command::Rect(a) => commands::rect(a, echo),
    };
    match result {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize");
            // a closed pipe (e.g. `| head`) is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("equitile: {e}");
            ExitCode::from(e.code)
        }
    }
}
