//! Command-line front end: track sequences, score results, search cue
//! weights, simulate scenes and draw overlays.
//!
//! Exit codes: 0 success, 1 usage error, 2 missing or unreadable input,
//! 3 evaluation error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::Path;

use clap::{Parser, Subcommand};

pub mod config;
pub mod error;
pub mod eval;
pub mod gridsearch;
pub mod overlay;
pub mod sim;
pub mod track;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "roadtrack", version, about = "Online multi-object tracking for monocular road scenes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track one sequence and write KITTI-format results plus a timing log
    Track(track::TrackArgs),
    /// Score results against ground truth with CLEAR MOT metrics
    Eval(eval::EvalArgs),
    /// Choose cue weights by cross validation over sequences
    Gridsearch(gridsearch::GridArgs),
    /// Write synthetic sequences with ground truth
    Sim(sim::SimArgs),
    /// Draw per-frame SVG overlays and an id-count plot
    Overlay(overlay::OverlayArgs),
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::output(path, e))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Track(a) => track::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Gridsearch(a) => gridsearch::run(a),
        Command::Sim(a) => sim::run(a),
        Command::Overlay(a) => overlay::run(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
/// Failures are reported as one line on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
