//! The `wirl` command-line tool: generate realizable datasets, learn weights
//! from them, verify the resulting traces and merge traces for plotting.

pub mod args;
pub mod commands;
pub mod exit;
pub mod io;

use std::ffi::OsString;

use clap::Parser;

use crate::args::{apply_config, Cli, Command};
use crate::exit::exit_code;

pub fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate(a) => commands::generate::run(a),
        Command::Learn(a) => commands::learn::run(a),
        Command::Verify(a) => commands::verify::run(a),
        Command::Report(a) => commands::report::run(a),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match apply_config(cli).and_then(dispatch) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
