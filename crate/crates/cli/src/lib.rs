//! Command-line front end: scenario generation, single-window DMD, mrDMD
//! trees and ground-truth comparison. Every command is also callable as a
//! library function returning a typed report.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod manifest;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use commands::{cmd_compare, cmd_dmd, cmd_generate, cmd_mrdmd};
pub use error::{CliError, CliResult};

/// Result of a whole invocation.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

pub fn execute(cli: &Cli) -> CliResult<String> {
    use args::Command;
    Ok(match &cli.command {
        Command::Generate(a) => cmd_generate(a)?.message,
        Command::Dmd(a) => cmd_dmd(a)?.message,
        Command::Mrdmd(a) => cmd_mrdmd(a)?.message,
        Command::Compare(a) => cmd_compare(a)?.message,
    })
}
