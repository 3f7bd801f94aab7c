mod args;
mod commands;
mod config;
mod error;
mod runlog;

use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use crate::args::Cli;
use crate::error::EXIT_VALIDATION;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let echo = if cli.command.common().verbose {
        LevelFilter::Debug
    } else {
        LevelFilter::Info
    };
    runlog::init(echo);
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
