use std::process::ExitCode;

use clap::Parser;
use tspca::Cli;

fn main() -> ExitCode {
    match tspca::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
