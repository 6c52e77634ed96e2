use std::process::ExitCode;

use isic_cli::args::{parse_args, ParseError};
use isic_cli::run::{execute, RunError};

fn main() -> ExitCode {
    let cfg = match parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(ParseError::Clap(e)) => {
            // clap exits 0 for --help/--version and 2 for usage errors.
            e.exit();
        }
        Err(ParseError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
