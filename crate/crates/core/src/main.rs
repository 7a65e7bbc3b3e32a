use std::process::ExitCode;

use clap::Parser;
use exit_core::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code.into(),
        Err(err) => {
            eprintln!("error: {}", err.error);
            if let Some(hint) = &err.hint {
                eprintln!("hint: {hint}");
            }
            err.exit_code().into()
        }
    }
}
