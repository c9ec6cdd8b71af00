use std::process::ExitCode;

use clap::Parser;
use stardamp::cli::{run, RunConfig};

fn main() -> ExitCode {
    match run(&RunConfig::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
