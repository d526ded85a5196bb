use std::process::ExitCode;

use clap::Parser;
use kvldp_harness::cli::{execute, Cli};

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kvldp: {} error: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
