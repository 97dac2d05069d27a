use std::process::ExitCode;

use clap::Parser;
use silab_cli::config::{load, Args};
use silab_cli::run_and_report;

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            println!("SUMMARY command=unknown status=ERROR checks_passed=0 checks_total=0 failed=config files=0");
            return ExitCode::from(2);
        }
    };
    ExitCode::from(run_and_report(&config) as u8)
}
