use std::process::ExitCode;

use alf_entropy::cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            match &report.written_to {
                Some(path) => eprintln!("wrote {}", path.display()),
                None => print!("{}", report.rendered),
            }
            if report.table.all_pass() {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
