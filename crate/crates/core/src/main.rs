use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qdede::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("qdede: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
