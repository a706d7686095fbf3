use std::io;
use std::process::ExitCode;

use clap::Parser;

use gronwall_cli::{run, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    let stdout = io::stdout();
    let code = match run(&args, &mut stdout.lock()) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
