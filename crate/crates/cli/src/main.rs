use std::process::ExitCode;

use traffic_multiscale_cli::{execute, parse_args, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os()).and_then(|cmd| execute(&cmd));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Display(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("msim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
