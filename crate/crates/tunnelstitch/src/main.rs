use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tunnelstitch::cli::Cli::parse();
    match tunnelstitch::cli::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
