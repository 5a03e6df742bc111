use std::process::ExitCode;

use clap::Parser;

use rskcap_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match rskcap_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rskcap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
