use std::process::ExitCode;

use clap::Parser;
use kerr_cool_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match kerr_cool_cli::run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kerr-cool: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
