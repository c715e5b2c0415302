use std::process::ExitCode;

use clap::Parser;
use robustfit::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("robustfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
