use clap::Parser;

use obstruct_cli::args::Cli;
use obstruct_cli::{init_threads, run_and_write, CliError, INPUT_ERROR_EXIT};

fn run() -> Result<i32, CliError> {
    init_threads()?;
    let (config, save) = Cli::parse().into_config()?;
    if let Some(path) = save {
        std::fs::write(&path, config.to_json()).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(run_and_write(&config)?.exit_code())
}

fn main() {
    let code = run().unwrap_or_else(|e| {
        eprintln!("obstruct: {e}");
        INPUT_ERROR_EXIT
    });
    std::process::exit(code);
}
