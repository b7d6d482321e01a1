mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::CliError;
use config::{merge, read_config, resolve, thread_count, Cli, Settings, UsageError};

fn settings(cli: Cli) -> Result<(config::CommandKind, Settings, Option<usize>), UsageError> {
    let threads = thread_count(cli.threads)?;
    let (kind, flags) = cli.command.split();
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => Settings::default(),
    };
    Ok((kind, resolve(kind, merge(file, flags))?, threads))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, settings, threads) = match settings(cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(kind, &settings) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical { error, message, details }) => {
            eprintln!("{}", output::diagnostic(kind, &settings, &error, &message, details));
            ExitCode::from(1)
        }
    }
}
