mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => commands::run_train(a),
        Command::Predict(a) => commands::run_predict(a),
        Command::Eval(a) => commands::run_eval(a),
        Command::Crossval(a) => commands::run_crossval(a),
        Command::Inspect(a) => commands::run_inspect(a),
        Command::Bench(a) => commands::run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
