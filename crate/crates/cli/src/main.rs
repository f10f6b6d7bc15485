//! `tidytable` — generate preference data, train the tidiness scorer, and
//! tidy scenes with a planner plus score-based grounding.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::FileConfig;

#[derive(Parser)]
#[command(name = "tidytable", version, about = "Tabletop tidying engine")]
struct Cli {
    /// JSON config file merged under command-line flags (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic preference dataset from random walks.
    GenData(commands::gen_data::Args),
    /// Train the tidiness scorer on a dataset.
    Train(commands::train::Args),
    /// Evaluate a checkpoint on a dataset's held-out trajectories.
    Eval(commands::eval::Args),
    /// Plan and execute a tidying episode on a scene.
    Tidy(commands::tidy::Args),
    /// Render a scene file to a PPM image.
    Render(commands::render::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = FileConfig::load(cli.config.as_deref()).and_then(|file_config| {
        match cli.command {
            Command::GenData(args) => commands::gen_data::run(args),
            Command::Train(args) => commands::train::run(args, &file_config),
            Command::Eval(args) => commands::eval::run(args, &file_config),
            Command::Tidy(args) => commands::tidy::run(args, &file_config),
            Command::Render(args) => commands::render::run(args),
        }
    });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
