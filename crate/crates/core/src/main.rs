use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use viscowave::cli::{self, exit_code_for, EXIT_OK};
use viscowave::output::verdict_text;
use viscowave::{Config, Error};

/// Viscoelastic wave simulator with memory, strong damping and dynamic boundary conditions.
#[derive(Parser)]
#[command(name = "viscowave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and classify the trajectory.
    Run {
        config: PathBuf,
        /// Directory for run.csv, thresholds.txt and verdict.txt.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every combination of the ranged (array-valued) keys.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        /// Concurrent runs; the VISCOWAVE_JOBS variable takes precedence.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Halve dt repeatedly and tabulate the energy-identity residual.
    Refine {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Optional file for the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the discrete Sobolev constant B.
    Sobolev { config: PathBuf },
}

fn load(path: &Path) -> Result<Config, Error> {
    Config::from_path(path)
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Run { config, out } => {
            let config = load(&config)?;
            let result = cli::run_experiment(&config, &out)?;
            print!("{}", verdict_text(&result));
            Ok(result.verdict.exit_code())
        }
        Command::Sweep { config, out, jobs } => {
            let jobs = cli::resolve_jobs(jobs)?;
            let summary = cli::sweep(&config, &out, jobs)?;
            print!("{}", summary.to_csv());
            Ok(EXIT_OK)
        }
        Command::Refine { config, levels, out } => {
            let config = load(&config)?;
            let table = cli::refine(&config, levels)?;
            let text = cli::refine_csv(&table);
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(path, text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sobolev { config } => {
            let config = load(&config)?;
            println!("{}", cli::sobolev(&config)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes count as configuration errors; help and version are not errors
            return ExitCode::from(if e.use_stderr() { cli::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
