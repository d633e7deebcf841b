//! `geoconflict` batch front end.
//!
//! Exit status: 0 on success, 1 on any usage, config or data error, 2 when
//! `detect` succeeded but found internal-consistency violations.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Outcome;

#[derive(Debug, Parser)]
#[command(name = "geoconflict", about = "Detect conflicts when merging geospatial datasets")]
struct Cli {
    /// Worker threads for detection and tuning (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Match every new object against the existing dataset.
    Detect { config: PathBuf },
    /// Sweep the search radius against ground truth.
    Tune {
        config: PathBuf,
        /// Comma-separated radii in meters; overrides `radii` in the config.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Score the ranking method and the containment baseline on ground truth.
    Eval {
        #[arg(required_unless_present = "paper_counts")]
        config: Option<PathBuf>,
        /// Ground truth CSV; overrides `truth` in the config.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Recompute the published tables from their raw counts, no detection.
        #[arg(long, conflicts_with_all = ["config", "truth"])]
        paper_counts: bool,
        /// Where `--paper-counts` writes its tables; stdout only when absent.
        #[arg(long, requires = "paper_counts")]
        output_dir: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark from a spec file.
    Synth { spec: PathBuf },
    /// Print version information.
    Version,
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Detect { config } => commands::cmd_detect(&config),
        Command::Tune { config, radii } => commands::cmd_tune(&config, radii),
        Command::Eval {
            paper_counts: true,
            output_dir,
            ..
        } => commands::cmd_eval_paper_counts(output_dir.as_deref()),
        Command::Eval { config, truth, .. } => commands::cmd_eval(&config.expect("required by clap"), truth.as_deref()),
        Command::Synth { spec } => commands::cmd_synth(&spec),
        Command::Version => {
            commands::emit(&format!(
                "geoconflict {} (synthetic catalog v{})\n",
                env!("CARGO_PKG_VERSION"),
                geoconflict::eval::CATALOG_VERSION
            ));
            Ok(Outcome::Clean)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::ConsistencyWarnings) => {
            eprintln!("warning: internal consistency violations found, see summary.txt");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
