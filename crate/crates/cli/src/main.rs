//! `discordlab`: simulate, measure, build datasets, train and report.

mod config;
mod dataset_cmd;
mod manifest;
mod measure;
mod report;
mod simulate;
mod table;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "discordlab", version, about = "Quantum correlations of two qubits in spin baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve an X state and write its trajectory.
    Simulate(simulate::SimulateArgs),
    /// Append correlation measures to a CSV of X states.
    Measure(measure::MeasureArgs),
    /// Generate, deduplicate, classify and split the feature corpus.
    Dataset(dataset_cmd::DatasetArgs),
    /// Train the network for one measurement class.
    Train(train::TrainArgs),
    /// Plot data and summaries for orderings, freezing and training curves.
    Report(report::ReportArgs),
}

/// Failure with its exit code: 1 for numeric or runtime problems, 2 for
/// usage and configuration problems.
#[derive(Debug)]
pub enum Failure {
    Numeric(anyhow::Error),
    Usage(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) => 1,
            Self::Usage(_) => 2,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self::Numeric(e.into())
    }
}

pub trait UsageExt<T> {
    fn usage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> UsageExt<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Measure(a) => measure::run(a),
        Command::Dataset(a) => dataset_cmd::run(a),
        Command::Train(a) => train::run(a),
        Command::Report(a) => report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Numeric(e) | Failure::Usage(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.exit_code())
        }
    }
}
