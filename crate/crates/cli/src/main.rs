//! `predskip`: run prediction/skip experiments from the command line.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use predskip::trace::Waveform;

#[derive(Parser, Debug)]
#[command(name = "predskip", version, about = "Forecast-and-skip sensor network simulator")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one experiment and write report.json / rounds.csv / summary.csv.
    Run {
        #[arg(long, value_delimiter = ',', default_values = ["json", "csv"])]
        format: Vec<Format>,
    },
    /// Print contacted round indices for an all-silent run.
    Schedule { tr1: u64, tr2: u64, horizon: usize },
    /// Repeat the configured experiment over values of one parameter.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Write a synthetic trace as CSV.
    GenTrace(GenTraceArgs),
    /// Fit the configured forecaster and evaluate its closed-loop forecast.
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct GenTraceArgs {
    #[arg(long, value_enum, default_value = "sine")]
    pub kind: WaveformArg,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 24)]
    pub period_samples: usize,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub offset: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 400)]
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WaveformArg {
    Sine,
    SinePlusTrend,
    Square,
    Constant,
}

impl From<WaveformArg> for Waveform {
    fn from(w: WaveformArg) -> Self {
        match w {
            WaveformArg::Sine => Waveform::Sine,
            WaveformArg::SinePlusTrend => Waveform::SinePlusTrend,
            WaveformArg::Square => Waveform::Square,
            WaveformArg::Constant => Waveform::Constant,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[config]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
