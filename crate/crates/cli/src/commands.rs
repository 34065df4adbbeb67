use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use predskip::forecast::{evaluate, predict_closed_loop};
use predskip::rma::rma_schedule;
use predskip::sim::{run_experiment, run_training_phase, SimConfig, SUMMARY_CSV_HEADER};
use predskip::trace::{generate, trace_to_csv, SyntheticSpec};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{Cli, Command, Format, GenTraceArgs};

pub const SWEEP_PARAMS: [&str; 4] = ["alpha", "tr1", "tr2", "resolution"];

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { format } => cmd_run(cli, format),
        Command::Schedule { tr1, tr2, horizon } => {
            print!("{}", cmd_schedule(*tr1, *tr2, *horizon)?);
            Ok(())
        }
        Command::Sweep { param, values } => cmd_sweep(cli, param, values),
        Command::GenTrace(args) => cmd_gen_trace(cli, args),
        Command::Train => cmd_train(cli),
    }
}

/// Output directory that refuses to clobber files unless forced.
struct OutDir {
    dir: PathBuf,
    force: bool,
}

impl OutDir {
    fn create(dir: &Path, force: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            force,
        })
    }

    /// Fails before anything is written if any target exists.
    fn check(&self, names: &[&str]) -> Result<(), CliError> {
        for name in names {
            let path = self.dir.join(name);
            if path.exists() && !self.force {
                return Err(CliError::io(format!(
                    "refusing to overwrite {} (pass --force)",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("field `--config`: required for this command"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    Ok(cfg)
}

fn cmd_run(cli: &Cli, formats: &[Format]) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let out_dir = cli
        .out
        .as_ref()
        .ok_or_else(|| CliError::config("field `--out`: required for run"))?;
    let trace = cfg.load_trace()?;

    let mut files: Vec<&str> = Vec::new();
    if formats.contains(&Format::Json) {
        files.push("report.json");
    }
    if formats.contains(&Format::Csv) {
        files.extend(["rounds.csv", "summary.csv"]);
    }
    let out = OutDir::create(out_dir, cli.force)?;
    out.check(&files)?;

    let report = run_experiment(&trace, &cfg.sim)?;
    if formats.contains(&Format::Json) {
        out.write("report.json", &report.to_json())?;
    }
    if formats.contains(&Format::Csv) {
        out.write("rounds.csv", &report.rounds_csv())?;
        out.write("summary.csv", &report.summary_csv())?;
    }
    print!("{}", report.summary_csv());
    Ok(())
}

/// Contacted rounds of an all-silent run, one index per line.
pub fn cmd_schedule(tr1: u64, tr2: u64, horizon: usize) -> Result<String, CliError> {
    if horizon == 0 {
        return Err(CliError::config("field `horizon`: must be >= 1"));
    }
    let contacts = rma_schedule(tr1, tr2, horizon, &[])?;
    let mut out = String::new();
    for c in contacts {
        let _ = writeln!(out, "{c}");
    }
    Ok(out)
}

fn apply_param(base: &SimConfig, param: &str, value: f64) -> Result<SimConfig, CliError> {
    let mut cfg = base.clone();
    let integral = |v: f64| -> Result<u64, CliError> {
        if v.fract() == 0.0 && v >= 0.0 && v <= u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(CliError::config(format!(
                "field `{param}`: sweep value {v} is not a non-negative integer"
            )))
        }
    };
    match param {
        "alpha" => cfg.alpha = value,
        "tr1" => cfg.tr1 = integral(value)?,
        "tr2" => cfg.tr2 = integral(value)?,
        "resolution" => cfg.quant.resolution = value,
        _ => {
            return Err(CliError::config(format!(
                "field `param`: unknown sweep parameter `{param}` (expected one of {})",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_sweep(cli: &Cli, param: &str, values: &[f64]) -> Result<(), CliError> {
    if !SWEEP_PARAMS.contains(&param) {
        return Err(CliError::config(format!(
            "field `param`: unknown sweep parameter `{param}` (expected one of {})",
            SWEEP_PARAMS.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::config("field `values`: at least one value is required"));
    }
    let base = load_config(cli)?;
    let configs = values
        .iter()
        .map(|&v| apply_param(&base.sim, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    let out = match &cli.out {
        Some(dir) => {
            let out = OutDir::create(dir, cli.force)?;
            out.check(&["sweep.csv"])?;
            Some(out)
        }
        None => None,
    };
    let trace = base.load_trace()?;

    let reports = configs
        .par_iter()
        .map(|cfg| run_experiment(&trace, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = format!("param,value,{SUMMARY_CSV_HEADER}\n");
    for (value, report) in values.iter().zip(&reports) {
        let _ = writeln!(csv, "{param},{value},{}", report.summary_row());
    }
    if let Some(out) = out {
        out.write("sweep.csv", &csv)?;
    }
    print!("{csv}");
    Ok(())
}

fn cmd_gen_trace(cli: &Cli, args: &GenTraceArgs) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        kind: args.kind.into(),
        amplitude: args.amplitude,
        period_samples: args.period_samples,
        offset: args.offset,
        noise_std: args.noise_std,
        length: args.length,
        seed: cli.seed.unwrap_or(0),
    };
    let csv = trace_to_csv(&generate(&spec)?);
    match &cli.out {
        Some(dir) => {
            let out = OutDir::create(dir, cli.force)?;
            out.check(&["trace.csv"])?;
            out.write("trace.csv", &csv)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_train(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let sim = &cfg.sim;
    let out = match &cli.out {
        Some(dir) => {
            let out = OutDir::create(dir, cli.force)?;
            out.check(&["model.json", "forecast.json", "forecast.csv"])?;
            Some(out)
        }
        None => None,
    };
    let trace = cfg.load_trace()?;
    let training = run_training_phase(&trace, sim.train_len, sim.alpha, &sim.quant, &sim.energy)?;
    let fitted = sim.forecaster.fit(&training.collected, sim.seed)?;
    let history: &[f64] = if training.collected.is_empty() {
        &[0.0]
    } else {
        &training.collected
    };
    let predictions = predict_closed_loop(&fitted, history, sim.horizon)?;
    let actuals = &trace.values()[sim.train_len..sim.train_len + sim.horizon];
    let report = evaluate(&predictions, actuals)?;
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";

    if let Some(out) = out {
        if let Some(model) = fitted.model() {
            out.write("model.json", &model.to_json())?;
        }
        out.write("forecast.json", &report_json)?;
        let mut csv = String::from("t,prediction,actual\n");
        for (i, (p, a)) in predictions.iter().zip(actuals).enumerate() {
            let _ = writeln!(csv, "{},{p},{a}", sim.train_len + i + 1);
        }
        out.write("forecast.csv", &csv)?;
    }
    print!("{report_json}");
    Ok(())
}
