//! Run configuration file: a JSON document holding the simulation settings
//! plus the trace source.

use std::path::{Path, PathBuf};

use predskip::sim::SimConfig;
use predskip::trace::{generate, load_trace, SyntheticSpec, TraceSeries};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    /// CSV trace; a relative path is resolved against the config file.
    File {
        path: PathBuf,
        #[serde(default)]
        sensor_id: u32,
        #[serde(default = "one_hour")]
        period: f64,
    },
    Synthetic(SyntheticSpec),
}

fn field_path<T: serde::de::DeserializeOwned>(
    prefix: &str,
    value: serde_json::Value,
) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            prefix.trim_end_matches('.').to_string()
        } else {
            format!("{prefix}{path}")
        };
        let what = e.into_inner();
        if path.is_empty() {
            CliError::config(what.to_string())
        } else {
            CliError::config(format!("field `{path}`: {what}"))
        }
    })
}

fn one_hour() -> f64 {
    3600.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trace: TraceSource,
    #[serde(flatten)]
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("invalid JSON: {e}")))?;
        let trace = doc
            .remove("trace")
            .ok_or_else(|| CliError::config("field `trace`: missing"))?;
        let trace: TraceSource = field_path("trace.", trace)?;
        let sim: SimConfig = field_path("", serde_json::Value::Object(doc))?;
        sim.validate()?;
        if let TraceSource::Synthetic(spec) = &trace {
            spec.validate()?;
        }
        Ok(Self { trace, sim })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let TraceSource::File { path: trace, .. } = &mut cfg.trace {
            if trace.is_relative() {
                if let Some(dir) = path.parent() {
                    *trace = dir.join(&*trace);
                }
            }
        }
        Ok(cfg)
    }

    pub fn load_trace(&self) -> Result<TraceSeries, CliError> {
        let trace = match &self.trace {
            TraceSource::File {
                path,
                sensor_id,
                period,
            } => load_trace(path, *sensor_id, *period)?,
            TraceSource::Synthetic(spec) => generate(spec)?,
        };
        if trace.len() < self.sim.rounds_needed() {
            return Err(CliError::config(format!(
                "field `horizon`: train_len + horizon = {} exceeds trace length {}",
                self.sim.rounds_needed(),
                trace.len()
            )));
        }
        Ok(trace)
    }
}
