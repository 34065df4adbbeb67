//! Ground-truth measurement series.
//!
//! A [`TraceSeries`] is what a simulated sensor "measures": one real value per
//! request period. Traces come either from a CSV file (`t,value` rows) or from
//! [`generate`], which produces deterministic periodic test signals.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub sensor_id: u32,
    /// Request interval in seconds.
    pub period: f64,
    values: Vec<f64>,
}

impl TraceSeries {
    pub fn new(sensor_id: u32, period: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "period must be positive, got {period}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: i + 1,
                reason: "non-finite value".into(),
            });
        }
        Ok(Self {
            sensor_id,
            period,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measurement at 1-based sample index `t`.
    pub fn at(&self, t: usize) -> Option<f64> {
        t.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Sine,
    SinePlusTrend,
    Square,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: Waveform,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_period_samples")]
    pub period_samples: usize,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub noise_std: f64,
    pub length: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_period_samples() -> usize {
    24
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::InvalidSpec("length must be >= 1".into()));
        }
        if self.period_samples == 0 {
            return Err(Error::InvalidSpec("period_samples must be >= 1".into()));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::InvalidSpec("noise_std must be finite and >= 0".into()));
        }
        if !self.amplitude.is_finite() || !self.offset.is_finite() {
            return Err(Error::InvalidSpec("amplitude and offset must be finite".into()));
        }
        Ok(())
    }
}

/// Unit sine at phase `k / period`, exact at quarter-period points.
fn unit_sine(k: usize, period: usize) -> f64 {
    if (4 * k).is_multiple_of(period) {
        return [0.0, 1.0, 0.0, -1.0][4 * k / period];
    }
    (2.0 * PI * k as f64 / period as f64).sin()
}

/// Synthesizes a trace. The phase is reduced modulo `period_samples` before
/// evaluation, so noiseless sines and squares repeat bit-for-bit.
///
/// `sine_plus_trend` adds a linear drift of one tenth of the amplitude per
/// period. Noise is Gaussian, drawn in sample order from ChaCha8 seeded with
/// `seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<TraceSeries> {
    spec.validate()?;
    let p = spec.period_samples;
    let mut noise = if spec.noise_std > 0.0 {
        let normal = Normal::new(0.0, spec.noise_std)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Some((ChaCha8Rng::seed_from_u64(spec.seed), normal))
    } else {
        None
    };

    let values = (0..spec.length)
        .map(|i| {
            let k = i % p;
            let shape = match spec.kind {
                Waveform::Sine => unit_sine(k, p),
                Waveform::SinePlusTrend => unit_sine(k, p) + 0.1 * i as f64 / p as f64,
                Waveform::Square => {
                    if 2 * k < p {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Waveform::Constant => 0.0,
            };
            let mut v = spec.offset + spec.amplitude * shape;
            if let Some((rng, normal)) = noise.as_mut() {
                v += normal.sample(rng);
            }
            v
        })
        .collect();
    TraceSeries::new(0, 1.0, values)
}

/// Loads a `t,value` CSV trace. The index column is informational; values are
/// taken in file order. An optional header line is recognised by a
/// non-numeric first field. Blank lines are only tolerated at the end.
pub fn load_trace(path: &Path, sensor_id: u32, period: f64) -> Result<TraceSeries> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_trace(&text, sensor_id, period)
}

pub fn parse_trace(text: &str, sensor_id: u32, period: f64) -> Result<TraceSeries> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let last = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map_or(0, |i| i + 1);

    let mut values = Vec::with_capacity(last);
    for (i, raw) in lines[..last].iter().enumerate() {
        let line = i + 1;
        let err = |reason: &str| Error::Parse {
            line,
            reason: reason.to_string(),
        };
        let mut fields = raw.split(',').map(str::trim);
        let index = fields.next().unwrap_or("");
        let value = fields.next();
        if fields.next().is_some() {
            return Err(err("expected exactly two fields"));
        }
        if line == 1 && index.parse::<f64>().is_err() {
            continue;
        }
        if index.parse::<f64>().is_err() {
            return Err(err("unparseable index field"));
        }
        let value = value.ok_or_else(|| err("missing value field"))?;
        match value.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => return Err(err("unparseable value field")),
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyTrace);
    }
    TraceSeries::new(sensor_id, period, values)
}

/// Writes the trace as CSV with a `t,value` header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn save_trace(trace: &TraceSeries, path: &Path) -> Result<()> {
    fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

pub fn trace_to_csv(trace: &TraceSeries) -> String {
    let mut out = String::from("t,value\n");
    for (i, v) in trace.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", i + 1, v);
    }
    out
}
