//! Base-station predictors.
//!
//! Every predictor answers the same question: given the stored series so far,
//! what is the next value? [`ForecastModel`] is the serializable model value
//! covering the four built-in kinds; the [`Forecaster`] trait lets the
//! simulator accept anything else (test doubles, closures) as well.
//!
//! When the history is shorter than a model's required depth, prediction
//! falls back to the last stored value.

mod ar;
mod metrics;
pub mod narx;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ar::fit_ar;
pub use metrics::{evaluate, ForecastReport, Histogram, HISTOGRAM_BINS};
pub use narx::train_narx;

/// Anything that can produce the next value of a series.
pub trait Forecaster {
    fn predict(&self, history: &[f64]) -> Result<f64>;
}

impl<F> Forecaster for F
where
    F: Fn(&[f64]) -> f64,
{
    fn predict(&self, history: &[f64]) -> Result<f64> {
        if history.is_empty() {
            return Err(Error::EmptyHistory);
        }
        Ok(self(history))
    }
}

/// Always predicts the same value. With `0.0` this turns every round into a
/// full-value transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantForecaster(pub f64);

impl Forecaster for ConstantForecaster {
    fn predict(&self, _history: &[f64]) -> Result<f64> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Persistence,
    SeasonalNaive,
    Ar,
    Narx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_units: usize,
    pub delay_taps: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_units: 50,
            delay_taps: 24,
            epochs: 1000,
            learning_rate: 0.01,
            l2_lambda: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let count = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::config(name, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        count("hidden_units", self.hidden_units)?;
        count("delay_taps", self.delay_taps)?;
        count("epochs", self.epochs)?;
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be > 0"));
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return Err(Error::config("l2_lambda", "must be >= 0"));
        }
        Ok(())
    }
}

/// A fitted (or parameter-free) predictor.
///
/// `parameters` layout by kind:
/// - persistence, seasonal naive: empty
/// - ar: `window_n` lag coefficients (most recent lag first), then intercept
/// - narx: see [`narx::Network`], followed by the standardization mean and scale
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub kind: ModelKind,
    pub window_n: usize,
    #[serde(default = "one")]
    pub season_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
    #[serde(default)]
    pub parameters: Vec<f64>,
}

fn one() -> usize {
    1
}

impl ForecastModel {
    pub fn persistence() -> Self {
        Self {
            kind: ModelKind::Persistence,
            window_n: 1,
            season_len: 1,
            config: None,
            parameters: Vec::new(),
        }
    }

    pub fn seasonal_naive(season_len: usize) -> Result<Self> {
        if season_len == 0 {
            return Err(Error::config("season_len", "must be >= 1"));
        }
        Ok(Self {
            kind: ModelKind::SeasonalNaive,
            window_n: season_len,
            season_len,
            config: None,
            parameters: Vec::new(),
        })
    }

    /// History depth below which the model falls back to persistence.
    pub fn required_depth(&self) -> usize {
        match self.kind {
            ModelKind::Persistence => 1,
            ModelKind::SeasonalNaive => self.season_len,
            ModelKind::Ar | ModelKind::Narx => self.window_n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_n == 0 {
            return Err(Error::Model("window_n must be >= 1".into()));
        }
        if self.season_len == 0 {
            return Err(Error::Model("season_len must be >= 1".into()));
        }
        if self.parameters.iter().any(|p| !p.is_finite()) {
            return Err(Error::Model("non-finite parameter".into()));
        }
        let expected = match self.kind {
            ModelKind::Persistence | ModelKind::SeasonalNaive => 0,
            ModelKind::Ar => self.window_n + 1,
            ModelKind::Narx => {
                let cfg = self
                    .config
                    .as_ref()
                    .ok_or_else(|| Error::Model("narx model without config".into()))?;
                if cfg.delay_taps != self.window_n {
                    return Err(Error::Model("delay_taps must equal window_n".into()));
                }
                narx::Network::param_count(cfg.delay_taps, cfg.hidden_units) + 2
            }
        };
        if self.parameters.len() != expected {
            return Err(Error::Model(format!(
                "expected {expected} parameters for {:?}, got {}",
                self.kind,
                self.parameters.len()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Forecaster for ForecastModel {
    fn predict(&self, history: &[f64]) -> Result<f64> {
        predict(self, history)
    }
}

pub fn predict(model: &ForecastModel, history: &[f64]) -> Result<f64> {
    let last = *history.last().ok_or(Error::EmptyHistory)?;
    if history.len() < model.required_depth() {
        return Ok(last);
    }
    let value = match model.kind {
        ModelKind::Persistence => last,
        ModelKind::SeasonalNaive => history[history.len() - model.season_len],
        ModelKind::Ar => ar::predict(&model.parameters, history),
        ModelKind::Narx => {
            let cfg = model
                .config
                .as_ref()
                .ok_or_else(|| Error::Model("narx model without config".into()))?;
            narx::predict(&model.parameters, cfg, history)
        }
    };
    Ok(value)
}

/// Iterated multi-step prediction: each output is appended to a working copy
/// of the history before the next one is produced.
pub fn predict_closed_loop<F: Forecaster + ?Sized>(
    model: &F,
    history: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut work = history.to_vec();
    work.reserve(horizon);
    for _ in 0..horizon {
        let next = model.predict(&work)?;
        work.push(next);
    }
    Ok(work.split_off(history.len()))
}
