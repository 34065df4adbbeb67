use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `HISTOGRAM_BINS + 1` ascending edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub mse: f64,
    /// Pearson correlation of predictions against actuals; `None` when
    /// either side has zero variance.
    pub regression_r: Option<f64>,
    /// Histogram of `prediction - actual`.
    pub error_histogram: Histogram,
}

pub fn evaluate(predictions: &[f64], actuals: &[f64]) -> Result<ForecastReport> {
    if predictions.len() != actuals.len() || predictions.is_empty() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: actuals.len(),
        });
    }
    let n = predictions.len() as f64;
    let errors: Vec<f64> = predictions.iter().zip(actuals).map(|(p, a)| p - a).collect();
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;

    Ok(ForecastReport {
        mse,
        regression_r: pearson(predictions, actuals),
        error_histogram: histogram(&errors),
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Equal-width bins over the observed range. A degenerate range is widened
/// to one unit centred on the single observed value.
fn histogram(errors: &[f64]) -> Histogram {
    let mut lo = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let edges = (0..=HISTOGRAM_BINS).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; HISTOGRAM_BINS];
    for e in errors {
        let bin = (((e - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    Histogram { edges, counts }
}
