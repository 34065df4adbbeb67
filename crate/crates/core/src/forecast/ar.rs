use nalgebra::{DMatrix, DVector};

use super::{ForecastModel, ModelKind};
use crate::error::{Error, Result};

/// Ridge added to the normal-equation diagonal when the plain system is not
/// positive definite (constant or collinear histories).
const SINGULAR_RIDGE: f64 = 1e-8;

/// Least-squares AR(`window_n`) fit with intercept, minimizing the one-step
/// squared error over every complete window in `history`.
///
/// Solves the normal equations `XᵀX β = Xᵀy` by Cholesky, where row `t` of `X`
/// is `[x(t-1), …, x(t-n), 1]`.
pub fn fit_ar(history: &[f64], window_n: usize) -> Result<ForecastModel> {
    if window_n == 0 {
        return Err(Error::config("window_n", "must be >= 1"));
    }
    let needed = 2 * window_n + 2;
    if history.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: history.len(),
        });
    }
    if history.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("non-finite history value".into()));
    }

    let rows = history.len() - window_n;
    let cols = window_n + 1;
    let design = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + window_n;
        if c < window_n {
            history[t - 1 - c]
        } else {
            1.0
        }
    });
    let target = DVector::from_iterator(rows, history[window_n..].iter().copied());

    let gram = design.tr_mul(&design);
    let rhs = design.tr_mul(&target);
    let scale = gram.diagonal().max();
    let solution = match gram.clone().cholesky() {
        Some(chol) if chol.l_dirty().diagonal().iter().all(|d| d * d > 1e-12 * scale) => {
            chol.solve(&rhs)
        }
        _ => {
            let ridged = gram + DMatrix::identity(cols, cols) * SINGULAR_RIDGE;
            ridged
                .cholesky()
                .ok_or_else(|| Error::Model("normal equations are not solvable".into()))?
                .solve(&rhs)
        }
    };

    let parameters: Vec<f64> = solution.iter().copied().collect();
    if parameters.iter().any(|p| !p.is_finite()) {
        return Err(Error::Model("AR fit produced non-finite coefficients".into()));
    }
    Ok(ForecastModel {
        kind: ModelKind::Ar,
        window_n,
        season_len: 1,
        config: None,
        parameters,
    })
}

pub(super) fn predict(parameters: &[f64], history: &[f64]) -> f64 {
    let n = parameters.len() - 1;
    let lags = history.iter().rev().take(n);
    parameters[n] + parameters[..n].iter().zip(lags).map(|(a, x)| a * x).sum::<f64>()
}
