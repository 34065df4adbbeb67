//! Delay-line neural autoregression.
//!
//! One hidden tanh layer maps the last `taps` values of the series to the next
//! value through a linear output unit. Training is open-loop (every input
//! window comes from the real series); prediction can then be run closed-loop
//! with [`super::predict_closed_loop`].
//!
//! Inputs and targets are standardized with the mean and standard deviation of
//! the training series; the model stores both and undoes the scaling on output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ForecastModel, ModelKind, TrainConfig};
use crate::error::{Error, Result};

/// Flat parameter vector of the network.
///
/// Layout: input weights (`hidden` rows of `taps`, row-major), hidden biases,
/// output weights, output bias. Input `i` of a window is the value `i + 1`
/// steps back.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub taps: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

/// Open-loop training pairs: row `k` of `inputs` (length `taps`) predicts
/// `targets[k]`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub taps: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    /// Every complete window of `series`, most recent value first.
    pub fn from_series(series: &[f64], taps: usize) -> Self {
        let n = series.len().saturating_sub(taps);
        let mut inputs = Vec::with_capacity(n * taps);
        for t in taps..series.len() {
            inputs.extend((1..=taps).map(|lag| series[t - lag]));
        }
        Self {
            taps,
            inputs,
            targets: series[taps.min(series.len())..].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.inputs[k * self.taps..(k + 1) * self.taps]
    }
}

impl Network {
    pub fn param_count(taps: usize, hidden: usize) -> usize {
        hidden * taps + 2 * hidden + 1
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)` of their layer.
    pub fn init(taps: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let in_bound = 1.0 / (taps as f64).sqrt();
        let out_bound = 1.0 / (hidden as f64).sqrt();
        let mut params = Vec::with_capacity(Self::param_count(taps, hidden));
        for _ in 0..hidden * taps + hidden {
            params.push(rng.random_range(-in_bound..=in_bound));
        }
        for _ in 0..hidden + 1 {
            params.push(rng.random_range(-out_bound..=out_bound));
        }
        Self {
            taps,
            hidden,
            params,
        }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.taps;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden;
        (b1, w2, b2)
    }

    fn hidden_activations(&self, input: &[f64], out: &mut [f64]) {
        let (b1, _, _) = self.offsets();
        for (j, a) in out.iter_mut().enumerate() {
            let row = &self.params[j * self.taps..(j + 1) * self.taps];
            let z = self.params[b1 + j] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
            *a = z.tanh();
        }
    }

    pub fn forward(&self, input: &[f64]) -> f64 {
        forward(self.taps, self.hidden, &self.params, input)
    }

    /// `mean((y - target)^2) / 2 + l2 / 2 * |weights|^2`. Biases are not
    /// penalised.
    pub fn loss(&self, data: &Dataset, l2: f64) -> f64 {
        let n = data.len() as f64;
        let sse: f64 = (0..data.len())
            .map(|k| {
                let e = self.forward(data.row(k)) - data.targets[k];
                e * e
            })
            .sum();
        sse / (2.0 * n) + 0.5 * l2 * self.weight_norm_sq()
    }

    fn weight_norm_sq(&self) -> f64 {
        let (b1, w2, b2) = self.offsets();
        self.params[..b1]
            .iter()
            .chain(&self.params[w2..b2])
            .map(|w| w * w)
            .sum()
    }

    /// Loss and its exact gradient by backpropagation.
    pub fn loss_and_gradient(&self, data: &Dataset, l2: f64) -> (f64, Vec<f64>) {
        let (b1, w2, b2) = self.offsets();
        let n = data.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut h = vec![0.0; self.hidden];
        let mut sse = 0.0;

        for k in 0..data.len() {
            let x = data.row(k);
            self.hidden_activations(x, &mut h);
            let y = self.params[b2]
                + h.iter().zip(&self.params[w2..b2]).map(|(a, w)| a * w).sum::<f64>();
            let e = y - data.targets[k];
            sse += e * e;

            let dy = e / n;
            grad[b2] += dy;
            for j in 0..self.hidden {
                grad[w2 + j] += dy * h[j];
                let dz = dy * self.params[w2 + j] * (1.0 - h[j] * h[j]);
                grad[b1 + j] += dz;
                let row = &mut grad[j * self.taps..(j + 1) * self.taps];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += dz * xi;
                }
            }
        }

        if l2 > 0.0 {
            for i in (0..b1).chain(w2..b2) {
                grad[i] += l2 * self.params[i];
            }
        }
        (sse / (2.0 * n) + 0.5 * l2 * self.weight_norm_sq(), grad)
    }
}

// Adam moment decay rates and denominator guard.
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Trains a delay-line network on `targets` for exactly `config.epochs`
/// full-batch epochs. Step sizes are adapted per parameter from running
/// first and second gradient moments (Adam) with base rate
/// `config.learning_rate`.
pub fn train_narx(targets: &[f64], config: &TrainConfig) -> Result<ForecastModel> {
    config.validate()?;
    let taps = config.delay_taps;
    let needed = taps + 2;
    if targets.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: targets.len(),
        });
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::Model("non-finite training target".into()));
    }

    let (mean, scale) = standardization(targets);
    let standardized: Vec<f64> = targets.iter().map(|v| (v - mean) / scale).collect();
    let data = Dataset::from_series(&standardized, taps);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = Network::init(taps, config.hidden_units, &mut rng);
    let mut m = vec![0.0; net.params.len()];
    let mut v = vec![0.0; net.params.len()];

    for epoch in 1..=config.epochs {
        let (_, grad) = net.loss_and_gradient(&data, config.l2_lambda);
        let c1 = 1.0 - BETA1.powi(epoch as i32);
        let c2 = 1.0 - BETA2.powi(epoch as i32);
        for i in 0..net.params.len() {
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * grad[i];
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            let step = config.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
            net.params[i] -= step;
        }
        if net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::DivergedTraining { epoch });
        }
    }

    let mut parameters = net.params;
    parameters.push(mean);
    parameters.push(scale);
    Ok(ForecastModel {
        kind: ModelKind::Narx,
        window_n: taps,
        season_len: 1,
        config: Some(config.clone()),
        parameters,
    })
}

/// Mean and standard deviation; a zero deviation is replaced by one so
/// constant series map to zero.
fn standardization(series: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}

pub(super) fn predict(parameters: &[f64], config: &TrainConfig, history: &[f64]) -> f64 {
    let k = parameters.len();
    let (mean, scale) = (parameters[k - 2], parameters[k - 1]);
    let input: Vec<f64> = history
        .iter()
        .rev()
        .take(config.delay_taps)
        .map(|v| (v - mean) / scale)
        .collect();
    mean + scale * forward(config.delay_taps, config.hidden_units, &parameters[..k - 2], &input)
}

fn forward(taps: usize, hidden: usize, params: &[f64], input: &[f64]) -> f64 {
    let b1 = hidden * taps;
    let w2 = b1 + hidden;
    let b2 = w2 + hidden;
    let mut y = params[b2];
    for j in 0..hidden {
        let row = &params[j * taps..(j + 1) * taps];
        let z = params[b1 + j] + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        y += params[w2 + j] * z.tanh();
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::predict as model_predict;

    fn sine(len: usize, period: f64) -> Vec<f64> {
        (0..len)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin())
            .collect()
    }

    #[test]
    fn dataset_windows_most_recent_first() {
        let d = Dataset::from_series(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(d.inputs, vec![2.0, 1.0, 3.0, 2.0]);
        assert_eq!(d.targets, vec![3.0, 4.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let net = Network::init(3, 4, &mut rng);
        let series: Vec<f64> = (0..13).map(|_| rng.random_range(-1.0..1.0)).collect();
        let data = Dataset::from_series(&series, 3);
        assert_eq!(data.len(), 10);
        let (_, grad) = net.loss_and_gradient(&data, 0.01);
        let h = 1e-5;
        for i in 0..net.params.len() {
            let mut plus = net.clone();
            plus.params[i] += h;
            let mut minus = net.clone();
            minus.params[i] -= h;
            let numeric = (plus.loss(&data, 0.01) - minus.loss(&data, 0.01)) / (2.0 * h);
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "param {i}: {} vs {numeric}", grad[i]);
        }
    }

    #[test]
    fn fits_noiseless_sine() {
        let targets = sine(250, 24.0);
        let m = train_narx(&targets, &TrainConfig::default()).unwrap();
        let taps = 24;
        let mse = (taps..targets.len())
            .map(|t| {
                let e = model_predict(&m, &targets[..t]).unwrap() - targets[t];
                e * e
            })
            .sum::<f64>()
            / (targets.len() - taps) as f64;
        assert!(mse < 1e-2, "training mse {mse}");
    }

    #[test]
    fn constant_targets() {
        let targets = vec![3.0; 40];
        let cfg = TrainConfig {
            delay_taps: 4,
            hidden_units: 5,
            ..TrainConfig::default()
        };
        let m = train_narx(&targets, &cfg).unwrap();
        for t in 4..40 {
            let p = model_predict(&m, &targets[..t]).unwrap();
            assert!((p - 3.0).abs() < 1e-3, "{p}");
        }
    }

    #[test]
    fn insufficient_data() {
        let cfg = TrainConfig::default();
        let targets = vec![1.0; cfg.delay_taps];
        assert!(matches!(
            train_narx(&targets, &cfg),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let targets = sine(60, 12.0);
        let cfg = TrainConfig {
            delay_taps: 6,
            hidden_units: 8,
            epochs: 50,
            seed: 5,
            ..TrainConfig::default()
        };
        let a = train_narx(&targets, &cfg).unwrap();
        let b = train_narx(&targets, &cfg).unwrap();
        assert_eq!(a.parameters, b.parameters);
        let c = train_narx(&targets, &TrainConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.parameters, c.parameters);
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let targets = sine(60, 12.0);
        let cfg = TrainConfig {
            delay_taps: 6,
            hidden_units: 8,
            epochs: 20,
            learning_rate: 1e300,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_narx(&targets, &cfg),
            Err(Error::DivergedTraining { .. })
        ));
    }
}
