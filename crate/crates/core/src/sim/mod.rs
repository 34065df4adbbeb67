//! Round-by-round simulation of one base station and one sensor over a
//! lossless, delay-free link.
//!
//! An experiment has two phases. During training every request carries the
//! prediction `0`, so the sensor reports its full reading and the base station
//! collects an exact history. A forecaster is then fitted on that history and
//! the prediction phase runs the scheduler: contacted rounds exchange real
//! packets through the codec, skipped rounds store closed-loop forecasts and
//! cost the sensor nothing.

mod energy;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{
    evaluate, fit_ar, train_narx, ConstantForecaster, ForecastModel, Forecaster, TrainConfig,
};
use crate::protocol::{
    bs_store, decode_reply, decode_request, encode_reply, encode_request, sensor_step,
    QuantSpec, ReplyPacket, RequestPacket, SensorState, Source, StoredValue,
};
use crate::rma::{fill_skips, RmaState};
use crate::trace::TraceSeries;

pub use energy::{compute_reductions, EnergyLedger, EnergyModel, Reductions, RoundEnergy};
pub use report::{RoundLog, SimReport, ROUNDS_CSV_HEADER, SUMMARY_CSV_HEADER};

/// Which predictor the base station fits after the training phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterConfig {
    Persistence,
    SeasonalNaive { season_len: usize },
    Ar { window_n: usize },
    Narx(#[serde(default)] TrainConfig),
    /// Fixed prediction; `0` reproduces the classical every-round scheme.
    Constant { value: f64 },
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig::Narx(TrainConfig::default())
    }
}

/// A forecaster ready for the prediction phase.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedForecaster {
    Model(ForecastModel),
    Constant(ConstantForecaster),
}

impl FittedForecaster {
    pub fn model(&self) -> Option<&ForecastModel> {
        match self {
            FittedForecaster::Model(m) => Some(m),
            FittedForecaster::Constant(_) => None,
        }
    }
}

impl Forecaster for FittedForecaster {
    fn predict(&self, history: &[f64]) -> Result<f64> {
        match self {
            FittedForecaster::Model(m) => m.predict(history),
            FittedForecaster::Constant(c) => c.predict(history),
        }
    }
}

impl ForecasterConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ForecasterConfig::SeasonalNaive { season_len: 0 } => {
                Err(Error::config("forecaster.season_len", "must be >= 1"))
            }
            ForecasterConfig::Ar { window_n: 0 } => {
                Err(Error::config("forecaster.window_n", "must be >= 1"))
            }
            ForecasterConfig::Narx(cfg) => cfg.validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::Config {
                    field: format!("forecaster.{field}"),
                    reason,
                },
                other => other,
            }),
            ForecasterConfig::Constant { value } if !value.is_finite() => {
                Err(Error::config("forecaster.value", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Fits on the collected training series. Neural training uses `seed`
    /// in place of the configured training seed.
    pub fn fit(&self, collected: &[f64], seed: u64) -> Result<FittedForecaster> {
        let model = match self {
            ForecasterConfig::Persistence => ForecastModel::persistence(),
            ForecasterConfig::SeasonalNaive { season_len } => {
                ForecastModel::seasonal_naive(*season_len)?
            }
            ForecasterConfig::Ar { window_n } => fit_ar(collected, *window_n)?,
            ForecasterConfig::Narx(cfg) => {
                train_narx(collected, &TrainConfig { seed, ..cfg.clone() })?
            }
            ForecasterConfig::Constant { value } => {
                return Ok(FittedForecaster::Constant(ConstantForecaster(*value)))
            }
        };
        Ok(FittedForecaster::Model(model))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub alpha: f64,
    pub tr1: u64,
    pub tr2: u64,
    pub train_len: usize,
    pub horizon: usize,
    #[serde(default)]
    pub forecaster: ForecasterConfig,
    #[serde(default)]
    pub quant: QuantSpec,
    #[serde(default)]
    pub energy: EnergyModel,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            tr1: 3,
            tr2: 7,
            train_len: 250,
            horizon: 150,
            forecaster: ForecasterConfig::default(),
            quant: QuantSpec::default(),
            energy: EnergyModel::default(),
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config("alpha", "must be finite and >= 0"));
        }
        if self.tr1 == 0 {
            return Err(Error::config("tr1", "must be >= 1"));
        }
        if self.tr1 >= self.tr2 {
            return Err(Error::config(
                "tr1",
                format!("must be < tr2 (got tr1={}, tr2={})", self.tr1, self.tr2),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        self.forecaster.validate()?;
        self.quant.validate()?;
        self.energy.validate()
    }

    pub fn rounds_needed(&self) -> usize {
        self.train_len + self.horizon
    }
}

/// Output of the classical collection rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPhase {
    /// Stored value of each round, i.e. what the forecaster is fitted on.
    pub collected: Vec<f64>,
    pub ledger: EnergyLedger,
    pub rounds: Vec<RoundLog>,
}

struct Exchange {
    e_sent: f64,
    reply: Option<ReplyPacket>,
    bits_rx: usize,
    bits_tx: usize,
}

/// One request/reply exchange through the codec. Both sides act on what
/// they decode, so quantization is applied exactly as on a real link.
fn exchange(
    sensor: &mut SensorState,
    seq: u16,
    e: f64,
    alpha: f64,
    measured: f64,
    q: &QuantSpec,
) -> Result<Exchange> {
    let req_bits = encode_request(&RequestPacket::data(seq, e, alpha), q)?;
    let received = decode_request(&req_bits, q)?;
    let (reply, bits_tx) = match sensor_step(sensor, &received, measured) {
        Some(rep) => {
            let rep_bits = encode_reply(&rep, q)?;
            (Some(decode_reply(&rep_bits, q)?), rep_bits.len())
        }
        None => (None, 0),
    };
    Ok(Exchange {
        e_sent: received.predicted_e,
        reply,
        bits_rx: req_bits.len(),
        bits_tx,
    })
}

fn contact_log(
    t: usize,
    measured: f64,
    x: &Exchange,
    stored: &StoredValue,
    energy: &EnergyModel,
    q: &QuantSpec,
) -> RoundLog {
    RoundLog {
        t,
        source: stored.source,
        e: x.e_sent,
        m: measured,
        s: stored.value_s,
        replied: x.reply.is_some(),
        bits_tx: x.bits_tx,
        bits_rx: x.bits_rx,
        energy: energy.with_baseline(energy.contact(x.bits_rx, x.bits_tx), q),
    }
}

/// Classical collection: `train_len` rounds, each predicting `0`.
pub fn run_training_phase(
    trace: &TraceSeries,
    train_len: usize,
    alpha: f64,
    quant: &QuantSpec,
    energy: &EnergyModel,
) -> Result<TrainingPhase> {
    if train_len > trace.len() {
        return Err(Error::TraceTooShort {
            needed: train_len,
            got: trace.len(),
        });
    }
    let mut sensor = SensorState::new(trace.sensor_id);
    let mut out = TrainingPhase {
        collected: Vec::with_capacity(train_len),
        ledger: EnergyLedger::default(),
        rounds: Vec::with_capacity(train_len),
    };
    for (i, &m) in trace.values()[..train_len].iter().enumerate() {
        let t = i + 1;
        let x = exchange(&mut sensor, t as u16, 0.0, alpha, m, quant)?;
        let stored = bs_store(x.e_sent, x.reply.as_ref(), t);
        let log = contact_log(t, m, &x, &stored, energy, quant);
        out.ledger.charge(&log.energy);
        out.collected.push(stored.value_s);
        out.rounds.push(log);
    }
    Ok(out)
}

/// The scheduled prediction phase over rounds `train_len + 1 ..= train_len +
/// horizon`. With an empty `collected` history the first request predicts 0.
pub fn run_prediction_phase<F: Forecaster + ?Sized>(
    trace: &TraceSeries,
    model: &F,
    cfg: &SimConfig,
    collected: &[f64],
) -> Result<SimReport> {
    cfg.validate()?;
    let start = collected.len();
    let needed = start + cfg.horizon;
    if needed > trace.len() {
        return Err(Error::TraceTooShort {
            needed,
            got: trace.len(),
        });
    }
    let q = &cfg.quant;
    let energy = &cfg.energy;
    let mut sensor = SensorState::new(trace.sensor_id);
    let mut rma = RmaState::new(cfg.tr1, cfg.tr2)?;
    let mut history = collected.to_vec();
    let mut rounds: Vec<RoundLog> = Vec::with_capacity(cfg.horizon);
    let mut ledger = EnergyLedger::default();

    let mut i = 1;
    while i <= cfg.horizon {
        let t = start + i;
        let m = trace.values()[t - 1];
        let e = if history.is_empty() { 0.0 } else { model.predict(&history)? };
        if !e.is_finite() {
            return Err(Error::ForecastDiverged { t });
        }
        let x = exchange(&mut sensor, t as u16, e, cfg.alpha, m, q)?;
        let stored = bs_store(x.e_sent, x.reply.as_ref(), t);
        if !stored.value_s.is_finite() {
            return Err(Error::ForecastDiverged { t });
        }
        let log = contact_log(t, m, &x, &stored, energy, q);
        ledger.charge(&log.energy);
        rounds.push(log);
        history.push(stored.value_s);

        rma = rma.update(x.reply.is_some());
        let skip = usize::try_from(rma.q()).unwrap_or(usize::MAX).min(cfg.horizon - i);
        for fill in fill_skips(&history, model, t + 1, skip)? {
            if !fill.value_s.is_finite() {
                return Err(Error::ForecastDiverged { t: fill.t });
            }
            let log = RoundLog {
                t: fill.t,
                source: Source::SkippedFill,
                e: fill.value_s,
                m: trace.values()[fill.t - 1],
                s: fill.value_s,
                replied: false,
                bits_tx: 0,
                bits_rx: 0,
                energy: energy.with_baseline(RoundEnergy::default(), q),
            };
            ledger.charge(&log.energy);
            rounds.push(log);
            history.push(fill.value_s);
        }
        i += 1 + skip;
    }

    SimReport::from_rounds(rounds, ledger, cfg)
}

/// Training, fitting and the scheduled prediction phase, in order.
pub fn run_experiment(trace: &TraceSeries, cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    if cfg.rounds_needed() > trace.len() {
        return Err(Error::TraceTooShort {
            needed: cfg.rounds_needed(),
            got: trace.len(),
        });
    }
    let training = run_training_phase(trace, cfg.train_len, cfg.alpha, &cfg.quant, &cfg.energy)?;
    let forecaster = cfg.forecaster.fit(&training.collected, cfg.seed)?;
    let mut report = run_prediction_phase(trace, &forecaster, cfg, &training.collected)?;
    report.training_energy = training.ledger;
    Ok(report)
}

/// Forecast quality of the per-round predictions against ground truth.
pub(crate) fn forecast_quality(rounds: &[RoundLog]) -> Result<crate::forecast::ForecastReport> {
    let predictions: Vec<f64> = rounds.iter().map(|r| r.e).collect();
    let actuals: Vec<f64> = rounds.iter().map(|r| r.m).collect();
    evaluate(&predictions, &actuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate, SyntheticSpec, Waveform};

    fn trace(values: Vec<f64>) -> TraceSeries {
        TraceSeries::new(0, 1.0, values).unwrap()
    }

    fn cfg(forecaster: ForecasterConfig, train_len: usize, horizon: usize) -> SimConfig {
        SimConfig {
            forecaster,
            train_len,
            horizon,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_trace_training_is_silent() {
        let t = trace(vec![0.0; 10]);
        let out = run_training_phase(&t, 10, 1.0, &QuantSpec::default(), &EnergyModel::default())
            .unwrap();
        assert_eq!(out.collected, vec![0.0; 10]);
        assert!(out.rounds.iter().all(|r| !r.replied));
        assert_eq!(out.ledger.sensor_tx, 0.0);
        assert_eq!(out.ledger.sensor_rx, 10.0 * 51.0);
    }

    #[test]
    fn training_collects_full_readings() {
        let t = trace(vec![25.0, 26.0, 24.0]);
        let out = run_training_phase(&t, 3, 1.0, &QuantSpec::default(), &EnergyModel::default())
            .unwrap();
        assert_eq!(out.collected, vec![25.0, 26.0, 24.0]);
        assert!(out.rounds.iter().all(|r| r.replied && r.source == Source::Replied));
    }

    #[test]
    fn training_longer_than_trace() {
        let t = trace(vec![1.0; 3]);
        let err = run_training_phase(&t, 4, 1.0, &QuantSpec::default(), &EnergyModel::default())
            .unwrap_err();
        assert!(matches!(err, Error::TraceTooShort { needed: 4, got: 3 }));
    }

    #[test]
    fn perfect_forecaster_follows_silent_schedule() {
        let spec = SyntheticSpec {
            kind: Waveform::Sine,
            amplitude: 10.0,
            period_samples: 24,
            offset: 20.0,
            noise_std: 0.0,
            length: 400,
            seed: 0,
        };
        let t = generate(&spec).unwrap();
        let truth = t.values().to_vec();
        let oracle = move |h: &[f64]| truth[h.len()];
        let c = cfg(ForecasterConfig::Persistence, 250, 150);
        let report = run_prediction_phase(&t, &oracle, &c, &t.values()[..250]).unwrap();
        assert_eq!((report.contacts, report.skips, report.replies), (16, 134, 0));
    }

    #[test]
    fn classical_persistence_on_constant() {
        let t = trace(vec![12.5; 200]);
        let c = SimConfig {
            tr1: 1_000_000_000,
            tr2: 1_000_000_001,
            ..cfg(ForecasterConfig::Persistence, 50, 150)
        };
        let r = run_experiment(&t, &c).unwrap();
        assert_eq!((r.contacts, r.replies, r.skips), (150, 0, 0));
    }

    #[test]
    fn always_wrong_forecaster_always_replies() {
        let values: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin() * 5.0).collect();
        let t = trace(values.clone());
        let off_by_one = move |h: &[f64]| values[h.len()] + 1.0;
        let c = SimConfig {
            alpha: 0.0,
            ..cfg(ForecasterConfig::Persistence, 10, 50)
        };
        let r = run_prediction_phase(&t, &off_by_one, &c, &t.values()[..10]).unwrap();
        assert_eq!(r.replies, r.contacts);
        assert_eq!(r.contacts, 50);
        assert!(r.max_abs_error_contacted <= c.quant.resolution);
    }

    #[test]
    fn empty_history_starts_from_zero() {
        let t = trace(vec![5.0; 20]);
        let c = cfg(ForecasterConfig::Persistence, 0, 20);
        let r = run_experiment(&t, &c).unwrap();
        assert_eq!(r.round_log[0].e, 0.0);
        assert!(r.round_log[0].replied);
        assert_eq!(r.round_log[0].s, 5.0);
        assert_eq!(r.replies, 1);
    }

    #[test]
    fn diverging_forecaster_aborts() {
        let t = trace(vec![1.0; 30]);
        let c = cfg(ForecasterConfig::Persistence, 10, 20);
        let nan = |_: &[f64]| f64::NAN;
        assert!(matches!(
            run_prediction_phase(&t, &nan, &c, &t.values()[..10]),
            Err(Error::ForecastDiverged { t: 11 })
        ));
    }

    #[test]
    fn config_validation() {
        let bad = SimConfig { tr1: 7, tr2: 3, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "tr1"));
        let bad = SimConfig { horizon: 0, ..SimConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "horizon"));
        let bad = SimConfig { alpha: -1.0, ..SimConfig::default() };
        assert!(bad.validate().is_err());
        let bad = cfg(ForecasterConfig::Ar { window_n: 0 }, 10, 10);
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "forecaster.window_n"));
    }

    #[test]
    fn trace_too_short_for_experiment() {
        let t = trace(vec![1.0; 100]);
        let c = cfg(ForecasterConfig::Persistence, 50, 60);
        assert!(matches!(
            run_experiment(&t, &c),
            Err(Error::TraceTooShort { needed: 110, got: 100 })
        ));
    }

    #[test]
    fn config_json_shape() {
        let text = r#"{
            "alpha": 1.0, "tr1": 3, "tr2": 7, "train_len": 250, "horizon": 150,
            "forecaster": {"kind": "narx", "hidden_units": 10},
            "seed": 9
        }"#;
        let c: SimConfig = serde_json::from_str(text).unwrap();
        match &c.forecaster {
            ForecasterConfig::Narx(tc) => {
                assert_eq!(tc.hidden_units, 10);
                assert_eq!(tc.delay_taps, 24);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.quant, QuantSpec::default());
        let c: SimConfig = serde_json::from_str(
            r#"{"alpha":1,"tr1":3,"tr2":7,"train_len":0,"horizon":5,"forecaster":{"kind":"seasonal_naive","season_len":24}}"#,
        )
        .unwrap();
        assert_eq!(c.forecaster, ForecasterConfig::SeasonalNaive { season_len: 24 });
    }
}
