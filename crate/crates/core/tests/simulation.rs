use predskip::forecast::{ConstantForecaster, ForecastModel};
use predskip::protocol::{QuantSpec, Source};
use predskip::rma::rma_schedule;
use predskip::sim::{run_experiment, run_prediction_phase, EnergyLedger, ForecasterConfig, SimConfig};
use predskip::trace::{generate, SyntheticSpec, TraceSeries, Waveform};
use proptest::prelude::*;

fn sine(length: usize, noise_std: f64, seed: u64) -> TraceSeries {
    generate(&SyntheticSpec {
        kind: Waveform::Sine,
        amplitude: 10.0,
        period_samples: 24,
        offset: 20.0,
        noise_std,
        length,
        seed,
    })
    .unwrap()
}

fn cfg(alpha: f64, train_len: usize, horizon: usize, forecaster: ForecasterConfig) -> SimConfig {
    SimConfig {
        alpha,
        train_len,
        horizon,
        forecaster,
        ..SimConfig::default()
    }
}

#[test]
fn seasonal_forecaster_on_clean_sine_never_replies() {
    let trace = sine(200, 0.0, 0);
    let report = run_experiment(
        &trace,
        &cfg(1.0, 50, 150, ForecasterConfig::SeasonalNaive { season_len: 24 }),
    )
    .unwrap();
    assert_eq!(report.replies, 0);
    assert_eq!(report.skips, 134);
    let contacted: Vec<usize> = report
        .round_log
        .iter()
        .filter(|r| r.source != Source::SkippedFill)
        .map(|r| r.t - 50)
        .collect();
    assert_eq!(contacted, rma_schedule(3, 7, 150, &[]).unwrap());
}

#[test]
fn noisy_trace_forces_replies() {
    let trace = sine(300, 3.0, 9);
    let report = run_experiment(&trace, &cfg(0.5, 100, 200, ForecasterConfig::Persistence)).unwrap();
    assert!(report.replies > 0);
    assert!(report.max_abs_error_contacted <= 0.5 + QuantSpec::default().resolution);
    assert!(!report.tx_infinite);
}

#[test]
fn prediction_phase_from_empty_history_starts_at_zero() {
    let trace = TraceSeries::new(0, 1.0, vec![5.0; 10]).unwrap();
    let c = cfg(0.0, 0, 10, ForecasterConfig::Persistence);
    let report = run_prediction_phase(&trace, &ForecastModel::persistence(), &c, &[]).unwrap();
    assert_eq!(report.round_log[0].e, 0.0);
    assert!(report.round_log[0].replied);
    assert_eq!(report.round_log[0].s, 5.0);
}

#[test]
fn constant_forecaster_reports_no_model() {
    let trace = sine(60, 0.0, 0);
    let c = cfg(100.0, 0, 60, ForecasterConfig::Constant { value: 20.0 });
    let report = run_prediction_phase(&trace, &ConstantForecaster(20.0), &c, &[]).unwrap();
    assert_eq!(report.replies, 0);
    assert!(report.skips > 0);
}

#[test]
fn short_trace_is_rejected() {
    let trace = sine(100, 0.0, 0);
    assert!(run_experiment(&trace, &cfg(1.0, 50, 60, ForecasterConfig::Persistence)).is_err());
}

#[test]
fn report_json_round_trips() {
    let trace = sine(120, 0.2, 1);
    let report = run_experiment(&trace, &cfg(1.0, 40, 80, ForecasterConfig::Ar { window_n: 3 })).unwrap();
    let back: predskip::sim::SimReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contacted_rounds_stay_within_tolerance(
        alpha in 0.0f64..4.0,
        noise in 0.0f64..3.0,
        seed in any::<u64>(),
        window_n in 1usize..4,
    ) {
        let trace = sine(160, noise, seed);
        let report = run_experiment(&trace, &cfg(alpha, 60, 100, ForecasterConfig::Ar { window_n })).unwrap();
        let bound = alpha + QuantSpec::default().resolution;
        for r in report.round_log.iter().filter(|r| r.source != Source::SkippedFill) {
            prop_assert!((r.s - r.m).abs() <= bound, "round {}: |{} - {}| > {}", r.t, r.s, r.m, bound);
        }
    }

    #[test]
    fn accounting_is_consistent(alpha in 0.0f64..4.0, noise in 0.0f64..3.0, seed in any::<u64>()) {
        let trace = sine(120, noise, seed);
        let report = run_experiment(&trace, &cfg(alpha, 40, 80, ForecasterConfig::Persistence)).unwrap();
        prop_assert_eq!(report.contacts + report.skips, 80);
        prop_assert_eq!(report.replies + report.silent_accepted, report.contacts);
        prop_assert_eq!(
            report.round_log.iter().map(|r| r.t).collect::<Vec<_>>(),
            (41..=120).collect::<Vec<_>>()
        );
        let replayed = EnergyLedger::replay(report.round_log.iter().map(|r| &r.energy));
        prop_assert_eq!(replayed, report.energy);
        for r in report.round_log.iter().filter(|r| r.source == Source::SkippedFill) {
            prop_assert_eq!((r.bits_tx, r.bits_rx), (0, 0));
            prop_assert_eq!(r.energy.sensor_tx + r.energy.sensor_rx + r.energy.sensor_proc + r.energy.sensor_sense, 0.0);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let trace = sine(120, 1.0, seed);
        let c = SimConfig { seed, ..cfg(1.0, 40, 80, ForecasterConfig::Ar { window_n: 2 }) };
        prop_assert_eq!(run_experiment(&trace, &c).unwrap(), run_experiment(&trace, &c).unwrap());
    }
}
