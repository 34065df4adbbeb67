//! NARX run on a clean 24-sample sine over five seeds.

use predskip::sim::{run_experiment, SimConfig};
use predskip::trace::{generate, SyntheticSpec, Waveform};

fn main() {
    let trace = generate(&SyntheticSpec {
        kind: Waveform::Sine,
        amplitude: 10.0,
        period_samples: 24,
        offset: 20.0,
        noise_std: 0.0,
        length: 400,
        seed: 0,
    })
    .unwrap();
    for seed in 0..5 {
        let cfg = SimConfig { seed, ..SimConfig::default() };
        let t0 = std::time::Instant::now();
        let r = run_experiment(&trace, &cfg).unwrap();
        println!(
            "seed {seed}: contacts {} skips {} replies {} silent {} maxerr {:.4} tx {:.1} proc {:.2} mse {:.2e} r {:?} ({:?})",
            r.contacts, r.skips, r.replies, r.silent_accepted, r.max_abs_error_contacted,
            r.tx_reduction_ratio, r.proc_reduction_ratio, r.forecast_report.mse,
            r.forecast_report.regression_r, t0.elapsed()
        );
    }
}
