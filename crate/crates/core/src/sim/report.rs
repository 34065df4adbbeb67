use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::energy::{compute_reductions, EnergyLedger, RoundEnergy};
use super::{forecast_quality, SimConfig};
use crate::error::Result;
use crate::forecast::ForecastReport;
use crate::protocol::{Source, StoredValue};

pub const ROUNDS_CSV_HEADER: &str = "t,source,E,M,S,replied,bits_tx,bits_rx";
pub const SUMMARY_CSV_HEADER: &str = "rounds,contacts,skips,replies,silent_accepted,\
max_abs_error_contacted,sensor_tx,baseline_tx,sensor_non_tx,baseline_non_tx,\
tx_reduction_ratio,proc_reduction_ratio,mse,regression_r";

/// One simulated round. For skipped rounds `e` and `s` are the stored fill.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub t: usize,
    pub source: Source,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub replied: bool,
    pub bits_tx: usize,
    pub bits_rx: usize,
    pub energy: RoundEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub rounds: usize,
    pub contacts: usize,
    pub skips: usize,
    pub replies: usize,
    pub silent_accepted: usize,
    /// Largest `|S - M|` over contacted rounds.
    pub max_abs_error_contacted: f64,
    pub tx_reduction_ratio: f64,
    pub proc_reduction_ratio: f64,
    pub tx_infinite: bool,
    pub proc_infinite: bool,
    /// Prediction-phase energy; the reduction ratios are computed from it.
    pub energy: EnergyLedger,
    pub training_energy: EnergyLedger,
    pub forecast_report: ForecastReport,
    pub stored_series: Vec<StoredValue>,
    pub round_log: Vec<RoundLog>,
}

impl SimReport {
    pub(crate) fn from_rounds(
        rounds: Vec<RoundLog>,
        energy: EnergyLedger,
        cfg: &SimConfig,
    ) -> Result<Self> {
        let count = |src: Source| rounds.iter().filter(|r| r.source == src).count();
        let replies = count(Source::Replied);
        let silent_accepted = count(Source::SilentAccepted);
        let skips = count(Source::SkippedFill);
        let max_abs_error_contacted = rounds
            .iter()
            .filter(|r| r.source != Source::SkippedFill)
            .map(|r| (r.s - r.m).abs())
            .fold(0.0, f64::max);
        let reductions = compute_reductions(&energy, &cfg.energy, &cfg.quant);
        let stored_series = rounds
            .iter()
            .map(|r| StoredValue {
                t: r.t,
                value_s: r.s,
                source: r.source,
            })
            .collect();
        Ok(Self {
            rounds: rounds.len(),
            contacts: replies + silent_accepted,
            skips,
            replies,
            silent_accepted,
            max_abs_error_contacted,
            tx_reduction_ratio: reductions.tx_reduction_ratio,
            proc_reduction_ratio: reductions.proc_reduction_ratio,
            tx_infinite: reductions.tx_infinite,
            proc_infinite: reductions.proc_infinite,
            energy,
            training_energy: EnergyLedger::default(),
            forecast_report: forecast_quality(&rounds)?,
            stored_series,
            round_log: rounds,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-round log, one row per round with [`ROUNDS_CSV_HEADER`] columns.
    pub fn rounds_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.round_log.len() + 1));
        out.push_str(ROUNDS_CSV_HEADER);
        out.push('\n');
        for r in &self.round_log {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.source.as_str(),
                r.e,
                r.m,
                r.s,
                r.replied,
                r.bits_tx,
                r.bits_rx
            );
        }
        out
    }

    /// Summary values in [`SUMMARY_CSV_HEADER`] order, without a newline.
    pub fn summary_row(&self) -> String {
        let r = self
            .forecast_report
            .regression_r
            .map_or_else(|| "undefined".to_string(), |r| r.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.rounds,
            self.contacts,
            self.skips,
            self.replies,
            self.silent_accepted,
            self.max_abs_error_contacted,
            self.energy.sensor_tx,
            self.energy.baseline_tx,
            self.energy.sensor_non_tx(),
            self.energy.baseline_non_tx(),
            self.tx_reduction_ratio,
            self.proc_reduction_ratio,
            self.forecast_report.mse,
            r
        )
    }

    pub fn summary_csv(&self) -> String {
        format!("{SUMMARY_CSV_HEADER}\n{}\n", self.summary_row())
    }
}
