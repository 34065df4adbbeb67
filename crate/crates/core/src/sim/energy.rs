//! Sensor-side energy accounting.
//!
//! Costs are linear: per bit transmitted, per bit received, and a flat cost
//! per processed request and per measurement. The baseline columns track what
//! the classical scheme (request every round, full-value reply every round)
//! would have spent over the same rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{full_value_bit_cost, request_bit_cost, QuantSpec, REPLY_HEADER_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyModel {
    pub tx_per_bit: f64,
    pub rx_per_bit: f64,
    /// Subtract and compare, once per received request.
    pub proc_per_round: f64,
    pub sense_per_round: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            tx_per_bit: 1.0,
            rx_per_bit: 1.0,
            proc_per_round: 8.0,
            sense_per_round: 4.0,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("energy.tx_per_bit", self.tx_per_bit),
            ("energy.rx_per_bit", self.rx_per_bit),
            ("energy.proc_per_round", self.proc_per_round),
            ("energy.sense_per_round", self.sense_per_round),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Sensor cost of one contacted round.
    pub fn contact(&self, bits_rx: usize, bits_tx: usize) -> RoundEnergy {
        RoundEnergy {
            sensor_tx: bits_tx as f64 * self.tx_per_bit,
            sensor_rx: bits_rx as f64 * self.rx_per_bit,
            sensor_proc: self.proc_per_round,
            sensor_sense: self.sense_per_round,
            ..RoundEnergy::default()
        }
    }

    /// Adds the classical scheme's cost for the same round.
    pub fn with_baseline(&self, mut round: RoundEnergy, q: &QuantSpec) -> RoundEnergy {
        round.baseline_tx = full_value_bit_cost(q) as f64 * self.tx_per_bit;
        round.baseline_rx = request_bit_cost(q) as f64 * self.rx_per_bit;
        round.baseline_proc = self.proc_per_round;
        round.baseline_sense = self.sense_per_round;
        round
    }
}

/// Energy charged in a single round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundEnergy {
    pub sensor_tx: f64,
    pub sensor_rx: f64,
    pub sensor_proc: f64,
    pub sensor_sense: f64,
    pub baseline_tx: f64,
    pub baseline_rx: f64,
    pub baseline_proc: f64,
    pub baseline_sense: f64,
}

/// Running totals; always the in-order sum of the charged [`RoundEnergy`]s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub sensor_tx: f64,
    pub sensor_rx: f64,
    pub sensor_proc: f64,
    pub sensor_sense: f64,
    pub baseline_tx: f64,
    pub baseline_rx: f64,
    pub baseline_proc: f64,
    pub baseline_sense: f64,
}

impl EnergyLedger {
    pub fn charge(&mut self, r: &RoundEnergy) {
        self.sensor_tx += r.sensor_tx;
        self.sensor_rx += r.sensor_rx;
        self.sensor_proc += r.sensor_proc;
        self.sensor_sense += r.sensor_sense;
        self.baseline_tx += r.baseline_tx;
        self.baseline_rx += r.baseline_rx;
        self.baseline_proc += r.baseline_proc;
        self.baseline_sense += r.baseline_sense;
    }

    pub fn replay<'a>(rounds: impl IntoIterator<Item = &'a RoundEnergy>) -> Self {
        let mut ledger = Self::default();
        for r in rounds {
            ledger.charge(r);
        }
        ledger
    }

    /// Receive, processing and sensing, i.e. everything except transmission.
    pub fn sensor_non_tx(&self) -> f64 {
        self.sensor_rx + self.sensor_proc + self.sensor_sense
    }

    pub fn baseline_non_tx(&self) -> f64 {
        self.baseline_rx + self.baseline_proc + self.baseline_sense
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reductions {
    /// Baseline over scheme transmission energy.
    pub tx_reduction_ratio: f64,
    /// Baseline over scheme receive + processing + sensing energy.
    pub proc_reduction_ratio: f64,
    /// The scheme transmitted nothing; the ratio is taken against one
    /// minimum-size reply instead.
    pub tx_infinite: bool,
    /// The scheme spent nothing on the non-transmit side; the ratio is taken
    /// against one contacted round instead.
    pub proc_infinite: bool,
}

/// Baseline/scheme ratios. A zero scheme cost is replaced by the smallest
/// nonzero cost it could have had and flagged. Ratios are 1 when both sides
/// are zero.
pub fn compute_reductions(ledger: &EnergyLedger, energy: &EnergyModel, q: &QuantSpec) -> Reductions {
    let min_reply = (REPLY_HEADER_BITS + 1) as f64 * energy.tx_per_bit;
    let min_round = request_bit_cost(q) as f64 * energy.rx_per_bit
        + energy.proc_per_round
        + energy.sense_per_round;
    let (tx_reduction_ratio, tx_infinite) = ratio(ledger.baseline_tx, ledger.sensor_tx, min_reply);
    let (proc_reduction_ratio, proc_infinite) =
        ratio(ledger.baseline_non_tx(), ledger.sensor_non_tx(), min_round);
    Reductions {
        tx_reduction_ratio,
        proc_reduction_ratio,
        tx_infinite,
        proc_infinite,
    }
}

fn ratio(baseline: f64, scheme: f64, floor: f64) -> (f64, bool) {
    if scheme > 0.0 {
        (baseline / scheme, false)
    } else if baseline > 0.0 && floor > 0.0 {
        (baseline / floor, true)
    } else {
        (1.0, false)
    }
}
