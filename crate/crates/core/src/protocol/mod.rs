//! Wire messages and the per-round rules on each side of the link.
//!
//! A round is one [`RequestPacket`] from the base station carrying a
//! prediction `E` and tolerance `α`, and at most one [`ReplyPacket`] from the
//! sensor carrying the signed difference `V = M - E`. The sensor stays silent
//! while `|V| <= α`; the base station then stores `E` itself, otherwise it
//! stores `E + V`.

mod codec;
mod probe;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codec::{
    decode_reply, decode_request, encode_reply, encode_request, full_value_bit_cost,
    reply_bit_cost, request_bit_cost, Bits, REPLY_HEADER_BITS, REQUEST_HEADER_BITS,
};
pub use probe::{link_probe, LinkState, DEFAULT_SENTINEL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestPacket {
    pub seq: u16,
    pub predicted_e: f64,
    pub alpha: f64,
    pub probe_flag: bool,
}

impl RequestPacket {
    pub fn data(seq: u16, predicted_e: f64, alpha: f64) -> Self {
        Self {
            seq,
            predicted_e,
            alpha,
            probe_flag: false,
        }
    }

    pub fn probe(seq: u16, predicted_e: f64) -> Self {
        Self {
            seq,
            predicted_e,
            alpha: 0.0,
            probe_flag: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplyPacket {
    pub seq: u16,
    pub variance_v: f64,
}

/// Fixed-point parameters shared by both ends of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantSpec {
    /// Quantization step for every real-valued field.
    pub resolution: f64,
    /// Width of the prediction and tolerance fields in a request.
    pub value_bits: u32,
    /// Largest magnitude width a reply may carry.
    pub max_mag_bits: u32,
}

impl Default for QuantSpec {
    fn default() -> Self {
        Self {
            resolution: 1.0 / 16.0,
            value_bits: 16,
            max_mag_bits: 24,
        }
    }
}

impl QuantSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::config("quant.resolution", "must be > 0"));
        }
        if !(1..=32).contains(&self.value_bits) {
            return Err(Error::config("quant.value_bits", "must be in 1..=32"));
        }
        if !(1..=32).contains(&self.max_mag_bits) {
            return Err(Error::config("quant.max_mag_bits", "must be in 1..=32"));
        }
        Ok(())
    }

    /// Prediction as carried on the wire (round to nearest step).
    pub fn quantize_e(&self, e: f64) -> f64 {
        (e / self.resolution).round() * self.resolution
    }

    /// Tolerance as carried on the wire. Rounded down so a silent sensor is
    /// never further than the configured tolerance from the prediction.
    pub fn quantize_alpha(&self, alpha: f64) -> f64 {
        (alpha / self.resolution).floor() * self.resolution
    }

    pub fn quantize_v(&self, v: f64) -> f64 {
        let q = (v.abs() / self.resolution).round() * self.resolution;
        if v.is_sign_negative() {
            -q
        } else {
            q
        }
    }

    pub fn quantize_request(&self, req: &RequestPacket) -> RequestPacket {
        RequestPacket {
            predicted_e: self.quantize_e(req.predicted_e),
            alpha: self.quantize_alpha(req.alpha),
            ..*req
        }
    }

    pub fn quantize_reply(&self, rep: &ReplyPacket) -> ReplyPacket {
        ReplyPacket {
            variance_v: self.quantize_v(rep.variance_v),
            ..*rep
        }
    }
}

/// Node-side state. Measurements are never stored; only the last request
/// sequence number is kept for diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorState {
    pub sensor_id: u32,
    pub last_seq_seen: Option<u16>,
}

impl SensorState {
    pub fn new(sensor_id: u32) -> Self {
        Self {
            sensor_id,
            last_seq_seen: None,
        }
    }
}

/// The sensor's reaction to one request: reply with `V = M - E` iff `V` lies
/// strictly outside `[-α, α]`.
pub fn sensor_step(
    state: &mut SensorState,
    req: &RequestPacket,
    measured_m: f64,
) -> Option<ReplyPacket> {
    state.last_seq_seen = Some(req.seq);
    let v = measured_m - req.predicted_e;
    (v < -req.alpha || v > req.alpha).then_some(ReplyPacket {
        seq: req.seq,
        variance_v: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Replied,
    SilentAccepted,
    SkippedFill,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Replied => "replied",
            Source::SilentAccepted => "silent_accepted",
            Source::SkippedFill => "skipped_fill",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoredValue {
    pub t: usize,
    pub value_s: f64,
    pub source: Source,
}

/// Base-station store rule: `S = E + V` on a reply, `S = E` on silence.
pub fn bs_store(e: f64, reply: Option<&ReplyPacket>, t: usize) -> StoredValue {
    match reply {
        Some(rep) => StoredValue {
            t,
            value_s: e + rep.variance_v,
            source: Source::Replied,
        },
        None => StoredValue {
            t,
            value_s: e,
            source: Source::SilentAccepted,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(e: f64, alpha: f64, m: f64) -> Option<ReplyPacket> {
        sensor_step(&mut SensorState::new(0), &RequestPacket::data(9, e, alpha), m)
    }

    #[test]
    fn inside_tolerance_is_silent() {
        assert_eq!(step(20.0, 1.0, 20.5), None);
    }

    #[test]
    fn zero_prediction_forces_full_reply() {
        let rep = step(0.0, 1.0, 25.0).unwrap();
        assert_eq!(rep.variance_v, 25.0);
        assert_eq!(rep.seq, 9);
    }

    #[test]
    fn boundary_is_silent() {
        assert_eq!(step(20.0, 1.0, 21.0), None);
        assert_eq!(step(20.0, 1.0, 19.0), None);
        assert!(step(20.0, 1.0, 21.0625).is_some());
    }

    #[test]
    fn sensor_records_seq() {
        let mut s = SensorState::new(4);
        sensor_step(&mut s, &RequestPacket::data(77, 0.0, 0.0), 0.0);
        assert_eq!(s.last_seq_seen, Some(77));
    }

    #[test]
    fn store_rule() {
        let r = ReplyPacket { seq: 0, variance_v: 25.0 };
        let s = bs_store(0.0, Some(&r), 1);
        assert_eq!((s.value_s, s.source), (25.0, Source::Replied));

        let s = bs_store(20.3, None, 2);
        assert_eq!((s.value_s, s.source, s.t), (20.3, Source::SilentAccepted, 2));

        let r = ReplyPacket { seq: 0, variance_v: -3.5 };
        assert_eq!(bs_store(20.0, Some(&r), 3).value_s, 16.5);
    }

    #[test]
    fn alpha_quantizes_down() {
        let q = QuantSpec::default();
        assert_eq!(q.quantize_alpha(0.1), 0.0625);
        assert_eq!(q.quantize_alpha(1.0), 1.0);
        assert_eq!(q.quantize_e(20.5), 20.5);
        assert_eq!(q.quantize_e(0.03), 0.0);
        assert_eq!(q.quantize_e(0.04), 0.0625);
    }

    #[test]
    fn quant_spec_bounds() {
        assert!(QuantSpec::default().validate().is_ok());
        assert!(QuantSpec { resolution: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuantSpec { value_bits: 33, ..Default::default() }.validate().is_err());
        assert!(QuantSpec { max_mag_bits: 0, ..Default::default() }.validate().is_err());
    }

    proptest! {
        // Reply rule is the complement of the acceptance band M - α <= E <= M + α.
        #[test]
        fn reply_iff_outside_band(
            m in -1e4f64..1e4,
            e in -1e4f64..1e4,
            alpha in 0f64..100.0,
        ) {
            let in_band = m - alpha <= e && e <= m + alpha;
            let replied = step(e, alpha, m).is_some();
            prop_assert_eq!(replied, (m - e).abs() > alpha);
            // The two formulations can disagree only through rounding of m ± α.
            if ((m - e).abs() - alpha).abs() > 1e-9 * (1.0 + m.abs() + alpha) {
                prop_assert_eq!(replied, !in_band);
            }
        }

        #[test]
        fn sensor_is_stateless(
            rounds in prop::collection::vec((-50f64..50.0, -50f64..50.0, 0f64..5.0), 1..40),
            seed in any::<u64>(),
        ) {
            let mut fresh = SensorState::new(1);
            let expected: Vec<_> = rounds
                .iter()
                .map(|&(e, m, a)| sensor_step(&mut fresh, &RequestPacket::data(0, e, a), m))
                .collect();

            // Replay in a seed-dependent rotated order through one long-lived state.
            let mut shared = SensorState::new(1);
            let k = (seed as usize) % rounds.len();
            for i in (k..rounds.len()).chain(0..k) {
                let (e, m, a) = rounds[i];
                let out = sensor_step(&mut shared, &RequestPacket::data(0, e, a), m);
                prop_assert_eq!(out, expected[i]);
            }
        }
    }
}
