use serde::{Deserialize, Serialize};

use super::{ReplyPacket, RequestPacket};
use crate::error::{Error, Result};

/// Prediction used by the second probe; must exceed any plausible reading.
pub const DEFAULT_SENTINEL: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkState {
    /// Replied to the zero probe; the reading is carried along.
    AliveNonzero { measured: f64 },
    AliveZero,
    Dead,
}

/// Two-request link check.
///
/// The first probe predicts 0 with zero tolerance, so any sensor reading a
/// nonzero value must answer with `V = M`. Silence is ambiguous (a zero
/// reading or a dead node), so a second probe predicts `sentinel_l`: a live
/// node reading zero answers `V = -sentinel_l`, within `tolerance`.
///
/// `send` delivers one request and returns the reply, if any.
pub fn link_probe<F>(mut send: F, sentinel_l: f64, tolerance: f64) -> Result<LinkState>
where
    F: FnMut(RequestPacket) -> Option<ReplyPacket>,
{
    if !(sentinel_l.is_finite() && sentinel_l > 0.0) {
        return Err(Error::config("sentinel_l", "must be positive and finite"));
    }
    if let Some(rep) = send(RequestPacket::probe(0, 0.0)) {
        return Ok(LinkState::AliveNonzero {
            measured: rep.variance_v,
        });
    }
    match send(RequestPacket::probe(1, sentinel_l)) {
        None => Ok(LinkState::Dead),
        Some(rep) if (rep.variance_v + sentinel_l).abs() <= tolerance => Ok(LinkState::AliveZero),
        Some(rep) => Err(Error::ProtocolViolation(format!(
            "silent on zero probe but replied V={} to sentinel {}",
            rep.variance_v, sentinel_l
        ))),
    }
}
