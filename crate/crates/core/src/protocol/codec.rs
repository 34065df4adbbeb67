//! Bit-exact packet layouts, most significant bit first.
//!
//! ```text
//! request: 01 | probe:1 | seq:16 | E:value_bits (two's complement) | α:value_bits (unsigned)
//! reply:   10 | seq:16  | sign:1 | w:5 | magnitude:w
//! ```
//!
//! Real fields are fixed-point multiples of `QuantSpec::resolution`. The reply
//! magnitude field is as wide as the quantized magnitude needs (at least one
//! bit), so small corrections are cheap. Bits after a complete packet are
//! ignored by the decoders.

use bitvec::prelude::*;

use super::{QuantSpec, ReplyPacket, RequestPacket};
use crate::error::{Error, Result};

pub type Bits = BitVec<u8, Msb0>;

const TAG_REQUEST: u8 = 0b01;
const TAG_REPLY: u8 = 0b10;
const TAG_BITS: usize = 2;
const SEQ_BITS: usize = 16;
const WIDTH_FIELD_BITS: usize = 5;

/// Request bits excluding the two value fields.
pub const REQUEST_HEADER_BITS: usize = TAG_BITS + 1 + SEQ_BITS;
/// Reply bits excluding the magnitude field.
pub const REPLY_HEADER_BITS: usize = TAG_BITS + SEQ_BITS + 1 + WIDTH_FIELD_BITS;

fn push(bits: &mut Bits, value: u64, width: usize) {
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
}

struct Reader<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bits: &'a BitSlice<u8, Msb0>) -> Self {
        Self { bits, pos: 0 }
    }

    fn take(&mut self, width: usize) -> Result<u64> {
        let end = self.pos + width;
        if end > self.bits.len() {
            return Err(Error::TruncatedPacket {
                needed: end,
                got: self.bits.len(),
            });
        }
        let v = self.bits[self.pos..end]
            .iter()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
        self.pos = end;
        Ok(v)
    }

    fn tag(&mut self, expected: u8) -> Result<()> {
        let tag = self.take(TAG_BITS)? as u8;
        if tag != expected {
            return Err(Error::BadTypeTag(tag));
        }
        Ok(())
    }
}

fn steps(value: f64, q: &QuantSpec) -> f64 {
    value / q.resolution
}

pub fn request_bit_cost(q: &QuantSpec) -> usize {
    REQUEST_HEADER_BITS + 2 * q.value_bits as usize
}

/// A classical full-value report: tag, seq and one `value_bits` field.
pub fn full_value_bit_cost(q: &QuantSpec) -> usize {
    TAG_BITS + SEQ_BITS + q.value_bits as usize
}

pub fn encode_request(req: &RequestPacket, q: &QuantSpec) -> Result<Bits> {
    let width = q.value_bits;
    let e = steps(req.predicted_e, q).round();
    let half = 2f64.powi(width as i32 - 1);
    if !(e >= -half && e < half) {
        return Err(Error::ValueOverflow {
            field: "predicted_e",
            value: req.predicted_e,
            bits: width,
        });
    }
    let a = steps(req.alpha, q).floor();
    if !(a >= 0.0 && a < 2f64.powi(width as i32)) {
        return Err(Error::ValueOverflow {
            field: "alpha",
            value: req.alpha,
            bits: width,
        });
    }
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };

    let mut bits = Bits::with_capacity(request_bit_cost(q));
    push(&mut bits, TAG_REQUEST.into(), TAG_BITS);
    bits.push(req.probe_flag);
    push(&mut bits, req.seq.into(), SEQ_BITS);
    push(&mut bits, (e as i64 as u64) & mask, width as usize);
    push(&mut bits, a as u64, width as usize);
    Ok(bits)
}

pub fn decode_request(bits: &BitSlice<u8, Msb0>, q: &QuantSpec) -> Result<RequestPacket> {
    let width = q.value_bits as usize;
    let mut r = Reader::new(bits);
    r.tag(TAG_REQUEST)?;
    let probe_flag = r.take(1)? == 1;
    let seq = r.take(SEQ_BITS)? as u16;
    let raw_e = r.take(width)?;
    let raw_a = r.take(width)?;
    // sign-extend
    let shift = 64 - width as u32;
    let e = ((raw_e << shift) as i64) >> shift;
    Ok(RequestPacket {
        seq,
        predicted_e: e as f64 * q.resolution,
        alpha: raw_a as f64 * q.resolution,
        probe_flag,
    })
}

fn reply_magnitude(v: f64, q: &QuantSpec) -> Result<(u64, usize)> {
    let mag = steps(v.abs(), q).round();
    let limit = 2f64.powi(q.max_mag_bits as i32);
    if mag.is_nan() || mag >= limit {
        return Err(Error::ValueOverflow {
            field: "variance_v",
            value: v,
            bits: q.max_mag_bits,
        });
    }
    let mag = mag as u64;
    let width = (64 - mag.leading_zeros() as usize).max(1);
    // the width field itself holds at most 31
    if width >= 1 << WIDTH_FIELD_BITS {
        return Err(Error::ValueOverflow {
            field: "variance_v",
            value: v,
            bits: (1 << WIDTH_FIELD_BITS) - 1,
        });
    }
    Ok((mag, width))
}

/// Exact length of `encode_reply` for a variance of `v`. A zero variance is
/// never sent, but is costed as the minimum reply.
pub fn reply_bit_cost(v: f64, q: &QuantSpec) -> Result<usize> {
    let (_, width) = reply_magnitude(v, q)?;
    Ok(REPLY_HEADER_BITS + width)
}

pub fn encode_reply(rep: &ReplyPacket, q: &QuantSpec) -> Result<Bits> {
    let (mag, width) = reply_magnitude(rep.variance_v, q)?;
    let mut bits = Bits::with_capacity(REPLY_HEADER_BITS + width);
    push(&mut bits, TAG_REPLY.into(), TAG_BITS);
    push(&mut bits, rep.seq.into(), SEQ_BITS);
    bits.push(rep.variance_v.is_sign_negative());
    push(&mut bits, width as u64, WIDTH_FIELD_BITS);
    push(&mut bits, mag, width);
    Ok(bits)
}

pub fn decode_reply(bits: &BitSlice<u8, Msb0>, q: &QuantSpec) -> Result<ReplyPacket> {
    let mut r = Reader::new(bits);
    r.tag(TAG_REPLY)?;
    let seq = r.take(SEQ_BITS)? as u16;
    let negative = r.take(1)? == 1;
    let width = r.take(WIDTH_FIELD_BITS)? as usize;
    let mag = r.take(width)? as f64 * q.resolution;
    Ok(ReplyPacket {
        seq,
        variance_v: if negative { -mag } else { mag },
    })
}
