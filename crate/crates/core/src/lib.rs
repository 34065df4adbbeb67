//! Prediction-driven transmission reduction for wireless sensor networks.
//!
//! A base station forecasts each sensor's next reading and sends the forecast
//! together with a tolerance. The sensor answers only when its measurement
//! falls outside the tolerance band, so silence means "the forecast is good".
//! On top of that, a request scheduler borrowed from congestion control stops
//! asking altogether after runs of silent rounds and stores forecasts instead.
//!
//! Modules:
//!
//! - [`trace`]: ground-truth measurement series (CSV ingest, synthetic signals).
//! - [`forecast`]: the base station's predictors (persistence, seasonal naive,
//!   least-squares AR, delay-line neural network) and forecast metrics.
//! - [`protocol`]: request/reply packets, their bit-level codec, the sensor
//!   reply rule, the base-station store rule and the link probe.
//! - [`rma`]: the request management scheduler.
//! - [`sim`]: the round-by-round simulator with energy accounting.

pub mod error;
pub mod forecast;
pub mod protocol;
pub mod rma;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
