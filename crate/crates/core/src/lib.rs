//! Sensing-aided uplink channel estimation for wideband multi-antenna OFDM.
//!
//! A radar-style sensing report (scatterer angles and round-trip delays)
//! narrows the angle and delay search of a two-stage sparse estimator run on
//! a comb of sounding pilots.

pub mod channel;
pub mod crb;
pub mod error;
pub mod estimators;
pub mod frontend;
pub mod harness;
pub mod linalg;
pub mod scene;

pub use error::{Error, Result};
