//! Channel tracking for RIS-aided mmWave links.
//!
//! A base station with a linear array receives a user's uplink pilot through
//! a planar reconfigurable surface. The user moves every slot; the trackers
//! follow the two cascaded angle components `(x_e, x_a)` that the reflected
//! channel exposes:
//!
//! - [`pf`]: particle filter with a uniform step proposal and systematic
//!   resampling,
//! - [`ekf`]: extended Kalman filter baseline,
//! - [`harness`]: block/slot Monte-Carlo loop, NMSE sweeps, CSV and plot output.

pub mod channel;
pub mod ekf;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod math;
pub mod pf;
pub mod rng;

pub use error::{Error, Result};
pub use math::ComplexVec;
pub use rng::SeededRng;
