//! RIS-aided mmWave signal model.
//!
//! A single-antenna user reaches an `n_rx`-element ULA base station only via
//! an `L x L` reflecting surface. The base-station side of the path is static
//! within a block; the user-side angles random-walk from slot to slot. The
//! cascaded surface response depends on the angles only through the two
//! direction-cosine differences held in [`HiddenState`], which is what the
//! trackers estimate.

mod array;
mod geometry;
mod mobility;
mod model;
mod phases;

pub use array::{cascaded_response, cascaded_state, ula_steering, upa_response};
pub use geometry::{angles_from_geometry, channel_gain, channel_gain_with, Geometry, RIS_FRAME};
pub use mobility::{step_true_angles, MobilityConfig};
pub use model::{channel_matrix, observe, observe_mean, ObservationModel};
pub use phases::{beam_match_phases, random_phases, PhaseShifts};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Array dimensions and electrical spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayConfig {
    /// Base-station antenna count.
    pub n_rx: usize,
    /// Surface side length; the surface has `l * l` elements.
    pub l: usize,
    pub d_over_lambda: f64,
    pub carrier_hz: f64,
}

impl ArrayConfig {
    pub fn new(n_rx: usize, l: usize, d_over_lambda: f64, carrier_hz: f64) -> Result<Self> {
        let cfg = Self {
            n_rx,
            l,
            d_over_lambda,
            carrier_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 {
            return Err(Error::Argument("n_rx must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(Error::Argument(
                "surface side length must be at least 1".into(),
            ));
        }
        if !(self.d_over_lambda > 0.0 && self.d_over_lambda.is_finite()) {
            return Err(Error::Argument("d_over_lambda must be positive".into()));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::Argument("carrier frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.l * self.l
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
}

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ground-truth angles in radians.
///
/// `phi_*` describe the surface-to-BS departure and stay fixed for a block;
/// `psi_*` describe the user direction seen from the surface and move every
/// slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrueAngles {
    /// Angle of arrival at the BS, measured from the ULA axis.
    pub theta: f64,
    /// Angle the BS combiner is steered to.
    pub theta_bar: f64,
    pub phi_e: f64,
    pub phi_a: f64,
    pub psi_e: f64,
    pub psi_a: f64,
}

/// Cascaded elevation/azimuth components tracked by the filters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HiddenState {
    pub x_e: f64,
    pub x_a: f64,
}

impl HiddenState {
    /// Each component is a difference of two direction cosines.
    pub const BOUND: f64 = 2.0;

    pub const fn new(x_e: f64, x_a: f64) -> Self {
        Self { x_e, x_a }
    }

    pub fn in_bounds(&self) -> bool {
        self.x_e.abs() <= Self::BOUND && self.x_a.abs() <= Self::BOUND
    }

    /// Clamps into the physical box; the flag reports whether anything moved.
    pub fn clamped(self) -> (Self, bool) {
        let c = Self {
            x_e: self.x_e.clamp(-Self::BOUND, Self::BOUND),
            x_a: self.x_a.clamp(-Self::BOUND, Self::BOUND),
        };
        (c, c != self)
    }

    pub fn dist_sqr(&self, other: &HiddenState) -> f64 {
        let de = self.x_e - other.x_e;
        let da = self.x_a - other.x_a;
        de * de + da * da
    }
}

/// Per-block link constants. The training symbol is fixed to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    /// Complex path gain.
    pub alpha: Complex64,
    /// Transmit power in watts.
    pub p_tx: f64,
    /// Receiver noise variance. Zero gives a noiseless channel.
    pub sigma2: f64,
}

impl LinkBudget {
    pub fn new(alpha: Complex64, p_tx: f64, sigma2: f64) -> Result<Self> {
        if !(p_tx > 0.0 && p_tx.is_finite()) {
            return Err(Error::Argument(format!(
                "transmit power must be positive, got {p_tx}"
            )));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::Argument(format!(
                "noise variance must be non-negative, got {sigma2}"
            )));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::Argument("channel gain must be finite".into()));
        }
        Ok(Self {
            alpha,
            p_tx,
            sigma2,
        })
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}
