use super::TrueAngles;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Per-slot random-walk bounds for the user-side angles, in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobilityConfig {
    pub psi_s: f64,
    pub psi_r: f64,
}

impl MobilityConfig {
    /// Above this step the small-angle approximations behind the particle
    /// proposal start to degrade.
    pub const SMALL_ANGLE_LIMIT: f64 = 5.0 * std::f64::consts::PI / 180.0;

    pub fn new(psi_s: f64, psi_r: f64) -> Result<Self> {
        for (name, v) in [("psi_s", psi_s), ("psi_r", psi_r)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(Self { psi_s, psi_r })
    }

    pub fn from_degrees(psi_s_deg: f64, psi_r_deg: f64) -> Result<Self> {
        Self::new(psi_s_deg.to_radians(), psi_r_deg.to_radians())
    }

    pub fn exceeds_small_angle(&self) -> bool {
        self.psi_s > Self::SMALL_ANGLE_LIMIT || self.psi_r > Self::SMALL_ANGLE_LIMIT
    }

    /// Half-width of the elevation-state increment support.
    pub fn elevation_support(&self) -> f64 {
        self.psi_s
    }

    /// Half-width of the azimuth-state increment support.
    pub fn azimuth_support(&self) -> f64 {
        self.psi_s + self.psi_r + self.psi_s * self.psi_r
    }
}

/// Advances the user-side angles by one slot: `ψ_e += U(-ψ_s, ψ_s)`, then
/// `ψ_a += U(-ψ_r, ψ_r)`.
pub fn step_true_angles(
    angles: &TrueAngles,
    mob: &MobilityConfig,
    rng: &mut SeededRng,
) -> TrueAngles {
    let xi = rng.span(-mob.psi_s, mob.psi_s);
    let delta = rng.span(-mob.psi_r, mob.psi_r);
    TrueAngles {
        psi_e: angles.psi_e + xi,
        psi_a: angles.psi_a + delta,
        ..*angles
    }
}
