//! Scene geometry and the angle convention.
//!
//! Global frame is right-handed, metres. The surface is mounted in the x-z
//! plane facing +y:
//!
//! * the vertical array axis (row index `m`, elevation reference) is +z,
//! * the horizontal array axis (column index `n`) is +x,
//! * the boresight normal is +y.
//!
//! For a unit direction `r` leaving the surface, elevation is the angle from
//! +z and azimuth is measured in the x-y plane from +x, so the direction
//! cosines along the two array axes are `cos(el)` and `sin(el) cos(az)`.
//! Boresight is therefore `el = az = 90°`. Mirroring a point through the
//! surface plane (y → -y) negates its azimuth.
//!
//! The BS array lies along +x; `theta` is the angle between +x and the
//! direction from the BS towards the surface.

use num_complex::Complex64;

use super::{ArrayConfig, TrueAngles};
use crate::error::{Error, Result};

/// Surface frame as (vertical axis, horizontal axis, boresight normal).
pub const RIS_FRAME: ([f64; 3], [f64; 3], [f64; 3]) =
    ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);

const MIN_SEPARATION_M: f64 = 1e-9;

/// Reference distance for the path-gain model.
const REFERENCE_DISTANCE_M: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub bs_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    pub ue_pos: [f64; 3],
}

impl Geometry {
    pub fn new(bs_pos: [f64; 3], ris_pos: [f64; 3], ue_pos: [f64; 3]) -> Result<Self> {
        let g = Self {
            bs_pos,
            ris_pos,
            ue_pos,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.bs_pos, self.ris_pos, self.ue_pos];
        if all.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("positions must be finite".into()));
        }
        if self.ris_bs_distance() <= MIN_SEPARATION_M {
            return Err(Error::Geometry("surface and BS positions coincide".into()));
        }
        if self.ue_ris_distance() <= MIN_SEPARATION_M {
            return Err(Error::Geometry(
                "surface and user positions coincide".into(),
            ));
        }
        Ok(())
    }

    pub fn ris_bs_distance(&self) -> f64 {
        norm(sub(self.bs_pos, self.ris_pos))
    }

    pub fn ue_ris_distance(&self) -> f64 {
        norm(sub(self.ue_pos, self.ris_pos))
    }

    pub fn with_ue(mut self, ue_pos: [f64; 3]) -> Self {
        self.ue_pos = ue_pos;
        self
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Elevation/azimuth of `dir` in the surface frame.
fn surface_angles(dir: [f64; 3]) -> (f64, f64) {
    let (vert, horiz, normal) = RIS_FRAME;
    let r = norm(dir);
    let cv = (dot(dir, vert) / r).clamp(-1.0, 1.0);
    let el = cv.acos();
    let az = dot(dir, normal).atan2(dot(dir, horiz));
    (el, az)
}

/// Derives all angles from positions. `theta_bar` is set equal to `theta`.
pub fn angles_from_geometry(geo: &Geometry) -> Result<TrueAngles> {
    geo.validate()?;
    let (phi_e, phi_a) = surface_angles(sub(geo.bs_pos, geo.ris_pos));
    let (psi_e, psi_a) = surface_angles(sub(geo.ue_pos, geo.ris_pos));
    let to_ris = sub(geo.ris_pos, geo.bs_pos);
    let cos_theta = (to_ris[0] / norm(to_ris)).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    Ok(TrueAngles {
        theta,
        theta_bar: theta,
        phi_e,
        phi_a,
        psi_e,
        psi_a,
    })
}

/// Product-distance power-law path gain with exponent 2.
pub fn channel_gain(geo: &Geometry, cfg: &ArrayConfig) -> Result<Complex64> {
    channel_gain_with(geo, cfg, 2.0)
}

/// `α = sqrt(C0 · (d_RB · d_UR / d0²)^(-κ))` where `C0 = (λ / 4π d0)²` is the
/// free-space gain at the 1 m reference distance. Phase is zero.
pub fn channel_gain_with(geo: &Geometry, cfg: &ArrayConfig, kappa: f64) -> Result<Complex64> {
    let d1 = geo.ris_bs_distance();
    let d2 = geo.ue_ris_distance();
    if d1 <= MIN_SEPARATION_M || d2 <= MIN_SEPARATION_M {
        return Err(Error::Geometry("zero link distance".into()));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Argument(format!(
            "path-loss exponent must be positive, got {kappa}"
        )));
    }
    let d0 = REFERENCE_DISTANCE_M;
    let c0 = (cfg.wavelength() / (4.0 * std::f64::consts::PI * d0)).powi(2);
    let gain = c0 * (d1 * d2 / (d0 * d0)).powf(-kappa);
    Ok(Complex64::new(gain.sqrt(), 0.0))
}
