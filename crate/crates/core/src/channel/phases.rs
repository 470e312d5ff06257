use std::f64::consts::PI;
use std::ops::Deref;

use num_complex::Complex64;

use super::{cascaded_response, HiddenState};
use crate::error::{Error, Result};
use crate::math::ComplexVec;
use crate::rng::SeededRng;

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Unit-modulus surface configuration `e`, length `l²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseShifts(ComplexVec);

impl PhaseShifts {
    pub fn new(e: ComplexVec) -> Result<Self> {
        if let Some(i) = e
            .iter()
            .position(|z| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
        {
            return Err(Error::Argument(format!(
                "phase shift {i} has modulus {}",
                e[i].norm()
            )));
        }
        Ok(Self(e))
    }

    /// Builds from phases in radians.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        let e = phases.iter().map(|&p| Complex64::cis(p)).collect();
        Self::new(ComplexVec::new(e)?)
    }

    pub fn as_vec(&self) -> &ComplexVec {
        &self.0
    }

    /// Same configuration rotated by a common phase.
    pub fn rotated(&self, phase: f64) -> Self {
        Self(self.0.scale(Complex64::cis(phase)))
    }
}

impl Deref for PhaseShifts {
    type Target = ComplexVec;

    fn deref(&self) -> &ComplexVec {
        &self.0
    }
}

/// Beam-matched configuration: the cascaded response at the estimate, so
/// the reflected contributions add in phase when the estimate is exact.
pub fn beam_match_phases(x_hat: &HiddenState, l: usize, d_over_lambda: f64) -> PhaseShifts {
    PhaseShifts(cascaded_response(x_hat, l, d_over_lambda))
}

/// Independent uniform phases on every element.
pub fn random_phases(l: usize, rng: &mut SeededRng) -> PhaseShifts {
    let n = l.max(1) * l.max(1);
    let e = (0..n)
        .map(|_| Complex64::cis(rng.span(0.0, 2.0 * PI)))
        .collect();
    PhaseShifts(ComplexVec::from_vec_unchecked(e))
}
