//! Extended Kalman filter baseline.
//!
//! Random-walk state model with the observation map linearised at the
//! prediction. The complex measurement is stacked as `(Re y, Im y)` with
//! per-component noise `σ²/2`, which carries the same total power as
//! `CN(0, σ²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{HiddenState, MobilityConfig, ObservationModel, PhaseShifts};
use crate::error::{Error, Result};

/// Row-major 2x2 real matrix.
pub type Mat2 = [[f64; 2]; 2];

pub const ZERO: Mat2 = [[0.0; 2]; 2];
pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn diag(a: f64, b: f64) -> Mat2 {
    [[a, 0.0], [0.0, b]]
}

fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn mul_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

pub fn frobenius(a: &Mat2) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

fn symmetrize(a: &Mat2) -> Mat2 {
    let off = 0.5 * (a[0][1] + a[1][0]);
    [[a[0][0], off], [off, a[1][1]]]
}

/// How the process covariance is derived from the per-slot step bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuMode {
    /// `diag(ψ_s², ψ_r²) / 3`, the variance of the uniform increments.
    #[default]
    Variance,
    /// `diag(ψ_s, ψ_r)` taken literally.
    StepBound,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EkfConfig {
    pub q_u: Mat2,
    /// Complex measurement-noise variance `σ²`.
    pub q_v: f64,
}

impl EkfConfig {
    pub fn new(q_u: Mat2, q_v: f64) -> Result<Self> {
        let cfg = Self { q_u, q_v };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_mobility(mob: &MobilityConfig, sigma2: f64, mode: QuMode) -> Result<Self> {
        let q_u = match mode {
            QuMode::Variance => diag(mob.psi_s.powi(2) / 3.0, mob.psi_r.powi(2) / 3.0),
            QuMode::StepBound => diag(mob.psi_s, mob.psi_r),
        };
        Self::new(q_u, sigma2)
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.q_u;
        let sym = (q[0][1] - q[1][0]).abs() <= 1e-15 * frobenius(q).max(1.0);
        let psd = q[0][0] >= 0.0 && q[1][1] >= 0.0 && det(q) >= -1e-30;
        if !(sym && psd) {
            return Err(Error::Argument(
                "process covariance must be symmetric PSD".into(),
            ));
        }
        if !(self.q_v >= 0.0 && self.q_v.is_finite()) {
            return Err(Error::Argument(format!(
                "measurement variance must be non-negative, got {}",
                self.q_v
            )));
        }
        Ok(())
    }

    fn measurement_cov(&self) -> Mat2 {
        diag(self.q_v / 2.0, self.q_v / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EkfState {
    pub x_hat: HiddenState,
    pub m: Mat2,
}

impl EkfState {
    /// Block start: exact state, zero error covariance.
    pub fn at(x0: HiddenState) -> Self {
        Self { x_hat: x0, m: ZERO }
    }
}

/// Jacobian of the stacked `(Re h, Im h)` with respect to `(x_e, x_a)`.
pub fn jacobian_h(x: &HiddenState, e: &PhaseShifts, model: &ObservationModel) -> Result<Mat2> {
    let (_, de, da) = model.gain_and_gradient(x, e)?;
    let g = model.prefactor();
    let (he, ha) = (g * de, g * da);
    Ok([[he.re, ha.re], [he.im, ha.im]])
}

pub fn ekf_predict(s: &EkfState, cfg: &EkfConfig) -> EkfState {
    EkfState {
        x_hat: s.x_hat,
        m: add(&s.m, &cfg.q_u),
    }
}

/// Extra information from a correction, for diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CorrectInfo {
    pub innovation: f64,
    pub gain_norm: f64,
    /// Innovation covariance was singular and had to be regularised.
    pub regularized: bool,
}

const REGULARIZATION: f64 = 1e-12;

/// Measurement update at the predicted state.
pub fn ekf_correct(
    s: &EkfState,
    y: Complex64,
    e: &PhaseShifts,
    cfg: &EkfConfig,
    model: &ObservationModel,
) -> Result<(EkfState, CorrectInfo)> {
    let c = jacobian_h(&s.x_hat, e, model)?;
    let r = y - model.mean(&s.x_hat, e)?;
    let mct = mul(&s.m, &transpose(&c));
    let mut innov_cov = add(&cfg.measurement_cov(), &mul(&c, &mct));
    let mut regularized = false;
    let scale = innov_cov[0][0].abs() + innov_cov[1][1].abs();
    if !(det(&innov_cov) > f64::EPSILON * scale * scale) {
        // Relative to the covariance scale, or absolute when it is all zero.
        let eps = if scale > 0.0 {
            REGULARIZATION * scale
        } else {
            REGULARIZATION
        };
        innov_cov = add(&innov_cov, &diag(eps, eps));
        regularized = true;
    }
    let inv = inverse(&innov_cov)
        .ok_or_else(|| Error::Numerical("innovation covariance is singular".into()))?;
    let k = mul(&mct, &inv);
    let dx = mul_vec(&k, [r.re, r.im]);
    let m = symmetrize(&mul(&sub(&IDENTITY, &mul(&k, &c)), &s.m));
    let x_hat = HiddenState::new(s.x_hat.x_e + dx[0], s.x_hat.x_a + dx[1]);
    if !(x_hat.x_e.is_finite() && x_hat.x_a.is_finite()) {
        return Err(Error::Numerical("non-finite state after correction".into()));
    }
    Ok((
        EkfState { x_hat, m },
        CorrectInfo {
            innovation: r.norm(),
            gain_norm: frobenius(&k),
            regularized,
        },
    ))
}

pub fn ekf_step(
    s: &EkfState,
    y: Complex64,
    e: &PhaseShifts,
    cfg: &EkfConfig,
    model: &ObservationModel,
) -> Result<(EkfState, HiddenState, CorrectInfo)> {
    let pred = ekf_predict(s, cfg);
    let (next, info) = ekf_correct(&pred, y, e, cfg, model)?;
    Ok((next, next.x_hat, info))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EkfDiagnostics {
    pub steps: u64,
    pub innovation_sum: f64,
    pub gain_norm_sum: f64,
    pub regularizations: u64,
}

#[derive(Clone, Debug)]
pub struct EkfTracker {
    cfg: EkfConfig,
    state: EkfState,
    diag: EkfDiagnostics,
}

impl EkfTracker {
    pub fn new(x0: HiddenState, cfg: EkfConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: EkfState::at(x0),
            diag: EkfDiagnostics::default(),
        })
    }

    pub fn state(&self) -> &EkfState {
        &self.state
    }

    pub fn diagnostics(&self) -> &EkfDiagnostics {
        &self.diag
    }

    pub fn step(
        &mut self,
        y: Complex64,
        model: &ObservationModel,
        e: &PhaseShifts,
    ) -> Result<HiddenState> {
        let (next, est, info) = ekf_step(&self.state, y, e, &self.cfg, model)?;
        self.state = next;
        self.diag.steps += 1;
        self.diag.innovation_sum += info.innovation;
        self.diag.gain_norm_sum += info.gain_norm;
        self.diag.regularizations += info.regularized as u64;
        Ok(est)
    }
}
