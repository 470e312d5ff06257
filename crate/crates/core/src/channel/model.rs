use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ula_steering, ArrayConfig, HiddenState, LinkBudget, PhaseShifts, TrueAngles};
use crate::error::{Error, Result};
use crate::math::{herm_inner_slices, ComplexVec};
use crate::rng::SeededRng;

/// Observation map `h(x) = α √p ⟨w(θ̄), α_RX(θ)⟩ ⟨α_RIS(x), e⟩` with the
/// block-static BS-side factor precomputed.
#[derive(Clone, Debug)]
pub struct ObservationModel {
    prefactor: Complex64,
    alpha_rx: ComplexVec,
    l: usize,
    d_over_lambda: f64,
    sigma2: f64,
}

impl ObservationModel {
    pub fn new(angles: &TrueAngles, budget: &LinkBudget, cfg: &ArrayConfig) -> Result<Self> {
        cfg.validate()?;
        let w = ula_steering(angles.theta_bar.cos(), cfg.n_rx, cfg.d_over_lambda);
        let alpha_rx = ula_steering(angles.theta.cos(), cfg.n_rx, cfg.d_over_lambda);
        let combining = herm_inner_slices(&w, &alpha_rx);
        Ok(Self {
            prefactor: budget.alpha * budget.p_tx.sqrt() * combining,
            alpha_rx,
            l: cfg.l,
            d_over_lambda: cfg.d_over_lambda,
            sigma2: budget.sigma2,
        })
    }

    /// `α √p ⟨w, α_RX⟩`.
    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn alpha_rx(&self) -> &ComplexVec {
        &self.alpha_rx
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn d_over_lambda(&self) -> f64 {
        self.d_over_lambda
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub(crate) fn check(&self, e: &PhaseShifts) -> Result<()> {
        let expected = self.l * self.l;
        if e.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: e.len(),
            });
        }
        Ok(())
    }

    /// `⟨α_RIS(x), e⟩ = Σ_{m,n} exp(+jk(m x_e + n x_a)) e[m l + n]`, evaluated
    /// row by row.
    pub fn cascaded_gain(&self, x: &HiddenState, e: &PhaseShifts) -> Result<Complex64> {
        self.check(e)?;
        Ok(self.gain_unchecked(x, e.as_slice()))
    }

    pub(crate) fn gain_unchecked(&self, x: &HiddenState, e: &[Complex64]) -> Complex64 {
        let l = self.l;
        let k = 2.0 * PI * self.d_over_lambda;
        let mut total = Complex64::new(0.0, 0.0);
        let col: Vec<Complex64> = (0..l)
            .map(|n| Complex64::cis(k * n as f64 * x.x_a))
            .collect();
        for (m, row) in e.chunks_exact(l).enumerate() {
            let row_sum: Complex64 = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            total += Complex64::cis(k * m as f64 * x.x_e) * row_sum;
        }
        total
    }

    /// Cascaded gain together with its partial derivatives in `x_e` and `x_a`.
    pub fn gain_and_gradient(
        &self,
        x: &HiddenState,
        e: &PhaseShifts,
    ) -> Result<(Complex64, Complex64, Complex64)> {
        self.check(e)?;
        let l = self.l;
        let k = 2.0 * PI * self.d_over_lambda;
        let jk = Complex64::new(0.0, k);
        let col: Vec<Complex64> = (0..l)
            .map(|n| Complex64::cis(k * n as f64 * x.x_a))
            .collect();
        let mut g = Complex64::new(0.0, 0.0);
        let mut d_e = Complex64::new(0.0, 0.0);
        let mut d_a = Complex64::new(0.0, 0.0);
        for (m, row) in e.as_slice().chunks_exact(l).enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            let mut sn = Complex64::new(0.0, 0.0);
            for (n, (a, b)) in row.iter().zip(&col).enumerate() {
                let t = a * b;
                s += t;
                sn += t * n as f64;
            }
            let u = Complex64::cis(k * m as f64 * x.x_e);
            g += u * s;
            d_e += u * s * (m as f64);
            d_a += u * sn;
        }
        Ok((g, d_e * jk, d_a * jk))
    }

    /// Noise-free observation `h(x)`.
    pub fn mean(&self, x: &HiddenState, e: &PhaseShifts) -> Result<Complex64> {
        Ok(self.prefactor * self.cascaded_gain(x, e)?)
    }

    pub(crate) fn mean_unchecked(&self, x: &HiddenState, e: &[Complex64]) -> Complex64 {
        self.prefactor * self.gain_unchecked(x, e)
    }

    /// `h(x) + z` with `z ~ CN(0, σ²)`.
    pub fn observe(
        &self,
        x: &HiddenState,
        e: &PhaseShifts,
        rng: &mut SeededRng,
    ) -> Result<Complex64> {
        let mean = self.mean(x, e)?;
        Ok(mean + rng.cgauss_unchecked(self.sigma2))
    }

    /// Effective channel `α_RX(θ) ⟨α_RIS(x), e⟩` (no path gain or power).
    pub fn channel_matrix(&self, x: &HiddenState, e: &PhaseShifts) -> Result<ComplexVec> {
        let g = self.cascaded_gain(x, e)?;
        Ok(self.alpha_rx.scale(g))
    }
}

pub fn observe_mean(
    x: &HiddenState,
    e: &PhaseShifts,
    angles: &TrueAngles,
    budget: &LinkBudget,
    cfg: &ArrayConfig,
) -> Result<Complex64> {
    ObservationModel::new(angles, budget, cfg)?.mean(x, e)
}

pub fn observe(
    x_true: &HiddenState,
    e: &PhaseShifts,
    angles: &TrueAngles,
    budget: &LinkBudget,
    cfg: &ArrayConfig,
    rng: &mut SeededRng,
) -> Result<Complex64> {
    ObservationModel::new(angles, budget, cfg)?.observe(x_true, e, rng)
}

pub fn channel_matrix(
    x: &HiddenState,
    e: &PhaseShifts,
    angles: &TrueAngles,
    cfg: &ArrayConfig,
) -> Result<ComplexVec> {
    cfg.validate()?;
    let alpha_rx = ula_steering(angles.theta.cos(), cfg.n_rx, cfg.d_over_lambda);
    let expected = cfg.n_elements();
    if e.len() != expected {
        return Err(Error::Dimension {
            expected,
            got: e.len(),
        });
    }
    let ris = super::cascaded_response(x, cfg.l, cfg.d_over_lambda);
    Ok(alpha_rx.scale(herm_inner_slices(&ris, e)))
}
