//! Monte-Carlo check of the uniform step model used by the particle proposal.
//!
//! Draws user angles, applies one exact mobility step, and measures how
//! often the resulting hidden-state increment falls inside the proposal
//! support, plus the Kolmogorov–Smirnov distance between the increments and
//! the proposal's uniform law.

use std::f64::consts::PI;

use crate::channel::MobilityConfig;
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropcheckReport {
    pub draws: usize,
    pub psi_s: f64,
    pub psi_r: f64,
    /// Fraction of `|Δx_e| ≤ ψ_s`.
    pub coverage_e: f64,
    /// Fraction of `|Δx_a| ≤ ψ_s + ψ_r + ψ_s ψ_r`.
    pub coverage_a: f64,
    /// Fraction inside both supports.
    pub coverage: f64,
    pub ks_e: f64,
    pub ks_a: f64,
}

/// Exact increments of `(x_e, x_a)` for one step `(ξ, δ)` from `(ψ_e, ψ_a)`.
/// The surface-to-BS terms cancel.
pub fn exact_increment(psi_e: f64, psi_a: f64, xi: f64, delta: f64) -> (f64, f64) {
    let de = psi_e.cos() - (psi_e + xi).cos();
    let da = psi_e.sin() * psi_a.cos() - (psi_e + xi).sin() * (psi_a + delta).cos();
    (de, da)
}

/// KS distance of `samples` against `U(-half, half)`. Sorts in place.
pub fn ks_uniform(samples: &mut [f64], half: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let cdf = |x: f64| {
        if half == 0.0 {
            if x < 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            ((x + half) / (2.0 * half)).clamp(0.0, 1.0)
        }
    };
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Start angles are uniform over the whole sphere of user directions.
pub fn propcheck(mob: &MobilityConfig, draws: usize, seed: u64) -> PropcheckReport {
    let mut rng = SeededRng::new(seed);
    let se = mob.elevation_support();
    let sa = mob.azimuth_support();
    let mut de = Vec::with_capacity(draws);
    let mut da = Vec::with_capacity(draws);
    let (mut in_e, mut in_a, mut in_both) = (0usize, 0usize, 0usize);
    for _ in 0..draws {
        let psi_e = rng.span(0.0, PI);
        let psi_a = rng.span(0.0, 2.0 * PI);
        let xi = rng.span(-mob.psi_s, mob.psi_s);
        let delta = rng.span(-mob.psi_r, mob.psi_r);
        let (a, b) = exact_increment(psi_e, psi_a, xi, delta);
        let ok_e = a.abs() <= se;
        let ok_a = b.abs() <= sa;
        in_e += ok_e as usize;
        in_a += ok_a as usize;
        in_both += (ok_e && ok_a) as usize;
        de.push(a);
        da.push(b);
    }
    let n = draws.max(1) as f64;
    PropcheckReport {
        draws,
        psi_s: mob.psi_s,
        psi_r: mob.psi_r,
        coverage_e: in_e as f64 / n,
        coverage_a: in_a as f64 / n,
        coverage: in_both as f64 / n,
        ks_e: ks_uniform(&mut de, se),
        ks_a: ks_uniform(&mut da, sa),
    }
}
