//! Seeded random source shared by every stochastic part of the simulator.
//!
//! Backed by ChaCha8 so that a given `(seed, stream)` pair yields the same
//! draws on every platform. Independent simulation units (blocks, trackers)
//! get their own stream rather than sharing a generator.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Stream ids used when deriving per-block generators.
pub mod stream {
    /// Mobility random walk and receiver noise.
    pub const CHANNEL: u64 = 0;
    /// Particle proposals, resampling offsets, tracker init perturbation.
    pub const TRACKER: u64 = 1;
    /// Random phase-shift policy.
    pub const PHASES: u64 = 2;
    /// Per-block user position jitter.
    pub const PLACEMENT: u64 = 3;
}

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Generator for `seed` on an independent ChaCha stream.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::Argument(format!(
                "uniform bounds out of order: [{lo}, {hi}]"
            )));
        }
        Ok(self.span(lo, hi))
    }

    /// `uniform` without the bound check; callers guarantee `lo <= hi`.
    #[inline]
    pub(crate) fn span(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi);
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * self.unit()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
    pub fn cgauss(&mut self, variance: f64) -> Result<Complex64> {
        if !(variance >= 0.0) {
            return Err(Error::Argument(format!("negative variance {variance}")));
        }
        Ok(self.cgauss_unchecked(variance))
    }

    #[inline]
    pub(crate) fn cgauss_unchecked(&mut self, variance: f64) -> Complex64 {
        // Draw both components even when variance is zero so the stream
        // position does not depend on the noise level.
        let re = self.standard_normal();
        let im = self.standard_normal();
        let s = (variance / 2.0).sqrt();
        Complex64::new(re * s, im * s)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

pub fn sample_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> Result<f64> {
    rng.uniform(lo, hi)
}

pub fn sample_cgauss(rng: &mut SeededRng, variance: f64) -> Result<Complex64> {
    rng.cgauss(variance)
}
