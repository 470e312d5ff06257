//! Complex-vector arithmetic used by the signal model.
//!
//! Only the handful of operations the channel model needs: Kronecker and
//! Hadamard products and the Hermitian inner product. Storage is a contiguous
//! `Vec<Complex64>`; the Kronecker product is index-ordered so that entry
//! `i * b.len() + j` holds `a[i] * b[j]`.

use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Non-empty vector of finite complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    /// Wraps `entries`, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Argument("complex vector must be non-empty".into()));
        }
        if let Some(i) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Argument(format!("non-finite entry at index {i}")));
        }
        Ok(Self(entries))
    }

    /// Constructor for values produced by the model itself, which are finite
    /// by construction.
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn ones(len: usize) -> Self {
        Self::from_vec_unchecked(vec![Complex64::new(1.0, 0.0); len.max(1)])
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist_sqr(&self, other: &ComplexVec) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }
}

impl Deref for ComplexVec {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexVec, b: &ComplexVec) -> ComplexVec {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for ai in a.iter() {
        out.extend(b.iter().map(|bj| ai * bj));
    }
    ComplexVec(out)
}

/// Entrywise product `a ⊙ b`.
pub fn hadamard(a: &ComplexVec, b: &ComplexVec) -> Result<ComplexVec> {
    check_len(a.len(), b.len())?;
    Ok(ComplexVec(
        a.iter().zip(b.iter()).map(|(x, y)| x * y).collect(),
    ))
}

/// Hermitian inner product `aᴴ b = Σ conj(a[i]) · b[i]`.
pub fn herm_inner(a: &ComplexVec, b: &ComplexVec) -> Result<Complex64> {
    check_len(a.len(), b.len())?;
    Ok(herm_inner_slices(a, b))
}

pub(crate) fn herm_inner_slices(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
