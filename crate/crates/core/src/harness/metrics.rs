use crate::error::{Error, Result};
use crate::math::ComplexVec;
use crate::rng::SeededRng;

/// Per-slot normalised squared error `‖Ĥ - H‖² / ‖H‖²`.
pub fn nmse(h_hat: &ComplexVec, h_true: &ComplexVec) -> Result<f64> {
    let err = h_hat.dist_sqr(h_true)?;
    let pow = h_true.norm_sqr();
    if !(pow > 0.0) {
        return Err(Error::Metric("true channel has zero power".into()));
    }
    Ok(err / pow)
}

/// Separate running sums of squared error and true power; NMSE is their
/// ratio, i.e. `E‖Ĥ - H‖² / E‖H‖²` over everything accumulated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NmseAccumulator {
    pub err: f64,
    pub pow: f64,
    pub count: u64,
}

impl NmseAccumulator {
    pub fn push(&mut self, h_hat: &ComplexVec, h_true: &ComplexVec) -> Result<()> {
        self.push_terms(h_hat.dist_sqr(h_true)?, h_true.norm_sqr());
        Ok(())
    }

    pub fn push_terms(&mut self, err: f64, pow: f64) {
        self.err += err;
        self.pow += pow;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &NmseAccumulator) {
        self.err += other.err;
        self.pow += other.pow;
        self.count += other.count;
    }

    pub fn ratio(&self) -> Result<f64> {
        if !(self.pow > 0.0) {
            return Err(Error::Metric(
                "accumulated true-channel power is zero".into(),
            ));
        }
        Ok(self.err / self.pow)
    }
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Paired block bootstrap: the fraction of resamples (blocks drawn with
/// replacement, same indices for both) in which `NMSE(a) <= NMSE(b)`.
pub fn bootstrap_prob_le(
    a: &[NmseAccumulator],
    b: &[NmseAccumulator],
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Argument(
            "bootstrap needs equal, non-empty block lists".into(),
        ));
    }
    let n = a.len();
    let mut rng = SeededRng::new(seed);
    let mut hits = 0usize;
    for _ in 0..replicates {
        let mut sa = NmseAccumulator::default();
        let mut sb = NmseAccumulator::default();
        for _ in 0..n {
            let i = ((rng.unit() * n as f64) as usize).min(n - 1);
            sa.merge(&a[i]);
            sb.merge(&b[i]);
        }
        if sa.ratio()? <= sb.ratio()? {
            hits += 1;
        }
    }
    Ok(hits as f64 / replicates as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn h() -> ComplexVec {
        ComplexVec::new(vec![Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)]).unwrap()
    }

    #[test]
    fn nmse_examples() {
        let h = h();
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        let zero = ComplexVec::new(vec![Complex64::new(0.0, 0.0); 2]).unwrap();
        assert!((nmse(&zero, &h).unwrap() - 1.0).abs() < 1e-15);
        let twice = h.scale(Complex64::new(2.0, 0.0));
        assert!((nmse(&twice, &h).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(nmse(&h, &zero), Err(Error::Metric(_))));
    }

    #[test]
    fn accumulator_is_ratio_of_sums() {
        let mut acc = NmseAccumulator::default();
        acc.push_terms(1.0, 10.0);
        acc.push_terms(3.0, 2.0);
        // Mean of per-slot ratios would be 0.8; ratio of sums is 1/3.
        assert!((acc.ratio().unwrap() - 4.0 / 12.0).abs() < 1e-15);
        assert!(NmseAccumulator::default().ratio().is_err());
    }

    #[test]
    fn bootstrap_clear_ordering() {
        let a: Vec<_> = (0..50)
            .map(|i| NmseAccumulator {
                err: 0.1 + 0.001 * i as f64,
                pow: 1.0,
                count: 1,
            })
            .collect();
        let b: Vec<_> = (0..50)
            .map(|i| NmseAccumulator {
                err: 0.5 + 0.001 * i as f64,
                pow: 1.0,
                count: 1,
            })
            .collect();
        assert_eq!(bootstrap_prob_le(&a, &b, 200, 1).unwrap(), 1.0);
        assert_eq!(bootstrap_prob_le(&b, &a, 200, 1).unwrap(), 0.0);
    }
}
