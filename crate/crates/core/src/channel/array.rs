use std::f64::consts::PI;

use num_complex::Complex64;

use super::{HiddenState, TrueAngles};
use crate::math::{kron, ComplexVec};

/// ULA steering vector: entry `k` is `exp(+j 2π (d/λ) k cos θ) / √n`.
pub fn ula_steering(cos_angle: f64, n: usize, d_over_lambda: f64) -> ComplexVec {
    let n = n.max(1);
    let scale = 1.0 / (n as f64).sqrt();
    let k = 2.0 * PI * d_over_lambda * cos_angle;
    ComplexVec::from_vec_unchecked(
        (0..n)
            .map(|i| Complex64::from_polar(scale, k * i as f64))
            .collect(),
    )
}

/// One linear factor of the surface response: entry `m` is
/// `exp(-j 2π (d/λ) m c)`. Not normalised.
fn upa_factor(component: f64, l: usize, d_over_lambda: f64) -> ComplexVec {
    let k = -2.0 * PI * d_over_lambda * component;
    ComplexVec::from_vec_unchecked(
        (0..l.max(1))
            .map(|m| Complex64::cis(k * m as f64))
            .collect(),
    )
}

/// Planar surface response `α_v(v_comp) ⊗ α_h(h_comp)`, length `l²`.
pub fn upa_response(v_comp: f64, h_comp: f64, l: usize, d_over_lambda: f64) -> ComplexVec {
    kron(
        &upa_factor(v_comp, l, d_over_lambda),
        &upa_factor(h_comp, l, d_over_lambda),
    )
}

pub fn cascaded_state(angles: &TrueAngles) -> HiddenState {
    HiddenState {
        x_e: angles.phi_e.cos() - angles.psi_e.cos(),
        x_a: angles.phi_e.sin() * angles.phi_a.cos() - angles.psi_e.sin() * angles.psi_a.cos(),
    }
}

/// Closed form of `α_out ⊙ conj(α_in)`: flat entry `m*l + n` is
/// `exp(-j 2π (d/λ) (m x_e + n x_a))`.
pub fn cascaded_response(x: &HiddenState, l: usize, d_over_lambda: f64) -> ComplexVec {
    let l = l.max(1);
    let k = -2.0 * PI * d_over_lambda;
    let mut out = Vec::with_capacity(l * l);
    for m in 0..l {
        for n in 0..l {
            out.push(Complex64::cis(k * (m as f64 * x.x_e + n as f64 * x.x_a)));
        }
    }
    ComplexVec::from_vec_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::hadamard;
    use crate::rng::SeededRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ula_examples() {
        let v = ula_steering(0.0, 4, 0.5);
        assert!(max_err(&v, &[c(0.5, 0.0); 4]) < 1e-15);

        assert_eq!(ula_steering(0.7, 1, 0.5).as_slice(), &[c(1.0, 0.0)]);

        let v = ula_steering(0.5, 4, 0.5);
        let want = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        assert!(max_err(&v, &want) < 1e-15);

        assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn upa_examples() {
        let v = upa_response(0.0, 0.0, 3, 0.5);
        assert!(max_err(&v, &[c(1.0, 0.0); 9]) < 1e-15);

        assert_eq!(upa_response(0.3, -0.2, 1, 0.5).as_slice(), &[c(1.0, 0.0)]);

        let v = upa_response(1.0, 0.0, 2, 0.5);
        let want = [c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)];
        assert!(max_err(&v, &want) < 1e-15);
    }

    #[test]
    fn cascaded_state_examples() {
        let d = |deg: f64| deg.to_radians();
        let a = TrueAngles {
            theta: 1.0,
            theta_bar: 1.0,
            phi_e: 0.7,
            phi_a: 1.9,
            psi_e: 0.7,
            psi_a: 1.9,
        };
        assert_eq!(cascaded_state(&a), HiddenState::new(0.0, 0.0));

        let a = TrueAngles {
            phi_e: d(90.0),
            psi_e: 0.0,
            phi_a: 0.0,
            psi_a: 0.0,
            ..a
        };
        let x = cascaded_state(&a);
        assert!((x.x_e + 1.0).abs() < 1e-15);

        let a = TrueAngles {
            phi_e: d(60.0),
            phi_a: d(30.0),
            psi_e: d(45.0),
            psi_a: d(45.0),
            ..a
        };
        let x = cascaded_state(&a);
        let half_sqrt2 = 2f64.sqrt() / 2.0;
        let want_e = 0.5 - half_sqrt2;
        let want_a = (3f64.sqrt() / 2.0) * (3f64.sqrt() / 2.0) - half_sqrt2 * half_sqrt2;
        assert!((x.x_e - want_e).abs() < 1e-15);
        assert!((x.x_a - want_a).abs() < 1e-15);
    }

    #[test]
    fn cascaded_response_examples() {
        let v = cascaded_response(&HiddenState::new(0.0, 0.0), 4, 0.5);
        assert!(max_err(&v, &[c(1.0, 0.0); 16]) < 1e-15);

        let v = cascaded_response(&HiddenState::new(1.0, 0.0), 2, 0.5);
        let want = [c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)];
        assert!(max_err(&v, &want) < 1e-15);
    }

    #[test]
    fn factorization_identity_random_angles() {
        let mut rng = SeededRng::new(2024);
        for &l in &[2usize, 4, 8] {
            for _ in 0..300 {
                let a = TrueAngles {
                    theta: 0.0,
                    theta_bar: 0.0,
                    phi_e: rng.span(0.0, PI),
                    phi_a: rng.span(-PI, PI),
                    psi_e: rng.span(0.0, PI),
                    psi_a: rng.span(-PI, PI),
                };
                let out = upa_response(a.phi_e.cos(), a.phi_e.sin() * a.phi_a.cos(), l, 0.5);
                let inn = upa_response(a.psi_e.cos(), a.psi_e.sin() * a.psi_a.cos(), l, 0.5);
                let factored = hadamard(&out, &inn.conj()).unwrap();
                let closed = cascaded_response(&cascaded_state(&a), l, 0.5);
                assert!(max_err(&factored, &closed) <= 1e-12);
            }
        }
    }
}
