//! Independent re-derivations checked against the library.

use std::f64::consts::PI;

use num_complex::Complex64;
use ristrack::channel::{
    angles_from_geometry, beam_match_phases, cascaded_state, channel_gain, random_phases,
    step_true_angles, ArrayConfig, Geometry, HiddenState, LinkBudget, MobilityConfig,
    ObservationModel, PhaseShifts,
};
use ristrack::ekf::{ekf_step, EkfConfig, EkfState, QuMode};
use ristrack::fixtures;
use ristrack::harness::ExperimentConfig;
use ristrack::SeededRng;

fn unit(from: [f64; 3], to: [f64; 3]) -> [f64; 3] {
    let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    [d[0] / n, d[1] / n, d[2] / n]
}

#[test]
fn reference_geometry_angles_by_hand() {
    // Surface faces +y with its columns along +x and rows along +z:
    // elevation = arccos(z), azimuth = arctan(y / x) in the right quadrant.
    let to_bs = unit(fixtures::REF_RIS, fixtures::REF_BS);
    let to_ue = unit(fixtures::REF_RIS, fixtures::REF_UE);
    let bs_to_ris = unit(fixtures::REF_BS, fixtures::REF_RIS);
    let theta = bs_to_ris[0].acos();
    let phi_e = to_bs[2].acos();
    let phi_a = to_bs[1].atan2(to_bs[0]);
    let psi_e = to_ue[2].acos();
    let psi_a = to_ue[1].atan2(to_ue[0]);
    let want = [theta, phi_e, phi_a, psi_e, psi_a];
    for (a, b) in want.iter().zip(fixtures::REF_GEOMETRY_ANGLES) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }

    // Cascaded state is a difference of the in-plane direction cosines.
    let geo = Geometry::new(fixtures::REF_BS, fixtures::REF_RIS, fixtures::REF_UE).unwrap();
    let x = cascaded_state(&angles_from_geometry(&geo).unwrap());
    assert!((x.x_e - (to_bs[2] - to_ue[2])).abs() < 1e-14);
    assert!((x.x_a - (to_bs[0] - to_ue[0])).abs() < 1e-14);
}

#[test]
fn reference_gain_by_hand() {
    let lambda = 299_792_458.0 / 28e9;
    let d1 = (900f64 + 1600.0 + 100.0).sqrt();
    let d2 = (900f64 + 400.0 + 2500.0).sqrt();
    let c0 = (lambda / (4.0 * PI)).powi(2);
    let want = (c0 * (d1 * d2).powi(-2)).sqrt();
    assert!((want / fixtures::REF_GEOMETRY_GAIN - 1.0).abs() < 1e-12);
    let geo = Geometry::new(fixtures::REF_BS, fixtures::REF_RIS, fixtures::REF_UE).unwrap();
    let g = channel_gain(&geo, &ArrayConfig::new(16, 8, 0.5, 28e9).unwrap()).unwrap();
    assert!((g.norm() / want - 1.0).abs() < 1e-12);
}

/// `y` mean assembled from the separate link responses, element by element.
fn brute_force_mean(
    angles: &ristrack::channel::TrueAngles,
    budget: &LinkBudget,
    n_rx: usize,
    l: usize,
    e: &PhaseShifts,
) -> Complex64 {
    let k = 2.0 * PI * 0.5;
    let ula = |c: f64| -> Vec<Complex64> {
        (0..n_rx)
            .map(|i| Complex64::cis(k * i as f64 * c) / (n_rx as f64).sqrt())
            .collect()
    };
    let w = ula(angles.theta_bar.cos());
    let a_rx = ula(angles.theta.cos());
    let combine: Complex64 = w.iter().zip(&a_rx).map(|(a, b)| a.conj() * b).sum();
    let mut ris = Complex64::new(0.0, 0.0);
    for m in 0..l {
        for n in 0..l {
            let out = Complex64::cis(
                -k * (m as f64 * angles.phi_e.cos()
                    + n as f64 * angles.phi_e.sin() * angles.phi_a.cos()),
            );
            let inc = Complex64::cis(
                -k * (m as f64 * angles.psi_e.cos()
                    + n as f64 * angles.psi_e.sin() * angles.psi_a.cos()),
            );
            let a = out * inc.conj();
            ris += a.conj() * e.as_slice()[m * l + n];
        }
    }
    budget.alpha * budget.p_tx.sqrt() * combine * ris
}

#[test]
fn observation_mean_matches_link_by_link_product() {
    let mut rng = SeededRng::new(41);
    for _ in 0..50 {
        let angles = ristrack::channel::TrueAngles {
            theta: rng.uniform(0.2, 2.9).unwrap(),
            theta_bar: 0.0,
            phi_e: rng.uniform(0.1, 3.0).unwrap(),
            phi_a: rng.uniform(-3.0, 3.0).unwrap(),
            psi_e: rng.uniform(0.1, 3.0).unwrap(),
            psi_a: rng.uniform(-3.0, 3.0).unwrap(),
        };
        let angles = ristrack::channel::TrueAngles {
            theta_bar: angles.theta + rng.uniform(-0.1, 0.1).unwrap(),
            ..angles
        };
        let budget = LinkBudget::new(Complex64::new(0.3, -0.7), 2.0, 1.0).unwrap();
        let cfg = ArrayConfig::new(4, 4, 0.5, 28e9).unwrap();
        let model = ObservationModel::new(&angles, &budget, &cfg).unwrap();
        let e = random_phases(4, &mut rng);
        let got = model.mean(&cascaded_state(&angles), &e).unwrap();
        let want = brute_force_mean(&angles, &budget, 4, 4, &e);
        assert!(
            (got - want).norm() <= 1e-10 * want.norm().max(1.0),
            "{got} vs {want}"
        );
    }
}

type M2 = [[f64; 2]; 2];

fn mm(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn tr(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Textbook EKF on the stacked real measurement, Joseph-form covariance,
/// Jacobian from the explicit double sum.
struct ReferenceEkf {
    x: [f64; 2],
    p: M2,
    q: M2,
    r: f64,
}

impl ReferenceEkf {
    fn h_and_jac(&self, model: &ObservationModel, e: &PhaseShifts) -> (Complex64, [Complex64; 2]) {
        let l = model.l();
        let k = 2.0 * PI * model.d_over_lambda();
        let mut h = Complex64::new(0.0, 0.0);
        let mut de = Complex64::new(0.0, 0.0);
        let mut da = Complex64::new(0.0, 0.0);
        for m in 0..l {
            for n in 0..l {
                let t = Complex64::cis(k * (m as f64 * self.x[0] + n as f64 * self.x[1]))
                    * e.as_slice()[m * l + n];
                h += t;
                de += Complex64::new(0.0, k * m as f64) * t;
                da += Complex64::new(0.0, k * n as f64) * t;
            }
        }
        let g = model.prefactor();
        (g * h, [g * de, g * da])
    }

    fn step(&mut self, y: Complex64, model: &ObservationModel, e: &PhaseShifts) {
        for i in 0..2 {
            for j in 0..2 {
                self.p[i][j] += self.q[i][j];
            }
        }
        let (h, j) = self.h_and_jac(model, e);
        let c: M2 = [[j[0].re, j[1].re], [j[0].im, j[1].im]];
        let pct = mm(&self.p, &tr(&c));
        let mut s = mm(&c, &pct);
        s[0][0] += self.r / 2.0;
        s[1][1] += self.r / 2.0;
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let s_inv = [
            [s[1][1] / det, -s[0][1] / det],
            [-s[1][0] / det, s[0][0] / det],
        ];
        let k = mm(&pct, &s_inv);
        let innov = [y.re - h.re, y.im - h.im];
        self.x[0] += k[0][0] * innov[0] + k[0][1] * innov[1];
        self.x[1] += k[1][0] * innov[0] + k[1][1] * innov[1];
        let kc = mm(&k, &c);
        let a = [[1.0 - kc[0][0], -kc[0][1]], [-kc[1][0], 1.0 - kc[1][1]]];
        let mut p = mm(&mm(&a, &self.p), &tr(&a));
        let krk = mm(&k, &tr(&k));
        for i in 0..2 {
            for jj in 0..2 {
                p[i][jj] += self.r / 2.0 * krk[i][jj];
            }
        }
        self.p = p;
    }
}

#[test]
fn ekf_matches_reference_implementation() {
    let geo = Geometry::new(fixtures::REF_BS, fixtures::REF_RIS, fixtures::REF_UE).unwrap();
    let cfg = ArrayConfig::new(16, 4, 0.5, 28e9).unwrap();
    let mut angles = angles_from_geometry(&geo).unwrap();
    let sigma2 = 1e-12;
    let budget = LinkBudget::new(channel_gain(&geo, &cfg).unwrap(), 0.1, sigma2).unwrap();
    let model = ObservationModel::new(&angles, &budget, &cfg).unwrap();
    let mob = MobilityConfig::from_degrees(0.5, 0.5).unwrap();
    let ekf_cfg = EkfConfig::from_mobility(&mob, sigma2, QuMode::Variance).unwrap();

    let x0 = cascaded_state(&angles);
    let mut lib = EkfState::at(x0);
    let mut reference = ReferenceEkf {
        x: [x0.x_e, x0.x_a],
        p: [[0.0; 2]; 2],
        q: ekf_cfg.q_u,
        r: sigma2,
    };
    let mut rng = SeededRng::new(7);
    let mut e = beam_match_phases(&x0, 4, 0.5);
    for _ in 0..40 {
        angles = step_true_angles(&angles, &mob, &mut rng);
        let y = model
            .observe(&cascaded_state(&angles), &e, &mut rng)
            .unwrap();
        let (next, est, info) = ekf_step(&lib, y, &e, &ekf_cfg, &model).unwrap();
        assert!(!info.regularized);
        reference.step(y, &model, &e);
        lib = next;
        let scale = reference.x[0].abs().max(reference.x[1].abs());
        assert!((est.x_e - reference.x[0]).abs() < 1e-9 * scale);
        assert!((est.x_a - reference.x[1]).abs() < 1e-9 * scale);
        let pn = reference
            .p
            .iter()
            .flatten()
            .fold(0f64, |a, v| a.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (lib.m[i][j] - reference.p[i][j]).abs() < 1e-6 * pn,
                    "{:?} vs {:?}",
                    lib.m,
                    reference.p
                );
            }
        }
        e = beam_match_phases(&est, 4, 0.5);
    }
}

#[test]
fn shipped_example_config_lists_the_defaults() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.toml");
    let cfg = ExperimentConfig::load(std::path::Path::new(path)).unwrap();
    assert_eq!(cfg, ExperimentConfig::default());
}

#[test]
fn beam_matched_state_reproduces_unit_gain_channel() {
    // ‖H‖ = L² ‖α_RX‖ = L² when the phases match the true state.
    let geo = Geometry::new(fixtures::REF_BS, fixtures::REF_RIS, fixtures::REF_UE).unwrap();
    let cfg = ArrayConfig::new(16, 8, 0.5, 28e9).unwrap();
    let angles = angles_from_geometry(&geo).unwrap();
    let model = ObservationModel::new(
        &angles,
        &LinkBudget::new(Complex64::new(1.0, 0.0), 1.0, 0.0).unwrap(),
        &cfg,
    )
    .unwrap();
    let x = HiddenState::new(0.1, -0.4);
    let h = model
        .channel_matrix(&x, &beam_match_phases(&x, 8, 0.5))
        .unwrap();
    assert!((h.norm_sqr().sqrt() - 64.0).abs() < 1e-10);
}
