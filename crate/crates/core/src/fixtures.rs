//! Frozen reference values used by the test suite.
//!
//! Each value was first computed by an independent route (plain trig on the
//! raw coordinates, or a by-hand CDF sweep) and then frozen here. The
//! `fixtures` CLI subcommand recomputes them through the library and reports
//! any drift.

use std::fmt::Write as _;

use crate::channel::HiddenState;
use crate::channel::{angles_from_geometry, channel_gain, ArrayConfig, Geometry};
use crate::error::Result;
use crate::pf::{resample_from_offset, Particle, ParticleSet};

/// Reference layout: BS, surface and user positions in metres.
pub const REF_BS: [f64; 3] = [60.0, 40.0, 40.0];
pub const REF_RIS: [f64; 3] = [30.0, 0.0, 50.0];
pub const REF_UE: [f64; 3] = [0.0, 20.0, 0.0];

/// `[θ, φ_e, φ_a, ψ_e, ψ_a]` for the reference layout.
pub const REF_GEOMETRY_ANGLES: [f64; 5] = [
    2.1998111292215725,
    1.7681918866447774,
    0.9272952180016122,
    2.51683878482475,
    2.5535900500422257,
];

/// `|α|` for the reference layout at 28 GHz with exponent 2.
pub const REF_GEOMETRY_GAIN: f64 = 2.710655556893485e-7;

/// Weights `[0.1, 0.2, 0.3, 0.4]`, systematic offset `u₁ = 0.1`.
pub const RESAMPLE_WEIGHTS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const RESAMPLE_OFFSET: f64 = 0.1;
pub const RESAMPLE_MULTIPLICITIES: [usize; 4] = [1, 0, 2, 1];

fn reference_geometry() -> Result<Geometry> {
    Geometry::new(REF_BS, REF_RIS, REF_UE)
}

/// Recomputes every fixture through the library and renders a report; the
/// flag is true when all of them still match.
pub fn regenerate() -> Result<(String, bool)> {
    let mut out = String::new();
    let mut all_ok = true;
    let mut line = |name: &str, got: f64, want: f64, tol: f64| {
        let ok = (got - want).abs() <= tol * want.abs().max(1.0);
        all_ok &= ok;
        let _ = writeln!(
            out,
            "{name:<24} {got:.17e}  frozen {want:.17e}  {}",
            if ok { "ok" } else { "DRIFT" }
        );
    };

    let a = angles_from_geometry(&reference_geometry()?)?;
    for (name, got, want) in [
        ("theta", a.theta, REF_GEOMETRY_ANGLES[0]),
        ("phi_e", a.phi_e, REF_GEOMETRY_ANGLES[1]),
        ("phi_a", a.phi_a, REF_GEOMETRY_ANGLES[2]),
        ("psi_e", a.psi_e, REF_GEOMETRY_ANGLES[3]),
        ("psi_a", a.psi_a, REF_GEOMETRY_ANGLES[4]),
    ] {
        line(name, got, want, 1e-14);
    }
    let cfg = ArrayConfig::new(16, 8, 0.5, 28e9)?;
    let g = channel_gain(&reference_geometry()?, &cfg)?.norm();
    line("gain", g / REF_GEOMETRY_GAIN, 1.0, 1e-12);

    let ps = ParticleSet::new(
        RESAMPLE_WEIGHTS
            .iter()
            .enumerate()
            .map(|(i, &w)| Particle {
                state: HiddenState::new(i as f64, 0.0),
                weight: w,
            })
            .collect(),
    )?;
    let res = resample_from_offset(&ps, RESAMPLE_OFFSET);
    let mut mult = [0usize; 4];
    for p in res.particles() {
        mult[p.state.x_e as usize] += 1;
    }
    let ok = mult == RESAMPLE_MULTIPLICITIES;
    all_ok &= ok;
    let _ = writeln!(
        out,
        "{:<24} {mult:?}  frozen {RESAMPLE_MULTIPLICITIES:?}  {}",
        "resample_multiplicities",
        if ok { "ok" } else { "DRIFT" }
    );
    Ok((out, all_ok))
}
