//! Frozen tracking scenario shared by the convergence checks.

#![allow(dead_code)]

use num_complex::Complex64;
use ristrack::channel::{
    angles_from_geometry, beam_match_phases, cascaded_state, channel_gain, dbm_to_watts,
    step_true_angles, ArrayConfig, Geometry, HiddenState, LinkBudget, MobilityConfig,
    ObservationModel, PhaseShifts,
};
use ristrack::fixtures;
use ristrack::pf::{PfConfig, PfTracker, ResampleMode};
use ristrack::SeededRng;

pub const SLOTS: usize = 20;

/// Reference layout, L = 8, 20 dBm into -90 dBm noise, 0.5 degree steps.
/// The user trajectory and every observation are drawn once from a fixed
/// seed; the surface phases stay matched to the start state.
pub struct Scenario {
    pub model: ObservationModel,
    pub phases: PhaseShifts,
    pub x0: HiddenState,
    pub truth: Vec<HiddenState>,
    pub obs: Vec<Complex64>,
    pub sigma2: f64,
    pub mobility: MobilityConfig,
}

impl Scenario {
    pub fn frozen() -> Self {
        let geo = Geometry::new(fixtures::REF_BS, fixtures::REF_RIS, fixtures::REF_UE).unwrap();
        let array = ArrayConfig::new(16, 8, 0.5, 28e9).unwrap();
        let mut angles = angles_from_geometry(&geo).unwrap();
        let sigma2 = dbm_to_watts(-90.0);
        let budget = LinkBudget::new(
            channel_gain(&geo, &array).unwrap(),
            dbm_to_watts(20.0),
            sigma2,
        )
        .unwrap();
        let model = ObservationModel::new(&angles, &budget, &array).unwrap();
        let mobility = MobilityConfig::from_degrees(0.5, 0.5).unwrap();
        let x0 = cascaded_state(&angles);
        let phases = beam_match_phases(&x0, 8, 0.5);
        let mut rng = SeededRng::new(11);
        let mut truth = Vec::with_capacity(SLOTS);
        let mut obs = Vec::with_capacity(SLOTS);
        for _ in 0..SLOTS {
            angles = step_true_angles(&angles, &mobility, &mut rng);
            let x = cascaded_state(&angles);
            obs.push(model.observe(&x, &phases, &mut rng).unwrap());
            truth.push(x);
        }
        Scenario {
            model,
            phases,
            x0,
            truth,
            obs,
            sigma2,
            mobility,
        }
    }

    /// Per-slot estimates of one filter run.
    pub fn track(&self, n_particles: usize, seed: u64) -> Vec<HiddenState> {
        let cfg = PfConfig {
            n_particles,
            psi_s: self.mobility.psi_s,
            psi_r: self.mobility.psi_r,
            sigma2: self.sigma2,
            init_spread: 0.0,
            resample: ResampleMode::EverySlot,
        };
        let mut tr = PfTracker::new(&self.x0, cfg, SeededRng::new(seed)).unwrap();
        self.obs
            .iter()
            .map(|&y| tr.step(y, &self.model, &self.phases).unwrap())
            .collect()
    }

    /// RMS state error over `seeds` filter runs and all slots.
    pub fn rms_error(&self, n_particles: usize, seeds: u64) -> f64 {
        let mut sum = 0.0;
        for s in 0..seeds {
            for (est, x) in self.track(n_particles, 1000 + s).iter().zip(&self.truth) {
                sum += est.dist_sqr(x);
            }
        }
        (sum / (seeds as usize * SLOTS) as f64).sqrt()
    }
}
