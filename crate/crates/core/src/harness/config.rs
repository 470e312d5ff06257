//! Experiment configuration.
//!
//! Flat TOML key/value file; every key is optional and falls back to the
//! defaults below. See `configs/example.toml` for the full annotated list.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{dbm_to_watts, ArrayConfig, Geometry, MobilityConfig};
use crate::ekf::QuMode;
use crate::error::{Error, Result};
use crate::pf::ResampleMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackerKind {
    Pf,
    Ekf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePolicy {
    /// Re-match the surface to the latest estimate every slot.
    BeamMatch,
    /// Fresh uniform phases every slot.
    Random,
    /// Match to the block-start state and hold.
    Fixed,
}

impl PhasePolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhasePolicy::BeamMatch => "beam_match",
            PhasePolicy::Random => "random",
            PhasePolicy::Fixed => "fixed",
        }
    }
}

impl fmt::Display for PhasePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One concrete tracker in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrackerVariant {
    Ekf,
    Pf { n_particles: usize },
}

impl TrackerVariant {
    pub fn name(&self) -> &'static str {
        match self {
            TrackerVariant::Ekf => "ekf",
            TrackerVariant::Pf { .. } => "pf",
        }
    }

    pub fn n_particles(&self) -> usize {
        match self {
            TrackerVariant::Ekf => 0,
            TrackerVariant::Pf { n_particles } => *n_particles,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TrackerVariant::Ekf => "EKF".to_string(),
            TrackerVariant::Pf { n_particles } => format!("PF-{n_particles}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub bs_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub ue_position: [f64; 3],
    /// Std-dev (m) of a per-block Gaussian offset on the user start position.
    pub ue_jitter_m: f64,

    pub n_rx: usize,
    /// Surface side lengths to sweep.
    pub ris_sizes: Vec<usize>,
    pub d_over_lambda: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,

    pub psi_s_deg: f64,
    pub psi_r_deg: f64,

    pub p_tx_dbm: Vec<f64>,
    /// Receiver noise power in dBm; `-inf` gives a noiseless channel.
    pub noise_dbm: f64,

    pub trackers: Vec<TrackerKind>,
    pub pf_particles: Vec<usize>,
    pub pf_init_spread: f64,
    pub pf_resample: ResampleMode,
    /// EKF process covariance `diag(ψ_s, ψ_r)` instead of the increment
    /// variance `diag(ψ_s², ψ_r²) / 3`.
    pub qu_step_bound: bool,
    pub phase_policies: Vec<PhasePolicy>,

    pub slots_per_block: usize,
    pub n_blocks: usize,
    pub seed: u64,
    /// Std-dev of the Gaussian error added to the tracker's block-start state.
    pub init_perturbation_std: f64,
    /// Keep the per-slot NMSE trajectory for each sweep point.
    pub record_trajectory: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            bs_position: [60.0, 40.0, 40.0],
            ris_position: [30.0, 0.0, 50.0],
            ue_position: [0.0, 20.0, 0.0],
            ue_jitter_m: 0.0,
            n_rx: 16,
            ris_sizes: vec![8],
            d_over_lambda: 0.5,
            carrier_hz: 28e9,
            path_loss_exponent: 2.0,
            psi_s_deg: 0.5,
            psi_r_deg: 0.5,
            p_tx_dbm: (0..=8).map(|i| 5.0 * i as f64).collect(),
            noise_dbm: -90.0,
            trackers: vec![TrackerKind::Ekf, TrackerKind::Pf],
            pf_particles: vec![50, 200],
            pf_init_spread: 0.0,
            pf_resample: ResampleMode::EverySlot,
            qu_step_bound: false,
            phase_policies: vec![PhasePolicy::BeamMatch],
            slots_per_block: 100,
            n_blocks: 1500,
            seed: 1,
            init_perturbation_std: 0.0,
            record_trajectory: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.ris_sizes.is_empty() {
            return cfg_err("ris_sizes must be non-empty".into());
        }
        if self.p_tx_dbm.is_empty() {
            return cfg_err("p_tx_dbm must be non-empty".into());
        }
        if self.trackers.is_empty() {
            return cfg_err("trackers must be non-empty".into());
        }
        if self.phase_policies.is_empty() {
            return cfg_err("phase_policies must be non-empty".into());
        }
        if self.trackers.contains(&TrackerKind::Pf) {
            if self.pf_particles.is_empty() {
                return cfg_err(
                    "pf_particles must be non-empty when the pf tracker is enabled".into(),
                );
            }
            if self.pf_particles.contains(&0) {
                return cfg_err("pf_particles entries must be at least 1".into());
            }
        }
        if self.slots_per_block == 0 {
            return cfg_err("slots_per_block must be at least 1".into());
        }
        if self.n_blocks == 0 {
            return cfg_err("n_blocks must be at least 1".into());
        }
        if self.p_tx_dbm.iter().any(|p| !p.is_finite()) {
            return cfg_err("p_tx_dbm entries must be finite".into());
        }
        if self.noise_dbm.is_nan() || self.noise_dbm == f64::INFINITY {
            return cfg_err("noise_dbm must be finite or -inf".into());
        }
        for (name, v) in [
            ("ue_jitter_m", self.ue_jitter_m),
            ("pf_init_spread", self.pf_init_spread),
            ("init_perturbation_std", self.init_perturbation_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return cfg_err(format!("{name} must be non-negative"));
            }
        }
        if !(self.path_loss_exponent > 0.0 && self.path_loss_exponent.is_finite()) {
            return cfg_err("path_loss_exponent must be positive".into());
        }
        for &l in &self.ris_sizes {
            self.array(l).map_err(|e| Error::Config(e.to_string()))?;
        }
        self.geometry().map_err(|e| Error::Config(e.to_string()))?;
        self.mobility().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.bs_position, self.ris_position, self.ue_position)
    }

    pub fn array(&self, l: usize) -> Result<ArrayConfig> {
        ArrayConfig::new(self.n_rx, l, self.d_over_lambda, self.carrier_hz)
    }

    pub fn mobility(&self) -> Result<MobilityConfig> {
        MobilityConfig::from_degrees(self.psi_s_deg, self.psi_r_deg)
    }

    pub fn qu_mode(&self) -> QuMode {
        if self.qu_step_bound {
            QuMode::StepBound
        } else {
            QuMode::Variance
        }
    }

    pub fn noise_variance(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    /// Tracker variants in sweep order: EKF first, then PF by particle count.
    pub fn tracker_variants(&self) -> Vec<TrackerVariant> {
        let mut out = Vec::new();
        if self.trackers.contains(&TrackerKind::Ekf) {
            out.push(TrackerVariant::Ekf);
        }
        if self.trackers.contains(&TrackerKind::Pf) {
            let mut ns = self.pf_particles.clone();
            ns.sort_unstable();
            ns.dedup();
            out.extend(
                ns.into_iter()
                    .map(|n_particles| TrackerVariant::Pf { n_particles }),
            );
        }
        out
    }

    /// Non-fatal issues worth reporting to the user.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Ok(m) = self.mobility() {
            if m.exceeds_small_angle() {
                w.push("psi_s/psi_r above 5 degrees: the particle proposal's small-angle bounds degrade".into());
            }
        }
        w
    }
}
