//! Particle filter over the cascaded angles.
//!
//! Each slot runs propose → weight → normalise → estimate → resample. The
//! proposal is a pair of independent uniform increments whose supports are
//! the small-angle bounds on how far each cascaded component can move in one
//! slot: `±ψ_s` for the elevation component and `±(ψ_s + ψ_r + ψ_s ψ_r)` for
//! the azimuth component. Weights are the complex-Gaussian likelihood
//! `exp(-|y - h(x)|² / σ²)`, computed in the log domain.

use serde::{Deserialize, Serialize};

use crate::channel::{HiddenState, ObservationModel, PhaseShifts};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub state: HiddenState,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
}

impl ParticleSet {
    pub fn new(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Argument("particle set must be non-empty".into()));
        }
        if particles
            .iter()
            .any(|p| !(p.weight >= 0.0 && p.weight.is_finite()))
        {
            return Err(Error::Argument(
                "particle weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self { particles })
    }

    /// Equally weighted set over `states`.
    pub fn uniform(states: impl IntoIterator<Item = HiddenState>) -> Result<Self> {
        let states: Vec<_> = states.into_iter().collect();
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(
            states
                .into_iter()
                .map(|state| Particle { state, weight: w })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights().sum()
    }

    /// Effective sample size `1 / Σ w²` of the (normalised) weights.
    pub fn ess(&self) -> f64 {
        1.0 / self.weights().map(|w| w * w).sum::<f64>()
    }

    fn set_uniform_weights(&mut self) {
        let w = 1.0 / self.len() as f64;
        for p in &mut self.particles {
            p.weight = w;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Resample after every slot.
    #[default]
    EverySlot,
    /// Resample only when the effective sample size drops below `N_s / 2`.
    EssHalf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfConfig {
    pub n_particles: usize,
    pub psi_s: f64,
    pub psi_r: f64,
    /// Noise variance used in the likelihood.
    pub sigma2: f64,
    /// Half-width of the uniform prior box around the initial state.
    pub init_spread: f64,
    pub resample: ResampleMode,
}

impl PfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Argument("need at least one particle".into()));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Argument(format!(
                "likelihood variance must be positive, got {}",
                self.sigma2
            )));
        }
        for (name, v) in [
            ("psi_s", self.psi_s),
            ("psi_r", self.psi_r),
            ("init_spread", self.init_spread),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn elevation_support(&self) -> f64 {
        self.psi_s
    }

    pub fn azimuth_support(&self) -> f64 {
        self.psi_s + self.psi_r + self.psi_s * self.psi_r
    }
}

/// Draws `N_s` particles uniformly in `x0 ± init_spread`, each weighted `1/N_s`.
///
/// Draw order per particle: elevation then azimuth.
pub fn init_particles(x0: &HiddenState, cfg: &PfConfig, rng: &mut SeededRng) -> ParticleSet {
    let s = cfg.init_spread;
    let w = 1.0 / cfg.n_particles as f64;
    let particles = (0..cfg.n_particles)
        .map(|_| {
            let x_e = rng.span(x0.x_e - s, x0.x_e + s);
            let x_a = rng.span(x0.x_a - s, x0.x_a + s);
            Particle {
                state: HiddenState::new(x_e, x_a).clamped().0,
                weight: w,
            }
        })
        .collect();
    ParticleSet { particles }
}

/// Moves one particle through the importance density. The flag reports
/// whether the result had to be clamped back into `[-2, 2]²`.
pub fn propose_counted(p: &Particle, cfg: &PfConfig, rng: &mut SeededRng) -> (Particle, bool) {
    let se = cfg.elevation_support();
    let sa = cfg.azimuth_support();
    let de = rng.span(-se, se);
    let da = rng.span(-sa, sa);
    let (state, clamped) = HiddenState::new(p.state.x_e + de, p.state.x_a + da).clamped();
    (
        Particle {
            state,
            weight: p.weight,
        },
        clamped,
    )
}

pub fn propose(p: &Particle, cfg: &PfConfig, rng: &mut SeededRng) -> Particle {
    propose_counted(p, cfg, rng).0
}

/// `-|y - h(x)|² / σ²`.
pub fn log_likelihood(
    y: num_complex::Complex64,
    state: &HiddenState,
    model: &ObservationModel,
    e: &PhaseShifts,
    sigma2: f64,
) -> Result<f64> {
    let h = model.mean(state, e)?;
    Ok(-(y - h).norm_sqr() / sigma2)
}

/// Unnormalised weight `exp(-|y - h(x)|² / σ²)`.
pub fn weight_particle(
    y: num_complex::Complex64,
    p: &Particle,
    model: &ObservationModel,
    e: &PhaseShifts,
    sigma2: f64,
) -> Result<f64> {
    Ok(log_likelihood(y, &p.state, model, e, sigma2)?.exp())
}

/// Rescales raw weights to sum to one.
pub fn normalize(ps: &ParticleSet) -> Result<ParticleSet> {
    let total = ps.weight_sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    Ok(ParticleSet {
        particles: ps
            .particles
            .iter()
            .map(|p| Particle {
                state: p.state,
                weight: p.weight / total,
            })
            .collect(),
    })
}

/// Sets normalised weights from log-weights, subtracting the maximum before
/// exponentiating.
pub fn normalize_log(ps: &mut ParticleSet, log_w: &[f64]) -> Result<()> {
    debug_assert_eq!(ps.len(), log_w.len());
    let max = log_w
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let mut total = 0.0;
    for (p, &lw) in ps.particles.iter_mut().zip(log_w) {
        let w = if lw.is_nan() { 0.0 } else { (lw - max).exp() };
        p.weight = w;
        total += w;
    }
    for p in &mut ps.particles {
        p.weight /= total;
    }
    Ok(())
}

/// Weighted mean of the particle states.
pub fn estimate(ps: &ParticleSet) -> HiddenState {
    let (mut e, mut a) = (0.0, 0.0);
    for p in &ps.particles {
        e += p.weight * p.state.x_e;
        a += p.weight * p.state.x_a;
    }
    HiddenState::new(e, a)
}

const NORMALIZED_TOL: f64 = 1e-9;

/// Systematic resampling with a single offset `u₁ ~ U(0, 1/N_s)`.
pub fn systematic_resample(ps: &ParticleSet, rng: &mut SeededRng) -> Result<ParticleSet> {
    check_normalized(ps)?;
    let u1 = rng.span(0.0, 1.0 / ps.len() as f64);
    Ok(resample_from_offset(ps, u1))
}

fn check_normalized(ps: &ParticleSet) -> Result<()> {
    let s = ps.weight_sum();
    if (s - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::Precondition(format!(
            "weights sum to {s}, expected 1"
        )));
    }
    Ok(())
}

/// Deterministic part of systematic resampling for a given offset.
///
/// Sweeps `u_j = u₁ + (j - 1)/N_s` along the CDF `c_i = Σ_{k ≤ i} w_k`,
/// advancing while `u_j > c_i` (strict), and copies the particle it stops on.
pub fn resample_from_offset(ps: &ParticleSet, u1: f64) -> ParticleSet {
    let n = ps.len();
    let mut cdf = Vec::with_capacity(n);
    let mut c = 0.0;
    for p in &ps.particles {
        c += p.weight;
        cdf.push(c);
    }
    let step = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    for j in 0..n {
        let u = u1 + step * j as f64;
        // The last CDF entry can round to just under 1.
        while i + 1 < n && u > cdf[i] {
            i += 1;
        }
        out.push(Particle {
            state: ps.particles[i].state,
            weight: step,
        });
    }
    ParticleSet { particles: out }
}

/// Result of one filter step.
#[derive(Clone, Debug)]
pub struct PfStep {
    /// Set carried into the next slot (post-resampling when it happened).
    pub particles: ParticleSet,
    /// Weighted estimate before resampling.
    pub estimate: HiddenState,
    /// ESS of the normalised weights before resampling.
    pub ess: f64,
    pub clamped: usize,
    pub resampled: bool,
}

/// One slot of the filter. Errors with [`Error::DegenerateWeights`] when every
/// likelihood underflows.
///
/// RNG order: all proposals in particle order, then the resampling offset.
pub fn pf_step(
    ps: &ParticleSet,
    y: num_complex::Complex64,
    cfg: &PfConfig,
    model: &ObservationModel,
    e: &PhaseShifts,
    rng: &mut SeededRng,
) -> Result<PfStep> {
    model.check(e)?;
    let (mut next, clamped) = propagate(ps, cfg, rng);
    let log_w = log_weights(&next, y, cfg, model, e);
    normalize_log(&mut next, &log_w)?;
    Ok(finish(next, cfg, rng, clamped))
}

fn propagate(ps: &ParticleSet, cfg: &PfConfig, rng: &mut SeededRng) -> (ParticleSet, usize) {
    let mut clamped = 0;
    let particles = ps
        .particles
        .iter()
        .map(|p| {
            let (q, c) = propose_counted(p, cfg, rng);
            clamped += c as usize;
            q
        })
        .collect();
    (ParticleSet { particles }, clamped)
}

fn log_weights(
    ps: &ParticleSet,
    y: num_complex::Complex64,
    cfg: &PfConfig,
    model: &ObservationModel,
    e: &PhaseShifts,
) -> Vec<f64> {
    ps.particles
        .iter()
        .map(|p| {
            let r = y - model.mean_unchecked(&p.state, e);
            p.weight.ln() - r.norm_sqr() / cfg.sigma2
        })
        .collect()
}

fn finish(mut ps: ParticleSet, cfg: &PfConfig, rng: &mut SeededRng, clamped: usize) -> PfStep {
    let est = estimate(&ps);
    let ess = ps.ess();
    let resample = match cfg.resample {
        ResampleMode::EverySlot => true,
        ResampleMode::EssHalf => ess < cfg.n_particles as f64 / 2.0,
    };
    if resample {
        let u1 = rng.span(0.0, 1.0 / ps.len() as f64);
        ps = resample_from_offset(&ps, u1);
    }
    PfStep {
        particles: ps,
        estimate: est,
        ess,
        clamped,
        resampled: resample,
    }
}

/// Running diagnostics for a tracker instance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PfDiagnostics {
    pub steps: u64,
    pub ess_sum: f64,
    /// ESS of the most recent step.
    pub last_ess: f64,
    pub clamp_events: u64,
    pub degenerate_events: u64,
    pub resamples: u64,
}

impl PfDiagnostics {
    pub fn ess_mean(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.ess_sum / self.steps as f64
        }
    }
}

/// Stateful filter used by the harness. A slot whose weights all underflow
/// falls back to uniform weights and is counted, not treated as fatal.
#[derive(Clone, Debug)]
pub struct PfTracker {
    cfg: PfConfig,
    particles: ParticleSet,
    rng: SeededRng,
    diag: PfDiagnostics,
}

impl PfTracker {
    pub fn new(x0: &HiddenState, cfg: PfConfig, mut rng: SeededRng) -> Result<Self> {
        cfg.validate()?;
        let particles = init_particles(x0, &cfg, &mut rng);
        Ok(Self {
            cfg,
            particles,
            rng,
            diag: PfDiagnostics::default(),
        })
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.particles
    }

    pub fn diagnostics(&self) -> &PfDiagnostics {
        &self.diag
    }

    pub fn step(
        &mut self,
        y: num_complex::Complex64,
        model: &ObservationModel,
        e: &PhaseShifts,
    ) -> Result<HiddenState> {
        model.check(e)?;
        let (mut next, clamped) = propagate(&self.particles, &self.cfg, &mut self.rng);
        let log_w = log_weights(&next, y, &self.cfg, model, e);
        if let Err(Error::DegenerateWeights) = normalize_log(&mut next, &log_w) {
            next.set_uniform_weights();
            self.diag.degenerate_events += 1;
        }
        let out = finish(next, &self.cfg, &mut self.rng, clamped);
        self.diag.steps += 1;
        self.diag.ess_sum += out.ess;
        self.diag.last_ess = out.ess;
        self.diag.clamp_events += out.clamped as u64;
        self.diag.resamples += out.resampled as u64;
        self.particles = out.particles;
        Ok(out.estimate)
    }
}
