//! Block/slot simulation loop and parameter sweeps.
//!
//! Block `b` of every sweep point draws from `seed + b` only, split into the
//! four [`stream`]s. Every tracker, phase policy and power level therefore
//! sees the same user trajectory for a given block, and blocks can run in any
//! order or thread without changing the result.

use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{
    angles_from_geometry, beam_match_phases, cascaded_state, channel_gain_with, dbm_to_watts,
    random_phases, step_true_angles, HiddenState, LinkBudget, ObservationModel, PhaseShifts,
};
use crate::ekf::{EkfConfig, EkfTracker};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, PhasePolicy, TrackerVariant};
use crate::harness::metrics::{to_db, NmseAccumulator};
use crate::pf::{PfConfig, PfTracker};
use crate::rng::{stream, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub l: usize,
    pub p_tx_dbm: f64,
    pub tracker: TrackerVariant,
    pub policy: PhasePolicy,
}

impl SweepPoint {
    /// Sweep points in output order: L, tracker, policy, then transmit power.
    pub fn enumerate(cfg: &ExperimentConfig) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &l in &cfg.ris_sizes {
            for tracker in cfg.tracker_variants() {
                for &policy in &cfg.phase_policies {
                    for &p_tx_dbm in &cfg.p_tx_dbm {
                        out.push(SweepPoint {
                            l,
                            p_tx_dbm,
                            tracker,
                            policy,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRecord {
    pub truth: HiddenState,
    pub estimate: HiddenState,
    pub y: num_complex::Complex64,
    /// `‖Ĥ - H‖²`
    pub err: f64,
    /// `‖H‖²`
    pub pow: f64,
    /// Pre-resampling ESS; `None` for the EKF.
    pub ess: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockRecord {
    pub block: usize,
    pub slots: Vec<SlotRecord>,
    pub acc: NmseAccumulator,
    pub degenerate_events: u64,
    pub clamp_events: u64,
    pub resamples: u64,
    pub regularizations: u64,
    pub seconds: f64,
}

impl BlockRecord {
    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &BlockRecord) -> bool {
        BlockRecord {
            seconds: 0.0,
            ..self.clone()
        } == BlockRecord {
            seconds: 0.0,
            ..other.clone()
        }
    }
}

enum Tracker {
    Pf(PfTracker),
    Ekf(EkfTracker),
}

impl Tracker {
    fn step(
        &mut self,
        y: num_complex::Complex64,
        model: &ObservationModel,
        e: &PhaseShifts,
    ) -> Result<(HiddenState, Option<f64>)> {
        match self {
            Tracker::Pf(t) => {
                let est = t.step(y, model, e)?;
                Ok((est, Some(t.diagnostics().last_ess)))
            }
            Tracker::Ekf(t) => Ok((t.step(y, model, e)?, None)),
        }
    }
}

/// Simulates one block of `cfg.slots_per_block` slots at a sweep point.
///
/// Per slot: move the user, observe with the current phases, run the
/// tracker, score `Ĥ` against `H` under those same phases, then update the
/// phases from the new estimate.
pub fn run_block(cfg: &ExperimentConfig, point: &SweepPoint, block: usize) -> Result<BlockRecord> {
    let started = Instant::now();
    let seed = cfg.seed.wrapping_add(block as u64);
    let mut placement = SeededRng::derive(seed, stream::PLACEMENT);
    let mut channel = SeededRng::derive(seed, stream::CHANNEL);
    let mut phases = SeededRng::derive(seed, stream::PHASES);
    let tracker_rng = SeededRng::derive(seed, stream::TRACKER);

    let array = cfg.array(point.l)?;
    let mobility = cfg.mobility()?;
    let mut ue = cfg.ue_position;
    for c in ue.iter_mut() {
        *c += cfg.ue_jitter_m * placement.standard_normal();
    }
    let geo = cfg.geometry()?.with_ue(ue);
    geo.validate()?;
    let mut angles = angles_from_geometry(&geo)?;
    let alpha = channel_gain_with(&geo, &array, cfg.path_loss_exponent)?;
    let sigma2 = cfg.noise_variance();
    let budget = LinkBudget::new(alpha, dbm_to_watts(point.p_tx_dbm), sigma2)?;
    let model = ObservationModel::new(&angles, &budget, &array)?;

    let x0 = cascaded_state(&angles);
    let x_init = HiddenState::new(
        x0.x_e + cfg.init_perturbation_std * placement.standard_normal(),
        x0.x_a + cfg.init_perturbation_std * placement.standard_normal(),
    )
    .clamped()
    .0;

    let mut tracker = match point.tracker {
        TrackerVariant::Pf { n_particles } => Tracker::Pf(PfTracker::new(
            &x_init,
            PfConfig {
                n_particles,
                psi_s: mobility.psi_s,
                psi_r: mobility.psi_r,
                // The likelihood needs a positive variance; a noiseless
                // channel gets the smallest one available.
                sigma2: sigma2.max(f64::MIN_POSITIVE),
                init_spread: cfg.pf_init_spread,
                resample: cfg.pf_resample,
            },
            tracker_rng,
        )?),
        TrackerVariant::Ekf => Tracker::Ekf(EkfTracker::new(
            x_init,
            EkfConfig::from_mobility(&mobility, sigma2, cfg.qu_mode())?,
        )?),
    };

    let mut e = match point.policy {
        PhasePolicy::BeamMatch | PhasePolicy::Fixed => {
            beam_match_phases(&x_init, point.l, array.d_over_lambda)
        }
        PhasePolicy::Random => random_phases(point.l, &mut phases),
    };

    let mut slots = Vec::with_capacity(cfg.slots_per_block);
    let mut acc = NmseAccumulator::default();
    for _ in 0..cfg.slots_per_block {
        angles = step_true_angles(&angles, &mobility, &mut channel);
        let truth = cascaded_state(&angles);
        let y = model.observe(&truth, &e, &mut channel)?;
        let (estimate, ess) = tracker.step(y, &model, &e)?;
        let h = model.channel_matrix(&truth, &e)?;
        let h_hat = model.channel_matrix(&estimate, &e)?;
        let err = h_hat.dist_sqr(&h)?;
        let pow = h.norm_sqr();
        acc.push_terms(err, pow);
        slots.push(SlotRecord {
            truth,
            estimate,
            y,
            err,
            pow,
            ess,
        });
        match point.policy {
            PhasePolicy::BeamMatch => {
                e = beam_match_phases(&estimate, point.l, array.d_over_lambda)
            }
            PhasePolicy::Random => e = random_phases(point.l, &mut phases),
            PhasePolicy::Fixed => {}
        }
    }

    let (degenerate_events, clamp_events, resamples, regularizations) = match &tracker {
        Tracker::Pf(t) => {
            let d = t.diagnostics();
            (d.degenerate_events, d.clamp_events, d.resamples, 0)
        }
        Tracker::Ekf(t) => (0, 0, 0, t.diagnostics().regularizations),
    };
    Ok(BlockRecord {
        block,
        slots,
        acc,
        degenerate_events,
        clamp_events,
        resamples,
        regularizations,
        seconds: started.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub point: SweepPoint,
    /// One accumulator per block, in block order.
    pub blocks: Vec<NmseAccumulator>,
    pub total: NmseAccumulator,
    pub nmse: f64,
    pub nmse_db: f64,
    /// Mean pre-resampling ESS over all slots; `None` for the EKF.
    pub ess_mean: Option<f64>,
    pub degenerate_events: u64,
    pub clamp_events: u64,
    pub resamples: u64,
    pub regularizations: u64,
    /// Compute time summed over blocks.
    pub seconds: f64,
    /// Per-slot NMSE across blocks, when requested.
    pub trajectory: Option<Vec<f64>>,
}

impl RunResult {
    /// Aggregates the block records of one sweep point.
    pub fn from_blocks(
        point: SweepPoint,
        records: &[BlockRecord],
        keep_trajectory: bool,
    ) -> Result<RunResult> {
        if records.is_empty() {
            return Err(Error::Argument("no blocks to aggregate".into()));
        }
        let mut total = NmseAccumulator::default();
        let mut ess_sum = 0.0;
        let mut ess_n = 0u64;
        let mut out = RunResult {
            point,
            blocks: Vec::with_capacity(records.len()),
            total,
            nmse: 0.0,
            nmse_db: 0.0,
            ess_mean: None,
            degenerate_events: 0,
            clamp_events: 0,
            resamples: 0,
            regularizations: 0,
            seconds: 0.0,
            trajectory: None,
        };
        let n_slots = records[0].slots.len();
        let mut per_slot = vec![NmseAccumulator::default(); n_slots];
        for r in records {
            total.merge(&r.acc);
            out.blocks.push(r.acc);
            out.degenerate_events += r.degenerate_events;
            out.clamp_events += r.clamp_events;
            out.resamples += r.resamples;
            out.regularizations += r.regularizations;
            out.seconds += r.seconds;
            for (k, s) in r.slots.iter().enumerate() {
                if let Some(ess) = s.ess {
                    ess_sum += ess;
                    ess_n += 1;
                }
                if let Some(a) = per_slot.get_mut(k) {
                    a.push_terms(s.err, s.pow);
                }
            }
        }
        out.total = total;
        out.nmse = total.ratio()?;
        out.nmse_db = to_db(out.nmse);
        if matches!(point.tracker, TrackerVariant::Pf { .. }) && ess_n > 0 {
            out.ess_mean = Some(ess_sum / ess_n as f64);
        }
        if keep_trajectory {
            out.trajectory = Some(per_slot.iter().map(|a| a.ratio()).collect::<Result<_>>()?);
        }
        Ok(out)
    }
}

/// Runs the full sweep. `threads == 0` uses rayon's default pool size.
///
/// Results come back in [`SweepPoint::enumerate`] order and are identical for
/// any thread count.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let points = SweepPoint::enumerate(cfg);
    let units: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.n_blocks).map(move |b| (p, b)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let records: Vec<BlockRecord> = pool.install(|| {
        units
            .par_iter()
            .map(|&(p, b)| run_block(cfg, &points[p], b))
            .collect::<Result<_>>()
    })?;
    points
        .iter()
        .zip(records.chunks(cfg.n_blocks))
        .map(|(pt, recs)| RunResult::from_blocks(*pt, recs, cfg.record_trajectory))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            ris_sizes: vec![4],
            p_tx_dbm: vec![20.0],
            pf_particles: vec![20],
            slots_per_block: 10,
            n_blocks: 3,
            ..Default::default()
        }
    }

    #[test]
    fn enumerate_order() {
        let cfg = ExperimentConfig {
            p_tx_dbm: vec![0.0, 10.0],
            pf_particles: vec![50],
            ..small()
        };
        let pts = SweepPoint::enumerate(&cfg);
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].tracker, TrackerVariant::Ekf);
        assert_eq!(pts[1].p_tx_dbm, 10.0);
        assert_eq!(pts[2].tracker, TrackerVariant::Pf { n_particles: 50 });
    }

    #[test]
    fn block_is_deterministic() {
        let cfg = small();
        for pt in SweepPoint::enumerate(&cfg) {
            let a = run_block(&cfg, &pt, 2).unwrap();
            let b = run_block(&cfg, &pt, 2).unwrap();
            assert!(a.same_outcome(&b));
            assert_eq!(a.slots.len(), 10);
        }
    }

    #[test]
    fn trackers_share_the_trajectory() {
        let cfg = small();
        let pts = SweepPoint::enumerate(&cfg);
        let a = run_block(&cfg, &pts[0], 1).unwrap();
        let b = run_block(&cfg, &pts[1], 1).unwrap();
        for (s, t) in a.slots.iter().zip(&b.slots) {
            assert_eq!(s.truth, t.truth);
        }
    }

    #[test]
    fn static_noiseless_is_exact() {
        let cfg = ExperimentConfig {
            psi_s_deg: 0.0,
            psi_r_deg: 0.0,
            noise_dbm: f64::NEG_INFINITY,
            slots_per_block: 100,
            ..small()
        };
        for pt in SweepPoint::enumerate(&cfg) {
            let r = run_block(&cfg, &pt, 0).unwrap();
            for s in &r.slots {
                assert!(s.err / s.pow < 1e-10, "{:?}", pt.tracker);
            }
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = small();
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.blocks, y.blocks);
            assert_eq!(x.nmse, y.nmse);
        }
    }

    #[test]
    fn trajectory_length() {
        let cfg = ExperimentConfig {
            record_trajectory: true,
            ..small()
        };
        let r = run_experiment(&cfg, 1).unwrap();
        assert_eq!(r[0].trajectory.as_ref().unwrap().len(), 10);
        assert!(r[0].ess_mean.is_none());
        assert!(r[1].ess_mean.unwrap() > 0.0);
    }
}
