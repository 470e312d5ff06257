use ristrack::harness::output::{csv_string, plot_curves, plot_script};
use ristrack::harness::{
    emit_csv, parse_csv, read_csv, run_block, run_experiment, ExperimentConfig, NmseAccumulator,
    PhasePolicy, SweepPoint, TrackerKind, CSV_COLUMNS,
};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        ris_sizes: vec![4],
        p_tx_dbm: vec![10.0, 30.0],
        pf_particles: vec![20],
        phase_policies: vec![PhasePolicy::BeamMatch, PhasePolicy::Random],
        slots_per_block: 20,
        n_blocks: 4,
        ..Default::default()
    }
}

/// CSV with the trailing timing column removed from every line.
fn without_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map(|(head, _)| head).unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn repeated_runs_give_identical_csv() {
    let cfg = small();
    let a = csv_string(&run_experiment(&cfg, 1).unwrap()).unwrap();
    let b = csv_string(&run_experiment(&cfg, 1).unwrap()).unwrap();
    let c = csv_string(&run_experiment(&cfg, 3).unwrap()).unwrap();
    assert_eq!(without_seconds(&a), without_seconds(&b));
    assert_eq!(without_seconds(&a), without_seconds(&c));
}

#[test]
fn single_point_equals_block_aggregation() {
    let cfg = ExperimentConfig {
        p_tx_dbm: vec![20.0],
        trackers: vec![TrackerKind::Pf],
        phase_policies: vec![PhasePolicy::BeamMatch],
        ..small()
    };
    let results = run_experiment(&cfg, 2).unwrap();
    assert_eq!(results.len(), 1);
    let point = SweepPoint::enumerate(&cfg)[0];
    let mut acc = NmseAccumulator::default();
    for b in 0..cfg.n_blocks {
        acc.merge(&run_block(&cfg, &point, b).unwrap().acc);
    }
    assert_eq!(results[0].total, acc);
    assert_eq!(results[0].nmse, acc.ratio().unwrap());
}

#[test]
fn doubling_blocks_is_additive() {
    let first = small();
    let second = ExperimentConfig {
        seed: first.seed + first.n_blocks as u64,
        ..first.clone()
    };
    let both = ExperimentConfig {
        n_blocks: 2 * first.n_blocks,
        ..first.clone()
    };
    let r1 = run_experiment(&first, 0).unwrap();
    let r2 = run_experiment(&second, 0).unwrap();
    let rb = run_experiment(&both, 0).unwrap();
    for ((a, b), c) in r1.iter().zip(&r2).zip(&rb) {
        let mut blocks = a.blocks.clone();
        blocks.extend(&b.blocks);
        assert_eq!(blocks, c.blocks);
        let combined = (a.total.err + b.total.err) / (a.total.pow + b.total.pow);
        assert!((combined - c.nmse).abs() <= 1e-12 * c.nmse);
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let results = run_experiment(&small(), 0).unwrap();
    emit_csv(&results, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), results.len());
    for (row, r) in rows.iter().zip(&results) {
        assert_eq!(row.tracker, r.point.tracker.name());
        assert_eq!(row.n_particles, r.point.tracker.n_particles());
        assert_eq!(row.phase_policy, r.point.policy.as_str());
        assert_eq!(row.p_tx_dbm, r.point.p_tx_dbm);
        assert_eq!(row.l, r.point.l);
        assert_eq!(row.nmse, r.nmse);
        assert_eq!(row.nmse_db, r.nmse_db);
        assert_eq!(row.ess_mean, r.ess_mean);
        assert_eq!(row.degenerate_events, r.degenerate_events);
        assert_eq!(row.clamp_events, r.clamp_events);
        assert_eq!(row.seconds, r.seconds);
    }
    assert_eq!(parse_csv(&text).unwrap(), rows);
}

#[test]
fn csv_errors_carry_the_path() {
    let err = emit_csv(&[], std::path::Path::new("/nonexistent-dir/x.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
}

#[test]
fn plot_script_has_one_curve_per_combination() {
    let results = run_experiment(&small(), 0).unwrap();
    // EKF and PF-20, each under two policies.
    assert_eq!(plot_curves(&results).len(), 4);
    let s = plot_script(&results, "results.csv").unwrap();
    assert_eq!(s.matches(" title \"").count(), 4);
    assert!(s.contains("set logscale y"));
    assert!(s.contains("data = \"results.csv\""));
    assert!(s.lines().all(|l| !l.contains("\"/")));
}

#[test]
fn ekf_vs_two_particle_counts_gives_three_curves() {
    let cfg = ExperimentConfig {
        ris_sizes: vec![4],
        p_tx_dbm: vec![0.0, 20.0, 40.0],
        pf_particles: vec![50, 200],
        slots_per_block: 5,
        n_blocks: 1,
        ..Default::default()
    };
    let results = run_experiment(&cfg, 0).unwrap();
    let s = plot_script(&results, "results.csv").unwrap();
    assert_eq!(s.matches(" title \"").count(), 3);
    for t in ["\"EKF\"", "\"PF, N_s = 50\"", "\"PF, N_s = 200\""] {
        assert!(s.contains(t), "{t} missing");
    }
}
