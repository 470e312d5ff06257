//! CSV results and gnuplot script.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::config::PhasePolicy;
use crate::harness::run::RunResult;

pub const CSV_COLUMNS: [&str; 11] = [
    "tracker",
    "n_particles",
    "phase_policy",
    "p_tx_dbm",
    "L",
    "nmse",
    "nmse_db",
    "ess_mean",
    "degenerate_events",
    "clamp_events",
    "seconds",
];

/// One parsed CSV row. `ess_mean` is `None` for the EKF.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub tracker: String,
    pub n_particles: usize,
    pub phase_policy: String,
    pub p_tx_dbm: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub nmse: f64,
    pub nmse_db: f64,
    pub ess_mean: Option<f64>,
    pub degenerate_events: u64,
    pub clamp_events: u64,
    pub seconds: f64,
}

impl CsvRow {
    pub fn from_result(r: &RunResult) -> Self {
        CsvRow {
            tracker: r.point.tracker.name().to_string(),
            n_particles: r.point.tracker.n_particles(),
            phase_policy: r.point.policy.as_str().to_string(),
            p_tx_dbm: r.point.p_tx_dbm,
            l: r.point.l,
            nmse: r.nmse,
            nmse_db: r.nmse_db,
            ess_mean: r.ess_mean,
            degenerate_events: r.degenerate_events,
            clamp_events: r.clamp_events,
            seconds: r.seconds,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Renders the CSV text (header plus one row per result).
pub fn csv_string(results: &[RunResult]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Numerical(format!("csv encoding: {e}"));
    w.write_record(CSV_COLUMNS).map_err(wrap)?;
    for r in results {
        let row = CsvRow::from_result(r);
        w.write_record([
            row.tracker,
            row.n_particles.to_string(),
            row.phase_policy,
            float(row.p_tx_dbm),
            row.l.to_string(),
            float(row.nmse),
            float(row.nmse_db),
            row.ess_mean.map(float).unwrap_or_default(),
            row.degenerate_events.to_string(),
            row.clamp_events.to_string(),
            float(row.seconds),
        ])
        .map_err(wrap)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_csv(results: &[RunResult], path: &Path) -> Result<()> {
    fs::write(path, csv_string(results)?).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| Error::Config(format!("csv header: {e}")))?;
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected csv columns: {headers:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Config(format!("csv row: {e}"))))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// One plotted curve: a fixed tracker, particle count, policy and surface size.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CurveKey {
    pub tracker: String,
    pub n_particles: usize,
    pub policy: PhasePolicy,
    pub l: usize,
}

pub fn plot_curves(results: &[RunResult]) -> Vec<CurveKey> {
    let set: BTreeSet<CurveKey> = results
        .iter()
        .map(|r| CurveKey {
            tracker: r.point.tracker.name().to_string(),
            n_particles: r.point.tracker.n_particles(),
            policy: r.point.policy,
            l: r.point.l,
        })
        .collect();
    set.into_iter().collect()
}

/// gnuplot script drawing NMSE against transmit power, one curve per
/// [`CurveKey`], reading `csv_name` from gnuplot's working directory.
pub fn plot_script(results: &[RunResult], csv_name: &str) -> Result<String> {
    if Path::new(csv_name).is_absolute() {
        return Err(Error::Argument(format!(
            "plot data path must be relative, got {csv_name}"
        )));
    }
    let curves = plot_curves(results);
    let many_policies = curves
        .iter()
        .map(|c| c.policy)
        .collect::<BTreeSet<_>>()
        .len()
        > 1;
    let many_sizes = curves.iter().map(|c| c.l).collect::<BTreeSet<_>>().len() > 1;

    let mut s = String::new();
    s.push_str("# NMSE of H versus transmit power\n");
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set logscale y\n");
    s.push_str("set format y \"10^{%L}\"\n");
    s.push_str("set xlabel \"p_{TX} (dBm)\"\n");
    s.push_str("set ylabel \"NMSE of H\"\n");
    s.push_str("set key top right\n");
    s.push_str("set grid\n");
    let _ = writeln!(s, "data = \"{csv_name}\"");
    if curves.is_empty() {
        return Ok(s);
    }
    s.push_str("plot \\\n");
    for (i, c) in curves.iter().enumerate() {
        let mut title = if c.tracker == "ekf" {
            "EKF".to_string()
        } else {
            format!("PF, N_s = {}", c.n_particles)
        };
        if many_policies {
            let _ = write!(title, ", {}", c.policy);
        }
        if many_sizes {
            let _ = write!(title, ", L = {}", c.l);
        }
        let sep = if i + 1 < curves.len() { ", \\" } else { "" };
        let _ = writeln!(
            s,
            "  data skip 1 using 4:((strcol(1) eq \"{}\" && $2 == {} && strcol(3) eq \"{}\" && $5 == {}) ? $6 : 1/0) \
             with linespoints title \"{}\"{}",
            c.tracker, c.n_particles, c.policy, c.l, title, sep
        );
    }
    Ok(s)
}

pub fn emit_plot_script(results: &[RunResult], path: &Path, csv_name: &str) -> Result<()> {
    fs::write(path, plot_script(results, csv_name)?).map_err(|e| Error::io(path, e))
}
