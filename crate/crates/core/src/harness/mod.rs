//! Experiment orchestration: configuration, simulation loop, metrics and output.

pub mod config;
pub mod metrics;
pub mod output;
pub mod propcheck;
pub mod run;

pub use config::{ExperimentConfig, PhasePolicy, TrackerKind, TrackerVariant};
pub use metrics::{bootstrap_prob_le, nmse, to_db, NmseAccumulator};
pub use output::{emit_csv, emit_plot_script, parse_csv, read_csv, CsvRow, CSV_COLUMNS};
pub use propcheck::{propcheck, PropcheckReport};
pub use run::{run_block, run_experiment, BlockRecord, RunResult, SlotRecord, SweepPoint};
