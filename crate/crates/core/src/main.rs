use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ristrack::channel::MobilityConfig;
use ristrack::harness::{emit_csv, emit_plot_script, propcheck, run_experiment, ExperimentConfig};
use ristrack::{fixtures, Error};

const SEED_ENV: &str = "RIS_TRACK_SEED";
const CSV_NAME: &str = "results.csv";
const PLOT_NAME: &str = "nmse.gp";

#[derive(Parser, Debug)]
#[command(name = "ristrack", version, about = "RIS channel tracking simulator")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed; overrides the config file and RIS_TRACK_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of blocks per sweep point; overrides the config file.
    #[arg(long, global = true)]
    blocks: Option<usize>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sweep described by a config file and write CSV plus a gnuplot script.
    Run { config: PathBuf },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// Monte-Carlo check of the proposal supports against exact-trig steps.
    Propcheck {
        #[arg(long, default_value_t = 0.5)]
        psi_s_deg: f64,
        #[arg(long, default_value_t = 0.5)]
        psi_r_deg: f64,
        #[arg(long, default_value_t = 1_000_000)]
        draws: usize,
    },
    /// Recompute the frozen test fixtures and report drift.
    Fixtures,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load_config(path: &Path, cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?;
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s.trim().parse().map_err(|_| {
            Failure::Config(format!("{SEED_ENV} must be an unsigned integer, got {s:?}"))
        })?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(blocks) = cli.blocks {
        cfg.n_blocks = blocks;
    }
    cfg.validate()?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate { config } => {
            let cfg = load_config(config, cli)?;
            let points = ristrack::harness::SweepPoint::enumerate(&cfg).len();
            println!(
                "{}: ok ({points} sweep points, {} blocks each)",
                config.display(),
                cfg.n_blocks
            );
        }
        Command::Run { config } => {
            let cfg = load_config(config, cli)?;
            let results = run_experiment(&cfg, cli.threads)?;
            std::fs::create_dir_all(&cli.out)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", cli.out.display())))?;
            let csv = cli.out.join(CSV_NAME);
            emit_csv(&results, &csv)?;
            emit_plot_script(&results, &cli.out.join(PLOT_NAME), CSV_NAME)?;
            for r in &results {
                println!(
                    "L={:<3} {:<7} {:<10} p_tx={:>6.1} dBm  NMSE={:.4e} ({:.2} dB)",
                    r.point.l,
                    r.point.tracker.label(),
                    r.point.policy,
                    r.point.p_tx_dbm,
                    r.nmse,
                    r.nmse_db
                );
            }
            println!(
                "simulated {} blocks x {} slots per sweep point; wrote {}",
                cfg.n_blocks,
                cfg.slots_per_block,
                csv.display()
            );
        }
        Command::Propcheck {
            psi_s_deg,
            psi_r_deg,
            draws,
        } => {
            let mob = MobilityConfig::from_degrees(*psi_s_deg, *psi_r_deg)?;
            let seed = cli.seed.unwrap_or(1);
            let r = propcheck(&mob, *draws, seed);
            println!("draws                {}", r.draws);
            println!("psi_s, psi_r (deg)   {psi_s_deg}, {psi_r_deg}");
            println!("coverage x_e         {:.6}", r.coverage_e);
            println!("coverage x_a         {:.6}", r.coverage_a);
            println!("coverage joint       {:.6}", r.coverage);
            println!("ks distance x_e      {:.6}", r.ks_e);
            println!("ks distance x_a      {:.6}", r.ks_a);
        }
        Command::Fixtures => {
            let (report, ok) = fixtures::regenerate()?;
            print!("{report}");
            if !ok {
                return Err(Failure::Runtime(
                    "fixtures drifted from their frozen values".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
