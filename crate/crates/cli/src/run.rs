//! Experiment execution: resolve the worker count, run the sweep,
//! write outputs.

use isic_core::sim::{run_sweep, BerRecord, MetricsError, SweepConfig};

use crate::args::ExperimentConfig;
use crate::{csv, svg};

/// Worker-count override honored by the driver.
pub const THREADS_ENV: &str = "ISIC_THREADS";

#[derive(Debug)]
pub enum RunError {
    /// Configuration was rejected below the argument layer.
    Config(String),
    /// Output could not be written.
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "{msg}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<MetricsError> for RunError {
    fn from(e: MetricsError) -> Self {
        RunError::Config(e.to_string())
    }
}

/// Threads from the environment override, defaulting to the machine's
/// available parallelism.
pub fn resolve_threads() -> usize {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
        eprintln!("warning: ignoring invalid {THREADS_ENV}={text}");
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Run the configured sweep on `threads` workers.
pub fn run_records(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<BerRecord>, RunError> {
    let sweep = SweepConfig {
        schemes: cfg.schemes.clone(),
        n_tx: cfg.n_tx,
        n_rx: cfg.n_rx,
        order: cfg.order,
        iterations: cfg.iterations,
        trials: cfg.trials,
        master_seed: cfg.seed,
        capture_flops: cfg.count_flops,
    };
    Ok(run_sweep(&sweep, &cfg.snr_grid_db, threads)?)
}

/// Full experiment: sweep, CSV, optional plots.
pub fn execute(cfg: &ExperimentConfig) -> Result<(), RunError> {
    let threads = resolve_threads();
    let records = run_records(cfg, threads)?;
    csv::emit_csv(&records, &cfg.out_path)?;
    eprintln!(
        "wrote {} records to {} ({} workers)",
        records.len(),
        cfg.out_path.display(),
        threads
    );
    let failures: u64 = records.iter().map(|r| r.failures).sum();
    if failures > 0 {
        eprintln!("warning: {failures} trials failed and were excluded");
    }
    if let Some(plot) = &cfg.plot_path {
        let written = svg::emit_plots(&records, plot)?;
        if written.is_empty() {
            eprintln!(
                "warning: not enough data to plot (need two SNR points or two sizes); no SVG written"
            );
        } else {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
