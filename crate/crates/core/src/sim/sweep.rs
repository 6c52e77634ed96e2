//! Monte-Carlo BER sweeps.
//!
//! Trial `t` draws everything from a stream seeded by
//! `(master_seed, t)`, and aggregation folds per-trial results in
//! trial order, so a sweep's output is a pure function of the
//! configuration and seed no matter how many worker threads run it.
//! A degenerate trial (a detector error) is recorded as a failure and
//! never aborts the sweep.

use rayon::prelude::*;

use crate::constellation::{build_constellation, Constellation};
use crate::detectors::{detect, DetectorConfig, Scheme};
use crate::sim::channel::{snr_to_sigma2, ChannelInstance};
use crate::sim::metrics::MetricsError;
use crate::sim::rng::trial_rng;

use rand_chacha::ChaCha8Rng;

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub bits: u64,
    /// Flops spent in detector initialization and iterations, when
    /// instrumentation capture was requested.
    pub flops: Option<(u64, f64)>,
    /// The detector error, if the trial failed.
    pub failure: Option<String>,
}

/// One channel draw, one detection, one bit comparison.
pub fn run_trial(
    cfg: &DetectorConfig,
    scheme: Scheme,
    capture_flops: bool,
    rng: &mut ChaCha8Rng,
) -> TrialOutcome {
    let inst = ChannelInstance::generate(cfg.n_rx, cfg.n_tx, &cfg.constellation, cfg.sigma2, rng);
    let bits = inst.bits_true.len() as u64;
    match detect(scheme, &inst.h, &inst.y, cfg) {
        Ok(detection) => {
            let decided = detection.bits(&cfg.constellation);
            let bit_errors = decided
                .iter()
                .zip(inst.bits_true.iter())
                .filter(|(a, b)| a != b)
                .count() as u64;
            let flops = capture_flops.then(|| {
                (
                    detection.init_flops.flops(),
                    detection.iteration_flops.flops() as f64 / detection.iterations as f64,
                )
            });
            TrialOutcome {
                bit_errors,
                bits,
                flops,
                failure: None,
            }
        }
        Err(e) => TrialOutcome {
            bit_errors: 0,
            bits: 0,
            flops: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Aggregated result of one (scheme, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub n_tx: usize,
    pub n_rx: usize,
    pub order: usize,
    pub iterations: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Measured initialization flops (zero when not captured).
    pub flops_init: f64,
    /// Measured average flops per iteration (zero when not captured).
    pub flops_per_iter: f64,
    /// Trials that ended in a detector error.
    pub failures: u64,
}

/// Sweep configuration: schemes and SNR grid around one system shape.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    pub n_tx: usize,
    pub n_rx: usize,
    pub order: usize,
    pub iterations: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub capture_flops: bool,
}

/// Run `trials` independent trials for every (scheme, SNR) pair.
///
/// `threads` sizes a dedicated worker pool; the records are identical
/// for any thread count.
pub fn run_sweep(
    cfg: &SweepConfig,
    snr_grid_db: &[f64],
    threads: usize,
) -> Result<Vec<BerRecord>, MetricsError> {
    let constellation =
        build_constellation(cfg.order).map_err(|_| MetricsError::BadOrder(cfg.order))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("worker pool");

    let mut records = Vec::with_capacity(cfg.schemes.len() * snr_grid_db.len());
    for &scheme in &cfg.schemes {
        for &snr_db in snr_grid_db {
            records.push(run_cell(cfg, &constellation, scheme, snr_db, &pool)?);
        }
    }
    Ok(records)
}

fn run_cell(
    cfg: &SweepConfig,
    constellation: &Constellation,
    scheme: Scheme,
    snr_db: f64,
    pool: &rayon::ThreadPool,
) -> Result<BerRecord, MetricsError> {
    let sigma2 = snr_to_sigma2(snr_db, cfg.n_tx);
    let det_cfg = DetectorConfig::new(
        cfg.n_tx,
        cfg.n_rx,
        cfg.iterations,
        constellation.clone(),
        sigma2,
    )?;
    let capture = cfg.capture_flops;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.master_seed, t);
                run_trial(&det_cfg, scheme, capture, &mut rng)
            })
            .collect()
    });

    // Deterministic ordered reduction over trial index.
    let mut bits = 0u64;
    let mut bit_errors = 0u64;
    let mut failures = 0u64;
    let mut flops_init_sum = 0.0;
    let mut flops_iter_sum = 0.0;
    let mut flop_samples = 0u64;
    for o in &outcomes {
        if o.failure.is_some() {
            failures += 1;
            continue;
        }
        bits += o.bits;
        bit_errors += o.bit_errors;
        if let Some((init, per_iter)) = o.flops {
            flops_init_sum += init as f64;
            flops_iter_sum += per_iter;
            flop_samples += 1;
        }
    }
    let ber = if bits > 0 {
        bit_errors as f64 / bits as f64
    } else {
        0.0
    };
    let (flops_init, flops_per_iter) = if flop_samples > 0 {
        (
            flops_init_sum / flop_samples as f64,
            flops_iter_sum / flop_samples as f64,
        )
    } else {
        (0.0, 0.0)
    };
    Ok(BerRecord {
        scheme,
        n_tx: cfg.n_tx,
        n_rx: cfg.n_rx,
        order: cfg.order,
        iterations: cfg.iterations,
        snr_db,
        trials: cfg.trials,
        bits,
        bit_errors,
        ber,
        flops_init,
        flops_per_iter,
        failures,
    })
}
