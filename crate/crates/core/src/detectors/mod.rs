//! The detection schemes behind one driver loop.
//!
//! A detection run is `K` iterations of `N` procedures in index order.
//! Each procedure produces an LMMSE estimate and filtering bias for
//! one symbol, converts them to soft statistics, and folds the new
//! soft decision and residual variance back into the scheme's state.
//! The schemes differ only in how the estimate is produced and what
//! state they maintain between procedures; on the same instance they
//! agree on every estimate up to rounding.

mod ammse;
mod conventional;
mod hdosic;
mod recursive;

pub use ammse::AmmseDetector;
pub use conventional::{conv_procedure, ConventionalDetector};
pub use hdosic::{hdosic_deflate, hdosic_detect, hdosic_detect_with_order, hdosic_expand, DetectionOrder, HdosicDetector};
pub use recursive::RecursiveDetector;

use num_complex::Complex64;
use thiserror::Error;

use crate::constellation::{soft_statistics, Constellation, SoftStats};
use crate::linalg::flops::{self, FlopCounter};
use crate::linalg::{ComplexMatrix, ComplexVector, DiagonalVariance, LinalgError};

/// Identifier of a detection scheme, also its wire name in CLI and
/// CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Conventional LMMSE-ISIC with per-procedure covariance inverses.
    Conventional,
    /// Low-complexity affine-MMSE scheme.
    Ammse,
    /// Recursive scheme on the Hermitian inverse and estimate vector.
    Recursive,
    /// Hard-decision ordered successive interference cancellation.
    HdOsic,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Conventional,
        Scheme::Ammse,
        Scheme::Recursive,
        Scheme::HdOsic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Conventional => "conv",
            Scheme::Ammse => "alg1",
            Scheme::Recursive => "alg2",
            Scheme::HdOsic => "hdosic",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s {
            "conv" => Some(Scheme::Conventional),
            "alg1" => Some(Scheme::Ammse),
            "alg2" => Some(Scheme::Recursive),
            "hdosic" => Some(Scheme::HdOsic),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Errors raised while detecting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    /// An update denominator collapsed below the guard threshold.
    #[error("degenerate {what} denominator ({value:e}) at symbol {symbol}")]
    Degenerate {
        what: &'static str,
        symbol: usize,
        value: f64,
    },
    /// A diagonal entry of the maintained inverse stopped being
    /// positive, which can only come from accumulated drift.
    #[error("positive definiteness lost at index {index} (diagonal {value:e})")]
    PositiveDefinitenessLost { index: usize, value: f64 },
}

/// Guard threshold for update denominators.
pub(crate) const DEGENERACY_GUARD: f64 = 1e-14;

/// Dimensions, iteration count, alphabet and noise level of one run.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Transmit streams.
    pub n_tx: usize,
    /// Receive antennas (at least `n_tx`).
    pub n_rx: usize,
    /// Full iterations over all symbols.
    pub iterations: usize,
    pub constellation: Constellation,
    /// Noise variance per receive antenna.
    pub sigma2: f64,
}

impl DetectorConfig {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        iterations: usize,
        constellation: Constellation,
        sigma2: f64,
    ) -> Result<Self, DetectorError> {
        if n_tx == 0 || n_rx < n_tx {
            return Err(DetectorError::Config("need n_rx >= n_tx >= 1"));
        }
        if iterations == 0 {
            return Err(DetectorError::Config("need at least one iteration"));
        }
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(DetectorError::Config("noise variance must be positive"));
        }
        Ok(Self {
            n_tx,
            n_rx,
            iterations,
            constellation,
            sigma2,
        })
    }
}

/// Soft decisions, residual variances and last-iteration posteriors,
/// shared by all iterative soft schemes.
#[derive(Debug, Clone)]
pub struct IsicSharedState {
    /// Soft decision of each symbol; starts at zero.
    pub soft: ComplexVector,
    /// Residual interference variance of each symbol; starts at one.
    pub variance: DiagonalVariance,
    /// Posterior of each symbol from the final iteration.
    pub posteriors: Vec<Vec<f64>>,
}

impl IsicSharedState {
    pub fn new(n: usize) -> Self {
        Self {
            soft: ComplexVector::zeros(n),
            variance: DiagonalVariance::ones(n),
            posteriors: vec![Vec::new(); n],
        }
    }
}

/// One soft-interference-cancellation scheme.
pub trait IsicEstimator {
    /// LMMSE estimate and filtering bias for symbol `n` under the
    /// current state.
    fn estimate(&mut self, n: usize) -> Result<(Complex64, f64), DetectorError>;

    /// Fold the soft statistics of symbol `n` into the state.
    fn absorb(&mut self, n: usize, stats: &SoftStats) -> Result<(), DetectorError>;

    fn shared(&self) -> &IsicSharedState;

    fn shared_mut(&mut self) -> &mut IsicSharedState;
}

/// Per-procedure trace entry for diagnostics and equivalence checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureRecord {
    pub iteration: usize,
    pub symbol: usize,
    pub estimate: Complex64,
    pub bias: f64,
    pub soft_decision: Complex64,
    pub residual_variance: f64,
}

/// Hard decisions plus the flop tallies of the run, split between
/// initialization and the iteration phase.
#[derive(Debug, Clone)]
pub struct Detection {
    /// Hard-decision point index per transmit symbol.
    pub hard_indices: Vec<usize>,
    pub init_flops: FlopCounter,
    pub iteration_flops: FlopCounter,
    pub iterations: usize,
}

impl Detection {
    /// Detected bits under the run's constellation.
    pub fn bits(&self, c: &Constellation) -> Vec<u8> {
        c.bits_from_hard_indices(&self.hard_indices)
    }
}

/// Run `K` iterations of `N` procedures, recording per-procedure
/// traces when an observer is supplied.
pub fn run_isic<E: IsicEstimator>(
    estimator: &mut E,
    cfg: &DetectorConfig,
    mut observer: Option<&mut dyn FnMut(ProcedureRecord)>,
) -> Result<Vec<usize>, DetectorError> {
    let n = cfg.n_tx;
    let mut hard = vec![0usize; n];
    for iteration in 0..cfg.iterations {
        let last = iteration + 1 == cfg.iterations;
        for symbol in 0..n {
            let (estimate, bias) = estimator.estimate(symbol)?;
            let stats = soft_statistics(estimate, bias, &cfg.constellation);
            estimator.absorb(symbol, &stats)?;
            if last {
                hard[symbol] = stats.hard_index;
                estimator.shared_mut().posteriors[symbol] = stats.posterior.clone();
            }
            if let Some(obs) = observer.as_deref_mut() {
                obs(ProcedureRecord {
                    iteration,
                    symbol,
                    estimate,
                    bias,
                    soft_decision: stats.soft_decision,
                    residual_variance: stats.residual_variance,
                });
            }
        }
    }
    Ok(hard)
}

fn check_instance(
    h: &ComplexMatrix,
    y: &ComplexVector,
    cfg: &DetectorConfig,
) -> Result<(), DetectorError> {
    if h.rows() != cfg.n_rx || h.cols() != cfg.n_tx || y.len() != cfg.n_rx {
        return Err(DetectorError::Config("instance dimensions do not match config"));
    }
    Ok(())
}

macro_rules! isic_detect_fn {
    ($(#[$doc:meta])* $name:ident, $state:ident) => {
        $(#[$doc])*
        pub fn $name(
            h: &ComplexMatrix,
            y: &ComplexVector,
            cfg: &DetectorConfig,
        ) -> Result<Detection, DetectorError> {
            check_instance(h, y, cfg)?;
            let before = flops::thread_counter();
            let mut state = $state::new(h, y, cfg)?;
            let after_init = flops::thread_counter();
            let hard_indices = run_isic(&mut state, cfg, None)?;
            let after_iters = flops::thread_counter();
            Ok(Detection {
                hard_indices,
                init_flops: after_init - before,
                iteration_flops: after_iters - after_init,
                iterations: cfg.iterations,
            })
        }
    };
}

isic_detect_fn!(
    /// Detect with the conventional per-procedure covariance inverse.
    conv_detect,
    ConventionalDetector
);
isic_detect_fn!(
    /// Detect with the low-complexity affine-MMSE scheme.
    ammse_detect,
    AmmseDetector
);
isic_detect_fn!(
    /// Detect with the recursive inverse-update scheme.
    recursive_detect,
    RecursiveDetector
);

/// Dispatch on scheme. `HdOsic` ignores `cfg.iterations` beyond the
/// single successive-cancellation pass.
pub fn detect(
    scheme: Scheme,
    h: &ComplexMatrix,
    y: &ComplexVector,
    cfg: &DetectorConfig,
) -> Result<Detection, DetectorError> {
    match scheme {
        Scheme::Conventional => conv_detect(h, y, cfg),
        Scheme::Ammse => ammse_detect(h, y, cfg),
        Scheme::Recursive => recursive_detect(h, y, cfg),
        Scheme::HdOsic => hdosic_detect(h, y, cfg),
    }
}

/// As [`detect`] for the soft schemes, returning the per-procedure
/// trace alongside the result.
pub fn detect_traced(
    scheme: Scheme,
    h: &ComplexMatrix,
    y: &ComplexVector,
    cfg: &DetectorConfig,
) -> Result<(Detection, Vec<ProcedureRecord>), DetectorError> {
    check_instance(h, y, cfg)?;
    let mut trace = Vec::with_capacity(cfg.iterations * cfg.n_tx);
    let mut obs = |r: ProcedureRecord| trace.push(r);
    let before = flops::thread_counter();
    let detection = match scheme {
        Scheme::Conventional => {
            let mut s = ConventionalDetector::new(h, y, cfg)?;
            let after_init = flops::thread_counter();
            let hard = run_isic(&mut s, cfg, Some(&mut obs))?;
            finish(hard, before, after_init, cfg)
        }
        Scheme::Ammse => {
            let mut s = AmmseDetector::new(h, y, cfg)?;
            let after_init = flops::thread_counter();
            let hard = run_isic(&mut s, cfg, Some(&mut obs))?;
            finish(hard, before, after_init, cfg)
        }
        Scheme::Recursive => {
            let mut s = RecursiveDetector::new(h, y, cfg)?;
            let after_init = flops::thread_counter();
            let hard = run_isic(&mut s, cfg, Some(&mut obs))?;
            finish(hard, before, after_init, cfg)
        }
        Scheme::HdOsic => return Err(DetectorError::Config("no procedure trace for hdosic")),
    };
    Ok((detection, trace))
}

fn finish(
    hard_indices: Vec<usize>,
    before: FlopCounter,
    after_init: FlopCounter,
    cfg: &DetectorConfig,
) -> Detection {
    let after = flops::thread_counter();
    Detection {
        hard_indices,
        init_flops: after_init - before,
        iteration_flops: after - after_init,
        iterations: cfg.iterations,
    }
}

/// Footprint of one matrix held by a detector across an iteration.
///
/// Memory is counted in units that store one real number: a Hermitian
/// `n x n` matrix needs `n^2` units (one triangle plus a real
/// diagonal), a general complex `r x c` matrix needs `2 r c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixFootprint {
    pub rows: usize,
    pub cols: usize,
    pub hermitian: bool,
}

impl MatrixFootprint {
    pub fn units(&self) -> u64 {
        if self.hermitian {
            (self.rows * self.cols) as u64
        } else {
            2 * (self.rows * self.cols) as u64
        }
    }
}

/// Audit of the matrices a scheme keeps live during the iteration
/// phase.
pub trait HeldMatrices {
    fn held_matrices(&self) -> Vec<MatrixFootprint>;
}
