//! The low-complexity affine-MMSE scheme.
//!
//! Instead of masking the target symbol out of the cancellation, this
//! scheme subtracts every soft decision and undoes the target's
//! contribution with an affine correction. The working inverse
//! `G = (H^H H V + s2 I)^{-1}` absorbs each variance change through a
//! rank-one correction, so no fresh matrix inversion is needed after
//! initialization.
//!
//! The variance written by a procedure is folded into `G` at the start
//! of the next procedure, mirroring where the work lands in a
//! streaming implementation; the very first procedure performs the
//! correction with an unchanged variance, which costs the same and
//! changes nothing.

use num_complex::Complex64;

use super::{
    check_instance, DetectorConfig, DetectorError, HeldMatrices, IsicEstimator, IsicSharedState,
    MatrixFootprint, DEGENERACY_GUARD,
};
use crate::constellation::SoftStats;
use crate::linalg::flops::{tally_cadd, tally_cmul};
use crate::linalg::{
    dot_adjoint, dot_adjoint_col, gram, ComplexMatrix, ComplexVector, HermitianMatrix,
};

struct PendingStats {
    symbol: usize,
    soft: Complex64,
    variance: f64,
}

/// Detector state: Gram matrix `W`, working inverse `G`, the channel,
/// and the shared soft-decision state.
pub struct AmmseDetector<'a> {
    w: HermitianMatrix,
    g: ComplexMatrix,
    h: &'a ComplexMatrix,
    y: &'a ComplexVector,
    shared: IsicSharedState,
    /// Soft statistics produced by the previous procedure, not yet
    /// folded into `G`.
    pending: Option<PendingStats>,
    cancelled: ComplexVector,
    filter: ComplexVector,
    scratch: Vec<Complex64>,
}

impl<'a> AmmseDetector<'a> {
    pub fn new(
        h: &'a ComplexMatrix,
        y: &'a ComplexVector,
        cfg: &DetectorConfig,
    ) -> Result<Self, DetectorError> {
        check_instance(h, y, cfg)?;
        let w = gram(h)?;
        let g = w.inverse(cfg.sigma2)?.to_general();
        Ok(Self {
            w,
            g,
            h,
            y,
            shared: IsicSharedState::new(cfg.n_tx),
            pending: None,
            cancelled: ComplexVector::zeros(cfg.n_rx),
            filter: ComplexVector::zeros(cfg.n_rx),
            scratch: vec![Complex64::new(0.0, 0.0); cfg.n_tx],
        })
    }

    pub fn g(&self) -> &ComplexMatrix {
        &self.g
    }

    pub fn w(&self) -> &HermitianMatrix {
        &self.w
    }

    /// Rank-one correction of `G` after `v[j]` moved from `v_old` to
    /// `v_new`.
    pub fn update_g(&mut self, j: usize, v_old: f64, v_new: f64) -> Result<(), DetectorError> {
        let n = self.g.rows();
        // z = (v_new - v_old) G w_j, where w_j is column j of W.
        let mut wcol = self.w.col(j);
        let dv = v_new - v_old;
        for v in wcol.iter_mut() {
            *v = Complex64::new(v.re * dv, v.im * dv);
        }
        let z = self.g.matvec(&wcol, false)?;
        let denom = z[j] + Complex64::new(1.0, 0.0);
        tally_cadd(1);
        if denom.norm() < DEGENERACY_GUARD {
            return Err(DetectorError::Degenerate {
                what: "inverse correction",
                symbol: j,
                value: denom.norm(),
            });
        }
        let recip = Complex64::new(1.0, 0.0) / denom;
        tally_cmul(1);
        let mut u = z;
        for v in u.as_mut_slice() {
            *v *= recip;
        }
        tally_cmul(n as u64);
        let row_j = self.g.row(j).to_vec();
        self.g.sub_outer(u.as_slice(), &row_j)?;
        Ok(())
    }

    /// Apply the statistics computed by the previous procedure (if
    /// any) to the shared state and to `G`.
    fn settle_previous(&mut self, n: usize) -> Result<(), DetectorError> {
        let n_tx = self.g.rows();
        let j = (n + n_tx - 1) % n_tx;
        let (soft, variance) = match self.pending.take() {
            Some(p) => {
                debug_assert_eq!(p.symbol, j);
                (p.soft, p.variance)
            }
            // First procedure of the run: same-value update, z = 0.
            None => (self.shared.soft[j], self.shared.variance.get(j)),
        };
        let v_old = self.shared.variance.get(j);
        self.shared.soft[j] = soft;
        self.shared.variance.set(j, variance);
        self.update_g(j, v_old, self.shared.variance.get(j))
    }
}

impl IsicEstimator for AmmseDetector<'_> {
    fn estimate(&mut self, n: usize) -> Result<(Complex64, f64), DetectorError> {
        self.settle_previous(n)?;
        let m = self.h.rows();

        // Cancel everything: y - H x_bar.
        let hx = self.h.matvec(self.shared.soft.as_slice(), false)?;
        for r in 0..m {
            self.cancelled[r] = self.y[r] - hx[r];
        }
        tally_cadd(m as u64);

        // Filtering vector H g_n^H from row n of G.
        for (dst, src) in self.scratch.iter_mut().zip(self.g.row(n)) {
            *dst = src.conj();
        }
        self.h
            .matvec_into(&self.scratch, false, self.filter.as_mut_slice())?;

        let alpha = dot_adjoint_col(self.filter.as_slice(), self.h, n).re;
        let v_n = self.shared.variance.get(n);
        let beta_denom = (1.0 - v_n) * alpha + 1.0;
        if beta_denom.abs() < DEGENERACY_GUARD {
            return Err(DetectorError::Degenerate {
                what: "affine correction",
                symbol: n,
                value: beta_denom,
            });
        }
        let beta = 1.0 / beta_denom;
        let filtered = dot_adjoint(self.filter.as_slice(), self.cancelled.as_slice());
        let estimate = beta * filtered + (alpha * beta) * self.shared.soft[n];
        tally_cadd(1);
        let bias = alpha * beta;
        Ok((estimate, bias))
    }

    fn absorb(&mut self, n: usize, stats: &SoftStats) -> Result<(), DetectorError> {
        self.pending = Some(PendingStats {
            symbol: n,
            soft: stats.soft_decision,
            variance: stats.residual_variance,
        });
        Ok(())
    }

    fn shared(&self) -> &IsicSharedState {
        &self.shared
    }

    fn shared_mut(&mut self) -> &mut IsicSharedState {
        &mut self.shared
    }
}

impl HeldMatrices for AmmseDetector<'_> {
    fn held_matrices(&self) -> Vec<MatrixFootprint> {
        vec![
            MatrixFootprint {
                rows: self.w.n(),
                cols: self.w.n(),
                hermitian: true,
            },
            MatrixFootprint {
                rows: self.g.rows(),
                cols: self.g.cols(),
                hermitian: false,
            },
            MatrixFootprint {
                rows: self.h.rows(),
                cols: self.h.cols(),
                hermitian: false,
            },
        ]
    }
}
