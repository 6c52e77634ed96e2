//! The recursive low-complexity scheme.
//!
//! State is the Hermitian inverse `Q = (Ht^H Ht + s2 I)^{-1}` of the
//! variance-scaled channel `Ht = H sqrt(V)` together with the symbol
//! estimate vector `t`, whose n-th entry is (a rescaling of) the LMMSE
//! estimate of symbol n. A procedure reads its estimate and bias off
//! `Q(n,n)` and `t(n)`, then absorbs the new soft decision and
//! variance by updating `t` and applying a rank-one correction to `Q`.
//! Neither the channel nor the receive vector is needed after
//! initialization, which is where the memory saving comes from.
//!
//! Procedure order inside `absorb` is fixed: `t` first (it needs the
//! pre-update column and diagonal of `Q`), then `Q`.
//!
//! Numerics. The bias of symbol n is `1 - s2 Q(n,n)`, which collapses
//! toward zero as the symbol's variance collapses; forming it by
//! subtraction from the stored diagonal throws away exactly the digits
//! the estimate formulas then divide by. The detector therefore
//! carries that complement in `eps`, updated in factored form: the
//! updated index evolves multiplicatively and every other index moves
//! by a correction on its own scale, so relative precision survives
//! saturation. For the same reason the common update denominator is
//! evaluated as `v_new eps + s2 w v_old` (all terms non-negative)
//! except when the variance did not move, where it equals `v_new`
//! exactly and that value is used directly; the latter keeps a
//! procedure that reproduces its own statistics bit-stable.

use num_complex::Complex64;

use super::{
    check_instance, DetectorConfig, DetectorError, HeldMatrices, IsicEstimator, IsicSharedState,
    MatrixFootprint, DEGENERACY_GUARD,
};
use crate::constellation::SoftStats;
use crate::linalg::flops::{tally_cadd, tally_cmul};
use crate::linalg::{gram, ComplexMatrix, ComplexVector, HermitianMatrix};

/// Detector state: the Hermitian inverse, the symbol estimate vector
/// and the shared soft-decision state.
pub struct RecursiveDetector {
    q: HermitianMatrix,
    t: ComplexVector,
    /// `1 - s2 Q(n,n)` per symbol, kept in cancellation-free form.
    eps: Vec<f64>,
    sigma2: f64,
    shared: IsicSharedState,
    qcol: Vec<Complex64>,
}

impl RecursiveDetector {
    /// Initialize from the unscaled channel: `Q = (H^H H + s2 I)^{-1}`
    /// and `t = Q H^H y`. The channel and receive vector are not
    /// retained.
    pub fn new(
        h: &ComplexMatrix,
        y: &ComplexVector,
        cfg: &DetectorConfig,
    ) -> Result<Self, DetectorError> {
        check_instance(h, y, cfg)?;
        let w = gram(h)?;
        let q = w.inverse(cfg.sigma2)?;
        let z = h.matvec(y.as_slice(), true)?;
        let t = q.matvec(z.as_slice())?;
        let eps = (0..cfg.n_tx)
            .map(|i| 1.0 - cfg.sigma2 * q.diag_re(i))
            .collect();
        Ok(Self {
            q,
            t,
            eps,
            sigma2: cfg.sigma2,
            shared: IsicSharedState::new(cfg.n_tx),
            qcol: vec![Complex64::new(0.0, 0.0); cfg.n_tx],
        })
    }

    pub fn q(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn t(&self) -> &ComplexVector {
        &self.t
    }

    /// Common update denominator for symbol `n` moving from `v_old`
    /// to `v_new`: `v_new + s2 w (v_old - v_new)`.
    fn denominator(&self, n: usize, v_old: f64, v_new: f64) -> f64 {
        if v_old == v_new {
            return v_new;
        }
        v_new * self.eps[n] + self.sigma2 * self.q.diag_re(n) * v_old
    }

    /// Update the symbol estimate vector after symbol `n`'s soft
    /// decision moved from `(soft_old, v_old)` to the values now in
    /// the shared state.
    ///
    /// Must run before [`update_q`](Self::update_q) for the same
    /// symbol: it reads the pre-update column and diagonal of `Q`.
    pub fn update_t(
        &mut self,
        n: usize,
        soft_old: Complex64,
        v_old: f64,
    ) -> Result<(), DetectorError> {
        let n_tx = self.t.len();
        let v_new = self.shared.variance.get(n);
        let soft_new = self.shared.soft[n];
        let eps_old = self.eps[n];
        let denom = self.denominator(n, v_old, v_new);
        if denom.abs() < DEGENERACY_GUARD {
            return Err(DetectorError::Degenerate {
                what: "estimate vector update",
                symbol: n,
                value: denom,
            });
        }
        let d_soft = soft_new - soft_old;
        tally_cadd(1);
        let t_n_old = self.t[n];

        // Entries other than n, using the pre-update column of Q.
        let gain = (d_soft + (v_new - v_old) * t_n_old) / denom;
        tally_cadd(1);
        let sqrt_v_old = v_old.sqrt();
        for i in 0..n_tx {
            if i == n {
                continue;
            }
            let scale = self.sigma2 * sqrt_v_old / self.shared.variance.get(i).sqrt();
            self.t[i] += scale * (self.q.get(i, n) * gain);
        }
        tally_cmul((n_tx - 1) as u64);
        tally_cadd((n_tx - 1) as u64);

        // Entry n itself; `s2 w - 1` is `-eps` by definition.
        self.t[n] = (v_old / denom) * t_n_old - (eps_old / denom) * d_soft;
        tally_cadd(1);
        Ok(())
    }

    /// Rank-one correction of `Q` (and of the bias complements) after
    /// symbol `n`'s variance moved from `v_old` to the value now in
    /// the shared state.
    pub fn update_q(&mut self, n: usize, v_old: f64) -> Result<(), DetectorError> {
        let v_new = self.shared.variance.get(n);
        let omega_old = self.q.diag_re(n);
        if !omega_old.is_finite() || omega_old <= 0.0 {
            return Err(DetectorError::PositiveDefinitenessLost {
                index: n,
                value: omega_old,
            });
        }
        let denom = self.denominator(n, v_old, v_new);
        if denom.abs() < DEGENERACY_GUARD {
            return Err(DetectorError::Degenerate {
                what: "inverse update",
                symbol: n,
                value: denom,
            });
        }
        let omega_new = omega_old * (v_old / denom);
        if !omega_new.is_finite() || omega_new <= 0.0 {
            return Err(DetectorError::PositiveDefinitenessLost {
                index: n,
                value: omega_new,
            });
        }

        // Pre-update column, with the diagonal slot unused.
        for i in 0..self.qcol.len() {
            self.qcol[i] = self.q.get(i, n);
        }
        // The block coefficient (w_new v_new - w_old v_old) over
        // (w_old^2 v_old) reduces to s2 (v_new - v_old) / denom.
        let coeff = self.sigma2 * (v_new - v_old) / denom;
        self.q.rank1_update_masked(coeff, &self.qcol, Some(n));

        // Bias complements follow the same rank-one diagonal motion.
        let s2_coeff = self.sigma2 * coeff;
        for i in 0..self.qcol.len() {
            if i != n {
                self.eps[i] -= s2_coeff * self.qcol[i].norm_sqr();
            }
        }
        self.eps[n] = eps_scaled(self.eps[n], v_new, denom);

        // Rescale column n and write both triangles.
        let scale = (omega_new / omega_old) * (v_new / v_old).sqrt();
        for i in 0..self.qcol.len() {
            if i == n {
                continue;
            }
            let v = self.qcol[i];
            self.q
                .set_pair(i, n, Complex64::new(v.re * scale, v.im * scale));
        }
        self.q.set_pair(n, n, Complex64::new(omega_new, 0.0));
        Ok(())
    }
}

/// `eps v_new / denom`, with the ratio formed first so that an
/// unchanged variance multiplies by exactly one.
fn eps_scaled(eps: f64, v_new: f64, denom: f64) -> f64 {
    eps * (v_new / denom)
}

impl IsicEstimator for RecursiveDetector {
    fn estimate(&mut self, n: usize) -> Result<(Complex64, f64), DetectorError> {
        let omega = self.q.diag_re(n);
        if !omega.is_finite() || omega <= 0.0 {
            return Err(DetectorError::PositiveDefinitenessLost {
                index: n,
                value: omega,
            });
        }
        let v = self.shared.variance.get(n);
        let eps = self.eps[n];
        // 1 + s2 w (v - 1) = eps + s2 w v, all terms non-negative.
        let denom = eps + self.sigma2 * omega * v;
        if denom.abs() < DEGENERACY_GUARD {
            return Err(DetectorError::Degenerate {
                what: "estimate",
                symbol: n,
                value: denom,
            });
        }
        let estimate = (v * self.t[n] + eps * self.shared.soft[n]) / denom;
        tally_cadd(1);
        let bias = eps / denom;
        Ok((estimate, bias))
    }

    fn absorb(&mut self, n: usize, stats: &SoftStats) -> Result<(), DetectorError> {
        let soft_old = self.shared.soft[n];
        let v_old = self.shared.variance.get(n);
        self.shared.soft[n] = stats.soft_decision;
        self.shared.variance.set(n, stats.residual_variance);
        self.update_t(n, soft_old, v_old)?;
        self.update_q(n, v_old)
    }

    fn shared(&self) -> &IsicSharedState {
        &self.shared
    }

    fn shared_mut(&mut self) -> &mut IsicSharedState {
        &mut self.shared
    }
}

impl HeldMatrices for RecursiveDetector {
    fn held_matrices(&self) -> Vec<MatrixFootprint> {
        vec![MatrixFootprint {
            rows: self.q.n(),
            cols: self.q.n(),
            hermitian: true,
        }]
    }
}
