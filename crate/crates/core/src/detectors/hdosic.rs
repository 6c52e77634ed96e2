//! Recursive hard-decision ordered successive interference
//! cancellation.
//!
//! Initialization grows the inverse `(H_n^H H_n + s2 I)^{-1}` one
//! column at a time through the partitioned-inverse identity; the
//! detection pass then repeatedly estimates the strongest undetected
//! layer straight from the symbol estimate vector, cancels its hard
//! decision with a column of the inverse, and deflates the inverse by
//! one order. No column of the channel is revisited after
//! initialization.

use num_complex::Complex64;

use super::{
    check_instance, Detection, DetectorConfig, DetectorError, HeldMatrices, MatrixFootprint,
};
use crate::linalg::flops::{self, tally_cadd, tally_cmul};
use crate::linalg::{dot_adjoint, ComplexMatrix, ComplexVector, HermitianMatrix, LinalgError};

/// How the next layer to detect is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionOrder {
    /// Strongest first: the undetected layer with the smallest
    /// diagonal entry of the inverse (highest post-filtering SNR).
    MaxSnr,
    /// Original index order.
    Fixed,
}

/// Grow `(H_{n-1}^H H_{n-1} + s2 I)^{-1}` by one column.
///
/// `r` is `H_{n-1}^H h_n` and `gamma` is `|h_n|^2 + s2`. A base case
/// of size zero is allowed: the result is the 1x1 inverse `[1/gamma]`.
pub fn hdosic_expand(
    q_prev: &HermitianMatrix,
    r: &[Complex64],
    gamma: f64,
) -> Result<HermitianMatrix, DetectorError> {
    let n_prev = q_prev.n();
    if r.len() != n_prev {
        return Err(DetectorError::Linalg(LinalgError::InvalidArgument(
            "expansion vector length mismatch",
        )));
    }
    let n = n_prev + 1;
    let mut out = HermitianMatrix::zeros(n);
    if n_prev == 0 {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(DetectorError::Linalg(LinalgError::NotPositiveDefinite {
                pivot_index: 0,
            }));
        }
        out.set_pair(0, 0, Complex64::new(1.0 / gamma, 0.0));
        return Ok(out);
    }

    let u = q_prev.matvec(r)?;
    let schur = gamma - dot_adjoint(r, u.as_slice()).re;
    if !schur.is_finite() || schur <= 0.0 {
        return Err(DetectorError::Linalg(LinalgError::NotPositiveDefinite {
            pivot_index: n_prev,
        }));
    }
    let omega = 1.0 / schur;

    // New column -w Q r, corner w, and block Q + w (Qr)(Qr)^H.
    for i in 0..n_prev {
        for j in i..n_prev {
            let v = q_prev.get(i, j) + omega * (u[i] * u[j].conj());
            out.set_pair(i, j, v);
        }
        out.set_pair(
            i,
            n_prev,
            Complex64::new(-omega * u[i].re, -omega * u[i].im),
        );
    }
    out.set_pair(n_prev, n_prev, Complex64::new(omega, 0.0));
    let pairs = (n_prev * (n_prev + 1) / 2) as u64;
    tally_cmul(pairs);
    tally_cadd(pairs);
    Ok(out)
}

/// Remove layer `k` from the inverse: the remaining block minus
/// `q q^H / w`, with `q` the off-diagonal part of column `k` and `w`
/// its diagonal entry.
pub fn hdosic_deflate(q: &HermitianMatrix, k: usize) -> Result<HermitianMatrix, DetectorError> {
    let n = q.n();
    if k >= n {
        return Err(DetectorError::Linalg(LinalgError::InvalidArgument(
            "deflation index out of range",
        )));
    }
    let omega = q.diag_re(k);
    if !omega.is_finite() || omega <= 0.0 {
        return Err(DetectorError::PositiveDefinitenessLost {
            index: k,
            value: omega,
        });
    }
    let inv_omega = 1.0 / omega;
    let mut out = HermitianMatrix::zeros(n - 1);
    let map = |i: usize| if i < k { i } else { i + 1 };
    for i in 0..n - 1 {
        let qi = q.get(map(i), k);
        for j in i..n - 1 {
            let v = q.get(map(i), map(j)) - inv_omega * (qi * q.get(map(j), k).conj());
            out.set_pair(i, j, v);
        }
    }
    let pairs = ((n - 1) * n / 2) as u64;
    tally_cmul(pairs);
    tally_cadd(pairs);
    Ok(out)
}

/// State of one successive-cancellation pass.
pub struct HdosicDetector {
    q: HermitianMatrix,
    t: ComplexVector,
    /// Original symbol index of each live row/column of `q`.
    active: Vec<usize>,
    sigma2: f64,
}

impl HdosicDetector {
    /// Build the full-order inverse by iterated expansion and the
    /// symbol estimate vector `t = Q H^H y`; the channel and receive
    /// vector are dropped afterwards.
    pub fn new(
        h: &ComplexMatrix,
        y: &ComplexVector,
        cfg: &DetectorConfig,
    ) -> Result<Self, DetectorError> {
        check_instance(h, y, cfg)?;
        let n = cfg.n_tx;
        let mut q = HermitianMatrix::zeros(0);
        for col in 0..n {
            let mut r = Vec::with_capacity(col);
            for prev in 0..col {
                r.push(dot_adjoint_cols(h, prev, col));
            }
            let gamma = column_norm_sqr(h, col) + cfg.sigma2;
            q = hdosic_expand(&q, &r, gamma)?;
        }
        let z = h.matvec(y.as_slice(), true)?;
        let t = q.matvec(z.as_slice())?;
        Ok(Self {
            q,
            t,
            active: (0..n).collect(),
            sigma2: cfg.sigma2,
        })
    }

    pub fn q(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn t(&self) -> &ComplexVector {
        &self.t
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    fn pick(&self, order: DetectionOrder) -> usize {
        match order {
            DetectionOrder::MaxSnr => {
                let mut best = 0usize;
                let mut best_diag = f64::INFINITY;
                for p in 0..self.active.len() {
                    let d = self.q.diag_re(p);
                    if d < best_diag {
                        best_diag = d;
                        best = p;
                    }
                }
                best
            }
            DetectionOrder::Fixed => {
                let mut best = 0usize;
                for p in 1..self.active.len() {
                    if self.active[p] < self.active[best] {
                        best = p;
                    }
                }
                best
            }
        }
    }

    /// Detect one layer: estimate, hard-decide, cancel, deflate.
    /// Returns `(original index, hard decision index)`.
    pub fn step(
        &mut self,
        order: DetectionOrder,
        c: &crate::constellation::Constellation,
    ) -> Result<(usize, usize), DetectorError> {
        let p = self.pick(order);
        let original = self.active[p];
        let omega = self.q.diag_re(p);
        if !omega.is_finite() || omega <= 0.0 {
            return Err(DetectorError::PositiveDefinitenessLost {
                index: original,
                value: omega,
            });
        }
        let estimate = self.t[p];
        let bias = 1.0 - self.sigma2 * omega;
        let hard = c.nearest_point(estimate, bias);
        let decided = c.point(hard);

        // Cancel through the inverse column, then deflate.
        let n_live = self.active.len();
        let mut t_next = ComplexVector::zeros(n_live - 1);
        let gain = (decided - estimate) / omega;
        tally_cadd(1);
        let mut out_i = 0usize;
        for i in 0..n_live {
            if i == p {
                continue;
            }
            t_next[out_i] = self.t[i] + self.q.get(i, p) * gain;
            out_i += 1;
        }
        tally_cmul((n_live - 1) as u64);
        tally_cadd((n_live - 1) as u64);
        self.t = t_next;
        self.q = hdosic_deflate(&self.q, p)?;
        self.active.remove(p);
        Ok((original, hard))
    }
}

impl HeldMatrices for HdosicDetector {
    fn held_matrices(&self) -> Vec<MatrixFootprint> {
        vec![MatrixFootprint {
            rows: self.q.n(),
            cols: self.q.n(),
            hermitian: true,
        }]
    }
}

fn dot_adjoint_cols(h: &ComplexMatrix, a: usize, b: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..h.rows() {
        acc += h.get(r, a).conj() * h.get(r, b);
    }
    tally_cmul(h.rows() as u64);
    tally_cadd(h.rows() as u64 - 1);
    acc
}

fn column_norm_sqr(h: &ComplexMatrix, col: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..h.rows() {
        acc += h.get(r, col).norm_sqr();
    }
    tally_cmul(h.rows() as u64);
    tally_cadd(h.rows() as u64 - 1);
    acc
}

/// Successive cancellation in max-SNR order.
pub fn hdosic_detect(
    h: &ComplexMatrix,
    y: &ComplexVector,
    cfg: &DetectorConfig,
) -> Result<Detection, DetectorError> {
    hdosic_detect_with_order(h, y, cfg, DetectionOrder::MaxSnr)
}

/// Successive cancellation with an explicit layer ordering rule.
pub fn hdosic_detect_with_order(
    h: &ComplexMatrix,
    y: &ComplexVector,
    cfg: &DetectorConfig,
    order: DetectionOrder,
) -> Result<Detection, DetectorError> {
    let before = flops::thread_counter();
    let mut state = HdosicDetector::new(h, y, cfg)?;
    let after_init = flops::thread_counter();
    let mut hard_indices = vec![0usize; cfg.n_tx];
    for _ in 0..cfg.n_tx {
        let (original, hard) = state.step(order, &cfg.constellation)?;
        hard_indices[original] = hard;
    }
    let after = flops::thread_counter();
    Ok(Detection {
        hard_indices,
        init_flops: after_init - before,
        iteration_flops: after - after_init,
        iterations: 1,
    })
}
