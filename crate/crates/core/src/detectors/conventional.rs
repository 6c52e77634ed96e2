//! Conventional LMMSE iterative soft interference cancellation.
//!
//! Each procedure rebuilds the receive-side covariance from scratch:
//! cancel every other symbol's soft decision, invert
//! `H V' H^H + s2 I` with the target's variance forced to one, filter,
//! and read off the estimate and bias. This costs an `M x M` inversion
//! per procedure, which is exactly why the fast schemes exist; it
//! stays here as the reference every other scheme is tested against.

use num_complex::Complex64;

use super::{
    check_instance, DetectorConfig, DetectorError, HeldMatrices, IsicEstimator, IsicSharedState,
    MatrixFootprint,
};
use crate::constellation::SoftStats;
use crate::linalg::flops::{tally_cadd, tally_cmul};
use crate::linalg::{dot_adjoint, ComplexMatrix, ComplexVector, HermitianMatrix};

/// One procedure of the conventional detector: the estimate and bias
/// of symbol `n` given the current soft decisions and variances.
///
/// The target symbol is masked out of the cancellation (soft decision
/// treated as zero) and out of the variance matrix (variance treated
/// as one), so the shared state itself is left untouched.
pub fn conv_procedure(
    h: &ComplexMatrix,
    y: &ComplexVector,
    shared: &IsicSharedState,
    n: usize,
    sigma2: f64,
) -> Result<(Complex64, f64), DetectorError> {
    let m = h.rows();
    let n_tx = h.cols();

    // Soft-interference-cancelled receive vector with x_bar[n] -> 0.
    let mut cancelled = ComplexVector::zeros(m);
    for r in 0..m {
        let mut acc = y[r];
        for k in 0..n_tx {
            if k == n {
                continue;
            }
            acc -= h.get(r, k) * shared.soft[k];
        }
        cancelled[r] = acc;
    }
    tally_cmul((m * (n_tx - 1)) as u64);
    tally_cadd((m * (n_tx - 1)) as u64);

    // Receive covariance H V' H^H with v[n] -> 1, upper triangle.
    let mut cov = HermitianMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n_tx {
                let v = if k == n { 1.0 } else { shared.variance.get(k) };
                acc += v * (h.get(i, k) * h.get(j, k).conj());
            }
            cov.set_pair(i, j, acc);
        }
    }
    let pairs = (m * (m + 1) / 2 * n_tx) as u64;
    tally_cmul(pairs);
    tally_cadd(pairs);

    let d = cov.inverse(sigma2)?;
    let filter = d.matvec(&h.col(n))?;
    let estimate = dot_adjoint(filter.as_slice(), cancelled.as_slice());
    let bias = dot_adjoint(filter.as_slice(), &h.col(n)).re;
    Ok((estimate, bias))
}

/// Driver state for the conventional detector.
pub struct ConventionalDetector<'a> {
    h: &'a ComplexMatrix,
    y: &'a ComplexVector,
    sigma2: f64,
    shared: IsicSharedState,
}

impl<'a> ConventionalDetector<'a> {
    pub fn new(
        h: &'a ComplexMatrix,
        y: &'a ComplexVector,
        cfg: &DetectorConfig,
    ) -> Result<Self, DetectorError> {
        check_instance(h, y, cfg)?;
        Ok(Self {
            h,
            y,
            sigma2: cfg.sigma2,
            shared: IsicSharedState::new(cfg.n_tx),
        })
    }
}

impl IsicEstimator for ConventionalDetector<'_> {
    fn estimate(&mut self, n: usize) -> Result<(Complex64, f64), DetectorError> {
        conv_procedure(self.h, self.y, &self.shared, n, self.sigma2)
    }

    fn absorb(&mut self, n: usize, stats: &SoftStats) -> Result<(), DetectorError> {
        self.shared.soft[n] = stats.soft_decision;
        self.shared.variance.set(n, stats.residual_variance);
        Ok(())
    }

    fn shared(&self) -> &IsicSharedState {
        &self.shared
    }

    fn shared_mut(&mut self) -> &mut IsicSharedState {
        &mut self.shared
    }
}

impl HeldMatrices for ConventionalDetector<'_> {
    fn held_matrices(&self) -> Vec<MatrixFootprint> {
        vec![
            // The channel, plus the per-procedure covariance inverse.
            MatrixFootprint {
                rows: self.h.rows(),
                cols: self.h.cols(),
                hermitian: false,
            },
            MatrixFootprint {
                rows: self.h.rows(),
                cols: self.h.rows(),
                hermitian: true,
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::build_constellation;
    use crate::detectors::{conv_detect, run_isic};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_stream_closed_form() {
        // With one stream the filter is h / (|h|^2 + s2).
        let h = ComplexMatrix::from_rows(3, 1, vec![c(1.0, 0.5), c(-0.25, 1.0), c(0.0, -2.0)])
            .unwrap();
        let y = ComplexVector::from_vec(vec![c(0.3, -0.1), c(1.0, 0.2), c(-0.4, 0.9)]);
        let sigma2 = 0.37;
        let shared = IsicSharedState::new(1);
        let (estimate, bias) = conv_procedure(&h, &y, &shared, 0, sigma2).unwrap();

        let norm2: f64 = h.col(0).iter().map(|v| v.norm_sqr()).sum();
        let denom = norm2 + sigma2;
        let mut hy = c(0.0, 0.0);
        for (a, b) in h.col(0).iter().zip(y.iter()) {
            hy += a.conj() * b;
        }
        assert!((estimate - hy / denom).norm() < 1e-12);
        assert!((bias - norm2 / denom).abs() < 1e-12);
    }

    #[test]
    fn first_iteration_uses_identity_variances() {
        // With x_bar = 0 and V = I, the cancelled vector is y itself
        // and the covariance is H H^H + s2 I regardless of n.
        let h = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 0.0), c(0.2, -0.3), c(-0.5, 0.1), c(0.8, 0.4)],
        )
        .unwrap();
        let y = ComplexVector::from_vec(vec![c(0.6, -0.2), c(-0.1, 0.9)]);
        let shared = IsicSharedState::new(2);
        let sigma2 = 0.2;

        // Oracle: dense 2x2 inverse of H H^H + s2 I by hand.
        let mut b = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    b[i][j] += h.get(i, k) * h.get(j, k).conj();
                }
                if i == j {
                    b[i][j] += c(sigma2, 0.0);
                }
            }
        }
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let inv = [
            [b[1][1] / det, -b[0][1] / det],
            [-b[1][0] / det, b[0][0] / det],
        ];
        for n in 0..2 {
            let hn = h.col(n);
            let f = [
                inv[0][0] * hn[0] + inv[0][1] * hn[1],
                inv[1][0] * hn[0] + inv[1][1] * hn[1],
            ];
            let want_estimate = f[0].conj() * y[0] + f[1].conj() * y[1];
            let want_bias = (f[0].conj() * hn[0] + f[1].conj() * hn[1]).re;
            let (estimate, bias) = conv_procedure(&h, &y, &shared, n, sigma2).unwrap();
            assert!((estimate - want_estimate).norm() < 1e-12);
            assert!((bias - want_bias).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_recovery() {
        // Well-conditioned square channel, negligible noise: one
        // iteration recovers the transmitted symbols exactly.
        let cst = build_constellation(4).unwrap();
        let h = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 0.0), c(0.1, 0.05), c(-0.08, 0.02), c(0.9, -0.1)],
        )
        .unwrap();
        let tx = [cst.point(1), cst.point(2)];
        let y = h.matvec(&tx, false).unwrap();
        let cfg = DetectorConfig::new(2, 2, 1, cst, 1e-12).unwrap();
        let det = conv_detect(&h, &y, &cfg).unwrap();
        assert_eq!(det.hard_indices, vec![1, 2]);
    }

    #[test]
    fn bias_stays_in_unit_interval() {
        let cst = build_constellation(16).unwrap();
        let h = ComplexMatrix::from_rows(
            3,
            2,
            vec![
                c(0.9, 0.1),
                c(-0.4, 0.7),
                c(0.2, -0.6),
                c(1.1, 0.0),
                c(-0.3, -0.2),
                c(0.5, 0.8),
            ],
        )
        .unwrap();
        let y = ComplexVector::from_vec(vec![c(0.4, 1.0), c(-0.7, 0.1), c(0.2, -0.5)]);
        let cfg = DetectorConfig::new(2, 3, 3, cst, 0.5).unwrap();
        let mut state = ConventionalDetector::new(&h, &y, &cfg).unwrap();
        let mut biases = Vec::new();
        run_isic(
            &mut state,
            &cfg,
            Some(&mut |r: crate::detectors::ProcedureRecord| biases.push(r.bias)),
        )
        .unwrap();
        assert_eq!(biases.len(), 6);
        for b in biases {
            assert!((-1e-12..=1.0 + 1e-12).contains(&b));
        }
    }
}
