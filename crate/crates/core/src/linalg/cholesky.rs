//! Cholesky factorization and inversion for small Hermitian matrices.
//!
//! Inputs are Gram matrices plus a noise ridge, so they are positive
//! definite by construction; a non-positive pivot signals a genuinely
//! degenerate configuration and is reported as an error rather than
//! patched over.

use num_complex::Complex64;

use super::flops::{tally_cadd, tally_cmul};
use super::{HermitianMatrix, LinalgError};

/// `(A + ridge I)^{-1}` via `L L^H` factorization, triangular
/// inversion and the product `L^{-H} L^{-1}`.
pub fn hermitian_inverse(
    a: &HermitianMatrix,
    ridge: f64,
) -> Result<HermitianMatrix, LinalgError> {
    let n = a.n();
    if n == 0 {
        return Err(LinalgError::InvalidArgument("inverse of an empty matrix"));
    }
    let mut cmul = 0u64;
    let mut cadd = 0u64;

    // Lower-triangular factor of A + ridge I, row-major.
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = a.diag_re(j) + ridge;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        cmul += j as u64;
        cadd += j as u64;
        if !d.is_finite() || d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot_index: j });
        }
        let piv = d.sqrt();
        l[j * n + j] = Complex64::new(piv, 0.0);
        let inv_piv = 1.0 / piv;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            cmul += j as u64;
            cadd += j as u64;
            l[i * n + j] = Complex64::new(s.re * inv_piv, s.im * inv_piv);
        }
    }

    // T = L^{-1}, also lower triangular.
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let inv_pivot = 1.0 / l[j * n + j].re;
        t[j * n + j] = Complex64::new(inv_pivot, 0.0);
        for i in (j + 1)..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..i {
                s += l[i * n + k] * t[k * n + j];
            }
            cmul += (i - j) as u64;
            cadd += (i - j) as u64;
            let scale = -1.0 / l[i * n + i].re;
            t[i * n + j] = Complex64::new(s.re * scale, s.im * scale);
        }
    }

    // Q = T^H T, assembled on the upper triangle and mirrored.
    let mut q = HermitianMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..n {
                s += t[k * n + i].conj() * t[k * n + j];
            }
            cmul += (n - j) as u64;
            cadd += (n - j) as u64;
            q.set_pair(i, j, s);
        }
    }

    tally_cmul(cmul);
    tally_cadd(cadd);
    Ok(q)
}
