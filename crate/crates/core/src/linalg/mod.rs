//! Minimal dense complex linear algebra with instrumented arithmetic.
//!
//! Storage is row-major `Vec<Complex64>`. Hermitian matrices keep both
//! triangles; every mutation writes mirrored conjugate pairs, so the
//! Hermitian property holds exactly (not just to rounding). All
//! operations report their complex multiply/add counts to [`flops`].
//!
//! Sizes here are small (a few hundred at most), so there is no
//! blocking, no pivoting and no attempt to compete with BLAS.

pub mod flops;

mod cholesky;

use num_complex::Complex64;
use thiserror::Error;

use flops::{tally_cadd, tally_cmul};

/// Lower bound applied to residual interference variances.
///
/// Saturated soft decisions drive variances to zero; the floor keeps
/// the scaled channel and every update denominator finite.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Errors from linear algebra operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    /// Arguments have inconsistent or empty dimensions.
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    /// A Cholesky pivot was not positive; the matrix is not positive
    /// definite.
    #[error("matrix is not positive definite (pivot {pivot_index})")]
    NotPositiveDefinite { pivot_index: usize },
}

/// A fixed-length complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_vec(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.data.iter()
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.data[i]
    }
}

/// `a^H b`.
pub fn dot_adjoint(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    let n = a.len() as u64;
    tally_cmul(n);
    tally_cadd(n.saturating_sub(1));
    acc
}

/// `x^H` times column `col` of `a`, without materializing the column.
pub fn dot_adjoint_col(x: &[Complex64], a: &ComplexMatrix, col: usize) -> Complex64 {
    debug_assert_eq!(x.len(), a.rows());
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, xr) in x.iter().enumerate() {
        acc += xr.conj() * a.get(r, col);
    }
    let n = x.len() as u64;
    tally_cmul(n);
    tally_cadd(n.saturating_sub(1));
    acc
}

/// `out = a - b` entry-wise.
pub fn sub_into(a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), out.len());
    for ((x, y), o) in a.iter().zip(b.iter()).zip(out.iter_mut()) {
        *o = x - y;
    }
    tally_cadd(a.len() as u64);
}

/// A dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Build from row-major data.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidArgument(
                "data length does not match dimensions",
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    /// Row `r` as a slice.
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Column `c`, copied out.
    pub fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `A x` (or `A^H x` with `adjoint`), counting one complex multiply
    /// per stored entry.
    pub fn matvec(&self, x: &[Complex64], adjoint: bool) -> Result<ComplexVector, LinalgError> {
        let (need, out_len) = if adjoint {
            (self.rows, self.cols)
        } else {
            (self.cols, self.rows)
        };
        if x.len() != need {
            return Err(LinalgError::InvalidArgument("matvec dimension mismatch"));
        }
        let mut out = ComplexVector::zeros(out_len);
        self.matvec_into(x, adjoint, out.as_mut_slice())?;
        Ok(out)
    }

    /// As [`matvec`](Self::matvec), writing into a caller buffer.
    pub fn matvec_into(
        &self,
        x: &[Complex64],
        adjoint: bool,
        out: &mut [Complex64],
    ) -> Result<(), LinalgError> {
        if adjoint {
            if x.len() != self.rows || out.len() != self.cols {
                return Err(LinalgError::InvalidArgument("matvec dimension mismatch"));
            }
            out.fill(Complex64::new(0.0, 0.0));
            for r in 0..self.rows {
                let xr = x[r];
                let row = self.row(r);
                for (c, a) in row.iter().enumerate() {
                    out[c] += a.conj() * xr;
                }
            }
        } else {
            if x.len() != self.cols || out.len() != self.rows {
                return Err(LinalgError::InvalidArgument("matvec dimension mismatch"));
            }
            for (r, o) in out.iter_mut().enumerate() {
                let row = self.row(r);
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(x.iter()) {
                    acc += a * b;
                }
                *o = acc;
            }
        }
        let n = (self.rows * self.cols) as u64;
        let out_len = if adjoint { self.cols } else { self.rows } as u64;
        tally_cmul(n);
        tally_cadd(n - out_len);
        Ok(())
    }

    /// `A -= u * row^T` (outer product of a column vector and a row).
    pub fn sub_outer(&mut self, u: &[Complex64], row: &[Complex64]) -> Result<(), LinalgError> {
        if u.len() != self.rows || row.len() != self.cols {
            return Err(LinalgError::InvalidArgument("outer product dimension mismatch"));
        }
        for r in 0..self.rows {
            let ur = u[r];
            let dst = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (d, g) in dst.iter_mut().zip(row.iter()) {
                *d -= ur * g;
            }
        }
        let n = (self.rows * self.cols) as u64;
        tally_cmul(n);
        tally_cadd(n);
        Ok(())
    }

    /// Scale column `c` by a real factor (not tallied: real arithmetic).
    pub fn scale_col(&mut self, c: usize, s: f64) {
        for r in 0..self.rows {
            let v = self.get(r, c);
            self.set(r, c, Complex64::new(v.re * s, v.im * s));
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A Hermitian matrix with full `n x n` storage.
///
/// Both triangles are written on every mutation, so
/// `a(i,j) == conj(a(j,i))` holds bit-exactly and the diagonal stays
/// real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Real part of a diagonal entry (the imaginary part is zero by
    /// construction).
    #[inline]
    pub fn diag_re(&self, i: usize) -> f64 {
        self.data[i * self.n + i].re
    }

    /// Write entry `(i, j)` and its mirrored conjugate.
    pub fn set_pair(&mut self, i: usize, j: usize, v: Complex64) {
        if i == j {
            self.data[i * self.n + i] = Complex64::new(v.re, 0.0);
        } else {
            self.data[i * self.n + j] = v;
            self.data[j * self.n + i] = v.conj();
        }
    }

    /// Column `j`, copied out.
    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// `A + c q q^H` in place, computed on the upper triangle and
    /// mirrored, so the Hermitian invariant is preserved exactly.
    pub fn rank1_update(&mut self, c: f64, q: &[Complex64]) -> Result<(), LinalgError> {
        if q.len() != self.n {
            return Err(LinalgError::InvalidArgument("rank-1 update length mismatch"));
        }
        self.rank1_update_masked(c, q, None);
        Ok(())
    }

    /// Rank-1 update restricted to indices other than `skip`.
    ///
    /// `q` is full length; entry `skip` is ignored. With
    /// `skip == None` this is the plain rank-1 update.
    pub fn rank1_update_masked(&mut self, c: f64, q: &[Complex64], skip: Option<usize>) {
        debug_assert_eq!(q.len(), self.n);
        let n = self.n;
        let mut touched = 0u64;
        for i in 0..n {
            if Some(i) == skip {
                continue;
            }
            // w = c * q_i, real scaling.
            let w = Complex64::new(c * q[i].re, c * q[i].im);
            for j in i..n {
                if Some(j) == skip {
                    continue;
                }
                let delta = w * q[j].conj();
                let v = self.data[i * n + j] + delta;
                if i == j {
                    self.data[i * n + i] = Complex64::new(v.re, 0.0);
                } else {
                    self.data[i * n + j] = v;
                    self.data[j * n + i] = v.conj();
                }
                touched += 1;
            }
        }
        tally_cmul(touched);
        tally_cadd(touched);
        debug_assert!(self.verify_hermitian());
    }

    /// `A x`, using both stored triangles.
    pub fn matvec(&self, x: &[Complex64]) -> Result<ComplexVector, LinalgError> {
        if x.len() != self.n {
            return Err(LinalgError::InvalidArgument("matvec dimension mismatch"));
        }
        let mut out = ComplexVector::zeros(self.n);
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            out[i] = acc;
        }
        let n = (self.n * self.n) as u64;
        tally_cmul(n);
        tally_cadd(n - self.n as u64);
        Ok(out)
    }

    /// `(A + ridge I)^{-1}` by Cholesky factorization.
    pub fn inverse(&self, ridge: f64) -> Result<HermitianMatrix, LinalgError> {
        cholesky::hermitian_inverse(self, ridge)
    }

    /// Copy into a general matrix.
    pub fn to_general(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    /// Exact check of the Hermitian storage invariant.
    pub fn verify_hermitian(&self) -> bool {
        for i in 0..self.n {
            if self.data[i * self.n + i].im != 0.0 {
                return false;
            }
            for j in (i + 1)..self.n {
                let a = self.data[i * self.n + j];
                let b = self.data[j * self.n + i];
                if a.re != b.re || a.im != -b.im {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// The diagonal of the residual interference variance matrix, clamped
/// to `[VARIANCE_FLOOR, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalVariance {
    v: Vec<f64>,
}

impl DiagonalVariance {
    /// All entries one (the state before any soft decision exists).
    pub fn ones(n: usize) -> Self {
        Self { v: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.v[i]
    }

    /// Store a variance, clamped into `[VARIANCE_FLOOR, 1]`.
    pub fn set(&mut self, i: usize, value: f64) {
        self.v[i] = value.clamp(VARIANCE_FLOOR, 1.0);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }
}

/// `H^H H`, computed on the upper triangle and mirror-conjugated.
pub fn gram(h: &ComplexMatrix) -> Result<HermitianMatrix, LinalgError> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(LinalgError::InvalidArgument("gram of an empty matrix"));
    }
    let (m, n) = (h.rows(), h.cols());
    let mut out = HermitianMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                acc += h.get(k, i).conj() * h.get(k, j);
            }
            out.set_pair(i, j, acc);
        }
    }
    let pairs = (n * (n + 1) / 2) as u64;
    tally_cmul(pairs * m as u64);
    tally_cadd(pairs * (m as u64 - 1));
    Ok(out)
}

/// `(A + ridge I)^{-1}` for Hermitian positive definite input.
pub fn hermitian_inverse(a: &HermitianMatrix, ridge: f64) -> Result<HermitianMatrix, LinalgError> {
    cholesky::hermitian_inverse(a, ridge)
}
