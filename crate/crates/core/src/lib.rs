//! MIMO detection by LMMSE iterative soft interference cancellation.
//!
//! Four detectors share one soft-statistics pipeline:
//!
//! * `conventional` — per-symbol filtering through a fresh receive-side
//!   covariance inverse; the reference the fast schemes are checked
//!   against.
//! * `ammse` — the affine-MMSE scheme that maintains the inverse
//!   `(H^H H V + s2 I)^{-1}` through rank-one corrections.
//! * `recursive` — maintains the Hermitian inverse of the
//!   variance-scaled Gram matrix and a symbol estimate vector, so each
//!   procedure touches only the inverse itself.
//! * `hdosic` — hard-decision ordered successive interference
//!   cancellation on the same recursive inverse machinery.
//!
//! The `linalg` layer tallies complex multiplies and adds, and `sim`
//! turns those tallies plus Monte-Carlo trials into BER records.

pub mod constellation;
pub mod detectors;
pub mod linalg;
pub mod sim;

pub use num_complex::Complex64;
