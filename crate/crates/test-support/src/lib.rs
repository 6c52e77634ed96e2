//! Extended-precision reference arithmetic for test oracles.
//!
//! Double-double numbers carry roughly 32 significant decimal digits,
//! enough headroom to certify 1e-12 agreement of double-precision
//! pipelines. The soft-statistics reference here evaluates the
//! Gaussian posterior pipeline directly, with no shared code (and no
//! shared numerical strategy) with the production implementation.

pub mod dd;
pub mod softstats;

pub use dd::Dd;
pub use softstats::soft_statistics_reference;
