//! Square QAM constellations and the per-symbol soft-statistics
//! pipeline shared by all the soft detectors.
//!
//! Each axis carries a reflected-binary Gray code over the amplitude
//! levels in increasing order, in-phase bits before quadrature bits,
//! and points are scaled to unit average symbol energy. The soft
//! pipeline turns a filtered estimate and its bias into a posterior
//! over the alphabet, a soft decision, a residual variance and a hard
//! decision.

use num_complex::Complex64;
use thiserror::Error;

/// Clamp for the filtering bias before the Gaussian stage; keeps the
/// variance `mu (1 - mu)` strictly positive with a single code path.
pub const BIAS_CLAMP: f64 = 1e-12;

/// Floor for the residual interference-plus-noise variance.
pub const ETA2_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstellationError {
    #[error("unsupported modulation order {0}; supported orders are 4, 16 and 64")]
    UnsupportedOrder(usize),
    #[error("bit count {got} is not a multiple of {bits_per_symbol}")]
    BitCountMismatch { got: usize, bits_per_symbol: usize },
    #[error("bit values must be 0 or 1")]
    InvalidBit,
}

/// A Gray-mapped square QAM alphabet with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    /// Scale applied to the odd-integer lattice.
    energy_scale: f64,
    points: Vec<Complex64>,
    /// Bit label of each point, I bits in the high half.
    labels: Vec<u32>,
    /// Point index for each label value.
    index_of_label: Vec<usize>,
}

/// Gray code of a level index.
fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Build the 4-, 16- or 64-point alphabet.
pub fn build_constellation(order: usize) -> Result<Constellation, ConstellationError> {
    let levels = match order {
        4 => 2usize,
        16 => 4,
        64 => 8,
        _ => return Err(ConstellationError::UnsupportedOrder(order)),
    };
    let bits_per_axis = levels.trailing_zeros() as usize;
    let bits_per_symbol = 2 * bits_per_axis;
    // Mean energy of the odd-integer lattice per axis is (L^2 - 1) / 3.
    let axis_energy = (levels * levels - 1) as f64 / 3.0;
    let energy_scale = 1.0 / (2.0 * axis_energy).sqrt();

    let amplitude = |k: usize| (2.0 * k as f64 - (levels - 1) as f64) * energy_scale;
    let mut points = Vec::with_capacity(order);
    let mut labels = Vec::with_capacity(order);
    let mut index_of_label = vec![0usize; order];
    for i_level in 0..levels {
        for q_level in 0..levels {
            let idx = points.len();
            points.push(Complex64::new(amplitude(i_level), amplitude(q_level)));
            let label = (gray(i_level as u32) << bits_per_axis) | gray(q_level as u32);
            labels.push(label);
            index_of_label[label as usize] = idx;
        }
    }
    Ok(Constellation {
        order,
        bits_per_symbol,
        energy_scale,
        points,
        labels,
        index_of_label,
    })
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    /// Map bits (values 0/1, I bits first within each symbol) to
    /// symbols.
    pub fn symbols_from_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>, ConstellationError> {
        if bits.len() % self.bits_per_symbol != 0 {
            return Err(ConstellationError::BitCountMismatch {
                got: bits.len(),
                bits_per_symbol: self.bits_per_symbol,
            });
        }
        let mut out = Vec::with_capacity(bits.len() / self.bits_per_symbol);
        for chunk in bits.chunks(self.bits_per_symbol) {
            let mut label = 0u32;
            for &b in chunk {
                if b > 1 {
                    return Err(ConstellationError::InvalidBit);
                }
                label = (label << 1) | b as u32;
            }
            out.push(self.points[self.index_of_label[label as usize]]);
        }
        Ok(out)
    }

    /// Recover bits from hard-decision point indices.
    pub fn bits_from_hard_indices(&self, indices: &[usize]) -> Vec<u8> {
        let mut out = Vec::with_capacity(indices.len() * self.bits_per_symbol);
        for &idx in indices {
            let label = self.labels[idx];
            for shift in (0..self.bits_per_symbol).rev() {
                out.push(((label >> shift) & 1) as u8);
            }
        }
        out
    }

    /// Index of the point minimizing `|x_hat - mu x|`.
    ///
    /// Equals the argmax of the soft posterior; ties resolve to the
    /// lowest index.
    pub fn nearest_point(&self, x_hat: Complex64, mu: f64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (x_hat - mu * p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Posterior statistics of one transmit symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftStats {
    /// Posterior probability of each alphabet point.
    pub posterior: Vec<f64>,
    /// Posterior mean.
    pub soft_decision: Complex64,
    /// Posterior variance.
    pub residual_variance: f64,
    /// Argmax of the posterior (lowest index on ties).
    pub hard_index: usize,
}

impl SoftStats {
    /// Statistics of a hard decision: a one-hot posterior on `index`
    /// with zero residual variance.
    pub fn hard(index: usize, c: &Constellation) -> Self {
        let mut posterior = vec![0.0; c.order()];
        posterior[index] = 1.0;
        SoftStats {
            posterior,
            soft_decision: c.point(index),
            residual_variance: 0.0,
            hard_index: index,
        }
    }
}

/// Posterior, soft decision, residual variance and hard decision from
/// a filtered estimate `x_hat` with bias `mu`.
///
/// The Gaussian weights are exponentiated after subtracting the
/// largest exponent, so the result is finite for any finite input.
pub fn soft_statistics(x_hat: Complex64, mu: f64, c: &Constellation) -> SoftStats {
    let mu = mu.clamp(BIAS_CLAMP, 1.0 - BIAS_CLAMP);
    let eta2 = (mu * (1.0 - mu)).max(ETA2_FLOOR);
    let inv_eta2 = 1.0 / eta2;
    let mut exponents = Vec::with_capacity(c.order());
    let mut max_e = f64::NEG_INFINITY;
    for p in c.points() {
        let e = -(x_hat - mu * p).norm_sqr() * inv_eta2;
        if e > max_e {
            max_e = e;
        }
        exponents.push(e);
    }
    let weights: Vec<f64> = exponents.iter().map(|e| (e - max_e).exp()).collect();
    stats_from_weights(&weights, c)
}

/// Normalize non-negative likelihood weights into soft statistics.
///
/// Scaling all weights by a common positive constant leaves the result
/// unchanged; for exact powers of two the outputs are bit-identical.
pub fn stats_from_weights(weights: &[f64], c: &Constellation) -> SoftStats {
    debug_assert_eq!(weights.len(), c.order());
    let sum: f64 = weights.iter().sum();
    let inv_sum = 1.0 / sum;
    let posterior: Vec<f64> = weights.iter().map(|w| w * inv_sum).collect();

    let mut soft = Complex64::new(0.0, 0.0);
    let mut hard_index = 0usize;
    let mut best_p = f64::NEG_INFINITY;
    for (i, (&p, point)) in posterior.iter().zip(c.points()).enumerate() {
        soft += p * point;
        if p > best_p {
            best_p = p;
            hard_index = i;
        }
    }
    let mut variance = 0.0;
    for (&p, point) in posterior.iter().zip(c.points()) {
        variance += p * (point - soft).norm_sqr();
    }
    SoftStats {
        posterior,
        soft_decision: soft,
        residual_variance: variance,
        hard_index,
    }
}
