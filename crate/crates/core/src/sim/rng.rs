//! Deterministic per-trial random streams.
//!
//! Every trial owns a ChaCha stream whose seed is derived from the
//! master seed and the trial index by a splitmix-style hash, so
//! results do not depend on how trials are scheduled across worker
//! threads. Gaussian samples come from the Box-Muller transform on
//! explicitly converted 53-bit uniforms, keeping the byte stream the
//! only source of platform variation (there is none).

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent stream for trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ trial.wrapping_mul(0xd1342543de82ef95);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Uniform in [0, 1) with 53 random bits.
#[inline]
pub fn next_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Circularly symmetric complex Gaussian with unit variance
/// (`E|z|^2 = 1`), via Box-Muller.
pub fn standard_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    // u1 in (0, 1] so the logarithm is finite.
    let u1 = 1.0 - next_f64(rng);
    let u2 = next_f64(rng);
    let radius = (-u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

/// One uniformly random bit.
#[inline]
pub fn next_bit(rng: &mut ChaCha8Rng) -> u8 {
    (rng.next_u64() >> 63) as u8
}
