//! Channel and noise generation for Monte-Carlo trials.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::rng::{next_bit, standard_complex};
use crate::constellation::Constellation;
use crate::linalg::{ComplexMatrix, ComplexVector};

/// i.i.d. circularly symmetric unit-variance channel matrix.
pub fn gen_channel(m: usize, n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..m * n).map(|_| standard_complex(rng)).collect();
    ComplexMatrix::from_rows(m, n, data).expect("dimensions match generated data")
}

/// i.i.d. circular Gaussian noise with per-entry variance `sigma2`.
pub fn gen_noise(m: usize, sigma2: f64, rng: &mut ChaCha8Rng) -> ComplexVector {
    let s = sigma2.sqrt();
    ComplexVector::from_vec((0..m).map(|_| s * standard_complex(rng)).collect())
}

/// Noise variance for a receive-antenna SNR in dB.
///
/// With unit-energy symbols and unit-variance channel entries, the
/// per-receive-antenna signal power over `n` streams is `n`, so
/// `sigma2 = n / 10^(snr/10)`. Every output header states this
/// convention.
pub fn snr_to_sigma2(snr_db: f64, n: usize) -> f64 {
    n as f64 / 10f64.powf(snr_db / 10.0)
}

/// One generated transmission: channel, payload and receive vector.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub h: ComplexMatrix,
    pub bits_true: Vec<u8>,
    pub x_true: ComplexVector,
    pub noise: ComplexVector,
    pub y: ComplexVector,
    pub sigma2: f64,
}

impl ChannelInstance {
    /// Draw a channel, random payload bits and noise, and form
    /// `y = H x + noise`.
    pub fn generate(
        m: usize,
        n: usize,
        c: &Constellation,
        sigma2: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let h = gen_channel(m, n, rng);
        let bits_true: Vec<u8> = (0..n * c.bits_per_symbol()).map(|_| next_bit(rng)).collect();
        let x_true = ComplexVector::from_vec(
            c.symbols_from_bits(&bits_true)
                .expect("bit count is a multiple of bits per symbol"),
        );
        let noise = gen_noise(m, sigma2, rng);
        let hx = h
            .matvec(x_true.as_slice(), false)
            .expect("generated dimensions are consistent");
        let mut y = ComplexVector::zeros(m);
        for i in 0..m {
            y[i] = hx[i] + noise[i];
        }
        Self {
            h,
            bits_true,
            x_true,
            noise,
            y,
            sigma2,
        }
    }
}
