//! Direct extended-precision evaluation of the Gaussian
//! soft-statistics pipeline.
//!
//! Given an estimate, a bias and the alphabet, compute the posterior,
//! its mean and its variance straight from the defining formulas in
//! double-double arithmetic. Posterior entries are formed as
//! `P_i = 1 / sum_j exp(e_j - e_i)`, which is the plain normalized
//! Gaussian weight with numerator and denominator divided by the
//! (positive) weight of point `i`; this keeps every entry accurate in
//! a relative sense without adopting the production code's
//! shifted-exponent strategy.

use num_complex::Complex64;

use crate::dd::Dd;

/// Reference posterior, posterior mean and posterior variance.
///
/// `bias_clamp` and `eta2_floor` must match the implementation under
/// test, since they are part of the function being specified.
pub fn soft_statistics_reference(
    x_hat: Complex64,
    mu: f64,
    points: &[Complex64],
    bias_clamp: f64,
    eta2_floor: f64,
) -> (Vec<f64>, Complex64, f64) {
    let mu = Dd::from_f64(mu.clamp(bias_clamp, 1.0 - bias_clamp));
    let eta2 = (mu * (Dd::ONE - mu)).max(Dd::from_f64(eta2_floor));

    // Exponents e_i = -|x_hat - mu x_i|^2 / eta2.
    let xr = Dd::from_f64(x_hat.re);
    let xi = Dd::from_f64(x_hat.im);
    let exponents: Vec<Dd> = points
        .iter()
        .map(|p| {
            let dr = xr - mu * Dd::from_f64(p.re);
            let di = xi - mu * Dd::from_f64(p.im);
            -((dr.sqr() + di.sqr()) / eta2)
        })
        .collect();

    // P_i = 1 / sum_j exp(e_j - e_i).
    let posterior: Vec<Dd> = (0..points.len())
        .map(|i| {
            let mut denom = Dd::ZERO;
            for e in &exponents {
                denom = denom + (*e - exponents[i]).exp();
            }
            denom.recip()
        })
        .collect();

    let mut mean_re = Dd::ZERO;
    let mut mean_im = Dd::ZERO;
    for (p, point) in posterior.iter().zip(points) {
        mean_re = mean_re + *p * Dd::from_f64(point.re);
        mean_im = mean_im + *p * Dd::from_f64(point.im);
    }

    let mut variance = Dd::ZERO;
    for (p, point) in posterior.iter().zip(points) {
        let dr = Dd::from_f64(point.re) - mean_re;
        let di = Dd::from_f64(point.im) - mean_im;
        variance = variance + *p * (dr.sqr() + di.sqr());
    }

    (
        posterior.iter().map(|p| p.to_f64()).collect(),
        Complex64::new(mean_re.to_f64(), mean_im.to_f64()),
        variance.to_f64(),
    )
}
