//! Soft-statistics pipeline against an independent extended-precision
//! direct evaluation, plus distribution-free invariants.

use isic_core::constellation::{
    build_constellation, soft_statistics, stats_from_weights, Constellation, BIAS_CLAMP,
    ETA2_FLOOR,
};
use isic_core::Complex64;
use isic_test_support::soft_statistics_reference;
use proptest::prelude::*;

struct Lcg(u64);

impl Lcg {
    fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / (1u64 << 53) as f64
    }
}

/// Random pairs covering the regimes a detector actually produces:
/// estimates around the unit-energy alphabet and biases across (0, 1).
fn random_pair(rng: &mut Lcg) -> (Complex64, f64) {
    let radius = 2.2 * rng.next_f64();
    let angle = 2.0 * std::f64::consts::PI * rng.next_f64();
    let x_hat = Complex64::new(radius * angle.cos(), radius * angle.sin());
    let mu = 0.02 + 0.96 * rng.next_f64();
    (x_hat, mu)
}

fn check_against_reference(c: &Constellation, pairs: usize, seed: u64) {
    let mut rng = Lcg(seed);
    for trial in 0..pairs {
        let (x_hat, mu) = random_pair(&mut rng);
        let got = soft_statistics(x_hat, mu, c);
        let (p_ref, mean_ref, var_ref) =
            soft_statistics_reference(x_hat, mu, c.points(), BIAS_CLAMP, ETA2_FLOOR);

        for (i, (&p, &pr)) in got.posterior.iter().zip(p_ref.iter()).enumerate() {
            if pr > 1e-280 {
                assert!(
                    (p - pr).abs() / pr < 1e-12,
                    "trial {trial}: posterior[{i}] {p} vs reference {pr}"
                );
            } else {
                // Below this the reference itself underflows; both
                // sides must agree that the mass is negligible.
                assert!(p < 1e-270);
            }
        }
        // The mean can cancel to zero legitimately, so its comparison
        // carries a small absolute floor well above double rounding.
        let mean_err = (got.soft_decision - mean_ref).norm();
        assert!(
            mean_err <= 1e-12 * mean_ref.norm().max(1e-2),
            "trial {trial}: mean error {mean_err} at reference {mean_ref}"
        );
        if var_ref > 1e-280 {
            assert!(
                (got.residual_variance - var_ref).abs() / var_ref < 1e-12,
                "trial {trial}: variance {} vs reference {var_ref}",
                got.residual_variance
            );
        } else {
            assert!(got.residual_variance < 1e-270);
        }
    }
}

#[test]
fn matches_reference_on_4qam() {
    check_against_reference(&build_constellation(4).unwrap(), 1000, 101);
}

#[test]
fn matches_reference_on_16qam() {
    check_against_reference(&build_constellation(16).unwrap(), 1000, 202);
}

#[test]
fn matches_reference_on_64qam() {
    check_against_reference(&build_constellation(64).unwrap(), 1000, 303);
}

#[test]
fn fixed_point_example_against_reference() {
    // One representative interior point, checked tightly on all
    // outputs at once.
    let c = build_constellation(4).unwrap();
    let x_hat = Complex64::new(0.3, 0.1);
    let mu = 0.8;
    let got = soft_statistics(x_hat, mu, &c);
    let (p_ref, mean_ref, var_ref) =
        soft_statistics_reference(x_hat, mu, c.points(), BIAS_CLAMP, ETA2_FLOOR);
    for (p, pr) in got.posterior.iter().zip(p_ref.iter()) {
        assert!((p - pr).abs() / pr < 1e-13);
    }
    assert!((got.soft_decision - mean_ref).norm() < 1e-13 * mean_ref.norm());
    assert!((got.residual_variance - var_ref).abs() < 1e-13 * var_ref);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn posterior_is_normalized_for_any_finite_input(
        re in -50.0f64..50.0,
        im in -50.0f64..50.0,
        mu in -0.5f64..1.5,
        order in prop::sample::select(vec![4usize, 16, 64]),
    ) {
        let c = build_constellation(order).unwrap();
        let s = soft_statistics(Complex64::new(re, im), mu, &c);
        let total: f64 = s.posterior.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(s.posterior.iter().all(|p| *p >= 0.0 && p.is_finite()));
    }

    #[test]
    fn hard_decision_is_the_nearest_scaled_point(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        mu in 0.01f64..0.99,
        order in prop::sample::select(vec![4usize, 16, 64]),
    ) {
        let c = build_constellation(order).unwrap();
        let x_hat = Complex64::new(re, im);
        let s = soft_statistics(x_hat, mu, &c);
        prop_assert_eq!(s.hard_index, c.nearest_point(x_hat, mu));
    }

    #[test]
    fn variance_is_bounded_by_second_moment(
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
        mu in 0.001f64..0.999,
        order in prop::sample::select(vec![4usize, 16, 64]),
    ) {
        let c = build_constellation(order).unwrap();
        let s = soft_statistics(Complex64::new(re, im), mu, &c);
        let second_moment: f64 = s
            .posterior
            .iter()
            .zip(c.points())
            .map(|(p, x)| p * x.norm_sqr())
            .sum();
        prop_assert!(s.residual_variance >= 0.0);
        prop_assert!(s.residual_variance <= second_moment + 1e-12);
        // Unit-energy alphabets keep the posterior variance at or
        // below one.
        prop_assert!(s.residual_variance <= 1.0 + 1e-12);
    }

    #[test]
    fn weight_scaling_leaves_statistics_unchanged(
        seed in 0u64..1_000_000,
        pow in -40i32..40,
        order in prop::sample::select(vec![4usize, 16, 64]),
    ) {
        let c = build_constellation(order).unwrap();
        let mut rng = Lcg(seed.wrapping_mul(2654435761).wrapping_add(1));
        let weights: Vec<f64> = (0..order).map(|_| rng.next_f64() + 1e-6).collect();

        // Exact powers of two: bit-for-bit identical.
        let scaled: Vec<f64> = weights.iter().map(|w| w * 2.0f64.powi(pow)).collect();
        let a = stats_from_weights(&weights, &c);
        let b = stats_from_weights(&scaled, &c);
        prop_assert_eq!(&a.posterior, &b.posterior);
        prop_assert_eq!(a.soft_decision, b.soft_decision);
        prop_assert_eq!(a.residual_variance, b.residual_variance);
        prop_assert_eq!(a.hard_index, b.hard_index);

        // Arbitrary positive scale: equal to tolerance.
        let factor = 0.1 + 3.0 * rng.next_f64();
        let scaled: Vec<f64> = weights.iter().map(|w| w * factor).collect();
        let d = stats_from_weights(&scaled, &c);
        for (x, y) in a.posterior.iter().zip(d.posterior.iter()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.soft_decision - d.soft_decision).norm() < 1e-12);
        prop_assert!((a.residual_variance - d.residual_variance).abs() < 1e-12);
        prop_assert_eq!(a.hard_index, d.hard_index);
    }
}
