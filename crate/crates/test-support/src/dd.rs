//! Double-double arithmetic (an unevaluated sum of two doubles).
//!
//! Classic error-free transformations: Knuth two-sum, FMA-based
//! two-product, and the usual renormalization. Relative accuracy is
//! about 1e-32, limited by the tails of the f64 exponent range.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// A number represented as `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Dd) -> Dd {
        if self.to_f64() >= other.to_f64() {
            self
        } else {
            other
        }
    }

    /// Exponential by argument reduction against ln 2 and a Taylor
    /// series on the reduced argument.
    pub fn exp(self) -> Dd {
        // Underflow and overflow resolve at the f64 scale; callers
        // only feed non-positive arguments.
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        let ln2 = Dd {
            hi: std::f64::consts::LN_2,
            lo: 2.3190468138462996e-17,
        };
        let k = (self.hi / ln2.hi).round();
        let r = self - ln2 * Dd::from_f64(k);

        // exp(r) for |r| <= ln2/2 by Taylor summation to below 1e-35.
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        let mut i = 1u32;
        loop {
            term = term * r / Dd::from_f64(i as f64);
            sum = sum + term;
            if term.abs().to_f64() < 1e-35 || i > 40 {
                break;
            }
            i += 1;
        }
        // Scale by 2^k exactly.
        let scale = 2f64.powi(k as i32);
        Dd {
            hi: sum.hi * scale,
            lo: sum.lo * scale,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, other: Dd) -> Dd {
        self + (-other)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self - other * Dd::from_f64(q1);
        let q2 = r.hi / other.hi;
        let r2 = r - other * Dd::from_f64(q2);
        let q3 = r2.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sum_keeps_small_terms() {
        let a = Dd::from_f64(1.0);
        let b = Dd::from_f64(1e-25);
        let s = a + b - a;
        assert!(close(s.to_f64(), 1e-25, 1e-10));
    }

    #[test]
    fn division_round_trips() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = Dd::from_f64(std::f64::consts::E);
        let q = a / b * b - a;
        assert!(q.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exp_matches_references() {
        // exp(1) = 2.7182818284590452353602874713526624...
        let e = Dd::ONE.exp();
        assert!((e.hi - std::f64::consts::E).abs() < 1e-15);
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-16);
        // The tail below the f64 rounding of e: e - hi ~ 4.46e-17.
        assert!((e.lo - (std::f64::consts::E - e.hi)).abs() < 1e-30 || e.lo.abs() < 1e-15);

        // exp(-10) = 4.5399929762484851535591515560551e-5
        let v = Dd::from_f64(-10.0).exp();
        assert!(close(v.to_f64(), 4.5399929762484852e-5, 1e-14));

        // exp(-700) stays finite and accurate at the f64 fringe.
        let tiny = Dd::from_f64(-700.0).exp();
        assert!(close(tiny.to_f64(), 9.85967654375977e-305, 1e-12));

        // Deep underflow maps to zero.
        assert_eq!(Dd::from_f64(-800.0).exp().to_f64(), 0.0);
    }

    #[test]
    fn exp_additivity() {
        // exp(a) * exp(b) == exp(a + b) well below double rounding.
        let a = Dd::from_f64(-3.7);
        let b = Dd::from_f64(-0.41);
        let lhs = a.exp() * b.exp();
        let rhs = (a + b).exp();
        let rel = ((lhs - rhs).abs() / rhs).to_f64();
        assert!(rel < 1e-28, "relative error {rel}");
    }
}
