//! Scalar abstraction so the adaptive filters run on real or complex data.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field element used for weights, regressors, and measurements.
///
/// The spectrum scenario is all-real (`f64`); the generic mode also supports
/// `Complex64` with the conjugation structure of the complex LMS recursions.
pub trait Scalar:
    Copy
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    /// Modulus |z|.
    fn modulus(self) -> f64;
    /// Squared modulus |z|^2.
    fn norm_sq(self) -> f64;
    /// Multiply by a real factor.
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;
    /// z/|z|, or zero at the origin. Reduces to sign(x) for reals.
    fn unit_sign(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn norm_sq(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn unit_sign(self) -> Self {
        if self == 0.0 {
            0.0
        } else {
            self.signum()
        }
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn norm_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn unit_sign(self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self / n
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_sign_has_no_bias_at_zero() {
        assert_eq!(0.0f64.unit_sign(), 0.0);
        assert_eq!((-0.0f64).unit_sign(), 0.0);
        assert_eq!(3.5f64.unit_sign(), 1.0);
        assert_eq!((-0.1f64).unit_sign(), -1.0);
    }

    #[test]
    fn complex_sign_is_unit_modulus() {
        let z = Complex64::new(3.0, -4.0);
        let s = z.unit_sign();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert_eq!(Complex64::new(0.0, 0.0).unit_sign(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conjugation_and_parts() {
        let z = Complex64::new(1.0, 2.0);
        assert_eq!(Scalar::conj(z), Complex64::new(1.0, -2.0));
        assert_eq!(z.norm_sq(), 5.0);
        assert_eq!(Scalar::re(z), 1.0);
        assert_eq!(f64::from_re(2.5), 2.5);
    }
}
