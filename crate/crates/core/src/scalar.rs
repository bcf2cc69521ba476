//! Number types the engine is generic over.
//!
//! Everything that only needs field arithmetic and ordering is written once
//! against [`Scalar`] and instantiated for `f64` (fast, tolerance-based) and
//! [`Exact`] (arbitrary-precision rationals, tolerance zero). Every finite
//! `f64` converts to an [`Exact`] value without rounding, so an instance read
//! from JSON can always be re-checked exactly.

use std::fmt::Debug;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for exact checks.
pub type Exact = BigRational;

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic never rounds.
    const EXACT: bool;

    fn zero() -> Self;

    fn from_i64(value: i64) -> Self;

    /// Converts a finite float. Exact for [`Exact`].
    ///
    /// # Panics
    /// On NaN or infinities; callers validate inputs first.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    /// Feeds a value-identity into `state`; equal values hash equally.
    fn hash_value<H: Hasher>(&self, state: &mut H);

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_i64(2)
    }

    /// Slack applied to constraint checks on values of magnitude `scale`:
    /// zero for exact types, `1e-12 * max(1, scale)` for floats.
    fn slack(scale: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(1e-12 * scale.abs().max(1.0))
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn hash_value<H: Hasher>(&self, state: &mut H) {
        // -0.0 == 0.0, so both must hash alike.
        let v = if *self == 0.0 { 0.0f64 } else { *self };
        v.to_bits().hash(state);
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn half(&self) -> Self {
        *self / 2.0
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(value.into())
    }

    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).expect("finite value")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn hash_value<H: Hasher>(&self, state: &mut H) {
        self.hash(state);
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Largest absolute value of an element-wise difference.
pub fn max_abs_diff<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .fold(S::zero(), |acc, d| if d > acc { d } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_to_exact_is_lossless() {
        for x in [0.1, 1.0 / 3.0, 12345.678, 5e-300, 0.0] {
            let e = Exact::from_f64(x);
            assert_eq!(Scalar::to_f64(&e), x);
        }
    }

    #[test]
    fn exact_has_zero_slack() {
        assert_eq!(Exact::slack(100.0), <Exact as Scalar>::zero());
        assert_eq!(f64::slack(100.0), 1e-10);
        assert_eq!(f64::slack(0.5), 1e-12);
    }

    #[test]
    fn signed_zeros_hash_alike() {
        use std::collections::hash_map::DefaultHasher;
        let h = |x: f64| {
            let mut s = DefaultHasher::new();
            x.hash_value(&mut s);
            s.finish()
        };
        assert_eq!(h(0.0), h(-0.0));
    }
}
