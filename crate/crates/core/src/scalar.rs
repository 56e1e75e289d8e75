//! Numeric traits shared by the whole crate.
//!
//! Two layers:
//!
//! * [`Coefficient`] is what the symbolic term algebras (radial and angular
//!   expressions, derived fields) are generic over. It is implemented for
//!   `f32`, `f64` and the exact [`Rational64`], so field derivations and
//!   integration-by-parts normal forms can be checked with exact arithmetic.
//! * [`Real`] is a floating-point [`Coefficient`] used for everything that
//!   evaluates mollifiers or runs quadrature.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_rational::Rational64;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive, Zero};

/// Ring element usable as the coefficient of a symbolic term.
pub trait Coefficient:
    Clone + PartialEq + Debug + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute value.
    fn magnitude(&self) -> Self;

    /// Whether `sum` should be treated as an exact zero, given that the
    /// magnitudes of the parts that produced it add up to `scale`.
    fn is_cancellation(sum: &Self, scale: &Self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer fits the coefficient type")
    }

    fn to_real<T: Real>(&self) -> T {
        T::of(self.to_f64().expect("coefficient converts to f64"))
    }
}

/// Floating-point scalar: f32 or f64.
pub trait Real: Coefficient + Float + FloatConst + Copy + Display + LowerExp + Sum {
    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Literal conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal fits the scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

macro_rules! float_coefficient {
    ($t:ty) => {
        impl Coefficient for $t {
            fn magnitude(&self) -> Self {
                Float::abs(*self)
            }

            fn is_cancellation(sum: &Self, scale: &Self) -> bool {
                Float::abs(*sum) <= 32.0 * <$t>::EPSILON * *scale
            }
        }
    };
}

float_coefficient!(f32);
float_coefficient!(f64);

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Coefficient for Rational64 {
    fn magnitude(&self) -> Self {
        if *self < Rational64::zero() {
            -*self
        } else {
            *self
        }
    }

    fn is_cancellation(sum: &Self, _scale: &Self) -> bool {
        sum.is_zero()
    }
}

/// `n!` as a real number.
pub fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::of(k as f64))
}

/// Γ(j + 1/2) = (2j)! √π / (4^j j!), built by the recurrence Γ(x+1) = xΓ(x).
pub fn gamma_half_integer<T: Real>(j: u32) -> T {
    let mut g = T::PI().sqrt();
    for k in 0..j {
        g = g * (T::of(k as f64) + T::of(0.5));
    }
    g
}
