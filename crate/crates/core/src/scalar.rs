//! Numeric traits the rest of the crate is generic over.
//!
//! Two tiers are used:
//!
//! * [`Field`] is enough for the recurrence transforms (monic rescaling,
//!   kernel shift, residual normalization) and polynomial evaluation. It
//!   is implemented by `f32`, `f64`, and exact rationals such as
//!   `num_rational::Ratio<i64>` or `BigRational`, which lets the algebraic
//!   identities be checked without rounding.
//! * [`Scalar`] adds the floating point operations (square roots,
//!   hyperbolic functions, quadrature) and is implemented for `f32` and
//!   `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num};

/// Exact or approximate field elements usable as recurrence coefficients.
pub trait Field:
    Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
    /// Converts a small integer. Panics only if the type cannot hold it.
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer not representable")
    }

    /// `true` when the value is exactly zero or not a finite number.
    ///
    /// Used to reject divisions that would break a recurrence. For floats,
    /// `x - x` is NaN exactly when `x` is infinite or NaN.
    fn is_degenerate(&self) -> bool {
        self.is_zero() || (self.clone() - self.clone()) != Self::zero()
    }
}

impl<T> Field for T where
    T: Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = T> + FromPrimitive + Send + Sync + 'static
{
}

/// Floating point scalar (`f32` or `f64`).
pub trait Scalar: Field + Float + Display + LowerExp + Sum + Default {
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 not representable")
    }

    /// Lossy conversion to `f64`.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Relative tolerance for numerical self-checks at this precision:
    /// `1e-10` for `f64`, looser for `f32`.
    fn check_tolerance() -> Self {
        let scaled = Self::epsilon() * Self::of(1e3);
        scaled.max(Self::of(1e-10))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
