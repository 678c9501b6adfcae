//! Scalar abstractions shared by the numeric kernels.
//!
//! Floating kernels are written once against [`Real`] and instantiated for
//! `f32`, `f64` and the double-double [`Dd`]. Exact kernels use
//! [`Field`], which [`BigRational`](num_rational::BigRational) and the float
//! types all satisfy.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num};

use crate::dd::Dd;

/// Real floating type usable by the floating kernels.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Unit roundoff of the type.
    fn unit_roundoff() -> f64 {
        Self::epsilon().to_f64_lossy()
    }

    /// `base^{-exponent}` for a real positive base on the principal branch.
    fn pow_neg(base: Self, exponent: Complex<Self>) -> Complex<Self> {
        debug_assert!(base > Self::zero());
        (-exponent * base.ln()).exp()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Powers only need `f64` accuracy where this type is used: the
/// ill-conditioned parts of those matrices are polynomial.
impl Real for Dd {
    fn pow_neg(base: Self, exponent: Complex<Self>) -> Complex<Self> {
        debug_assert!(base.hi() > 0.0);
        let z = lower(exponent);
        let ln = base.hi().ln() + base.lo() / base.hi();
        lift((-z * ln).exp())
    }
}

/// Number type with exact (or exactly-intended) field operations.
pub trait Field: Clone + PartialEq + Num + Neg<Output = Self> + Debug {}

impl<T> Field for T where T: Clone + PartialEq + Num + Neg<Output = T> + Debug {}

/// Lift an `f64` complex number into `Complex<T>`.
pub fn lift<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

/// Project a `Complex<T>` down to `f64` components.
pub fn lower<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())
}

/// `base^(-exponent)` for a real positive base on the principal branch.
pub fn pow_neg<T: Real>(base: T, exponent: Complex<T>) -> Complex<T> {
    T::pow_neg(base, exponent)
}

/// `base^exponent` for a real positive base on the principal branch.
pub fn pow_pos<T: Real>(base: T, exponent: Complex<T>) -> Complex<T> {
    T::pow_neg(base, -exponent)
}
