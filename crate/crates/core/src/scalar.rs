//! Numeric abstractions shared by the metric, loss and classifier code.
//!
//! Everything that is pure rational arithmetic (readability formulas, SARI,
//! the loss algebra) is written against [`Scalar`], so it can be evaluated in
//! `f64` for production use and in exact rationals for oracle tests. Code that
//! needs transcendental functions (D-SARI penalties, sigmoid, softmax) uses
//! [`Real`].

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, Num};

pub trait Scalar: Num + Copy + PartialOrd + Debug + 'static {
    /// Exact conversion of a count.
    fn from_count(n: usize) -> Self;

    /// `num / den`, exact for rationals and correctly rounded for floats.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

macro_rules! impl_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_count(n: usize) -> Self {
                Ratio::from_integer(n as $int)
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                Ratio::new(num as $int, den as $int)
            }
            fn to_f64(self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }
        }
    };
}

impl_ratio_scalar!(i64);
impl_ratio_scalar!(i128);

/// Floating-point scalar.
pub trait Real: Scalar + Float {
    fn from_f64(x: f64) -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
}

/// Numerically stable logistic function.
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub fn softplus<T: Real>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Relative error between an analytic and a numerical derivative, falling back
/// to the absolute error when both are close to zero.
pub fn relative_error<T: Real>(analytic: T, numeric: T) -> T {
    let scale = analytic.abs().max(numeric.abs());
    let diff = (analytic - numeric).abs();
    if scale < T::from_f64(1e-8) {
        diff
    } else {
        diff / scale
    }
}
