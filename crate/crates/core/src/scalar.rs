//! Scalar abstraction shared by the tensor algebra.
//!
//! Every coefficient in the stf/Stf projections is a small rational number
//! (1/2, 1/d, 1/6, 1/(d+2), ...), so a scalar only has to be a field that can
//! be built from a ratio of integers. That covers the real and complex
//! floating point types as well as exact [`Rational64`] arithmetic.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{Num, NumAssign, ToPrimitive};

/// Field scalar used by [`Tensor2`](crate::tensor::Tensor2) and
/// [`Tensor3`](crate::tensor::Tensor3).
pub trait Scalar:
    Copy + PartialEq + Debug + Num + NumAssign + Neg<Output = Self> + Send + Sync + 'static
{
    /// The exact value `num / den` (rounded for floating point types).
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Complex conjugate; the identity on real fields.
    fn conj(self) -> Self;

    /// `|x|²` as a double, used for norms and tolerance checks.
    fn abs_sqr(self) -> f64;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self * self
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        (self as f64) * (self as f64)
    }
}

impl<F> Scalar for Complex<F>
where
    F: Scalar + num_traits::Float,
{
    #[inline]
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(F::from_ratio(num, den), F::zero())
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self.re.abs_sqr() + self.im.abs_sqr()
    }
}

impl Scalar for Rational64 {
    #[inline]
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        let x = self.to_f64().unwrap_or(f64::NAN);
        x * x
    }
}
