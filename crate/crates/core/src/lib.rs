//! Verification toolkit for the linearized regularized 13-moment equations:
//! trace-free tensor algebra, symbol ellipticity, a tensor-product Galerkin
//! discretization, discrete Brezzi constants and Korn-type estimates.

pub mod error;
pub mod galerkin;
pub mod korn;
pub mod linalg;
pub mod report;
pub mod saddle;
pub mod scalar;
pub mod symbol;
pub mod tensor;
pub mod tolerances;

pub use error::{Error, Result};

/// Working precision of the discretization.
pub type Real = f64;
pub type Tensor2R = tensor::Tensor2<f64>;
pub type Tensor2C = tensor::Tensor2<num_complex::Complex64>;
pub type Tensor3R = tensor::Tensor3<f64>;
pub type Tensor3C = tensor::Tensor3<num_complex::Complex64>;
/// Prefactors in exact arithmetic.
pub type ExactPrefactors = symbol::Prefactors<num_rational::Rational64>;
