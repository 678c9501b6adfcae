//! The alternating zeta function `η(s) = Σ (-1)^{n-1} n^{-s}` through its
//! finite binomial-weight approximations `η_N(s)`.
//!
//! Every representation of `η_N` is implemented independently so that they
//! can be checked against each other:
//!
//! * [`eta::eta_series`]: the weighted finite sum,
//! * [`determinants::eta_det`]: a factorial-scaled determinant,
//! * [`determinants::eta_tridiag`] and [`determinants::eta_contfrac`]: a
//!   three-term recurrence and its continued fraction,
//! * [`sampling::eta_mc`]: an expectation over the Dixon-Anderson density,
//! * [`ensembles`]: ensemble averages of generalized Vandermonde ratios.
//!
//! Exact identities run over [`Rational`]; floating kernels are generic over
//! [`scalar::Real`] and are exposed at `f64` with double-double ([`Dd`])
//! used internally where cancellation demands it.

pub mod dd;
pub mod determinants;
pub mod ensembles;
pub mod error;
pub mod eta;
pub mod exact_linalg;
pub mod matrix;
pub mod oracle;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod special;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
pub use eta::{EvalResult, Method, SParam, WeightTable};

/// Exact rationals over arbitrary-precision integers.
pub type Rational = num_rational::BigRational;
/// Complex double.
pub type C64 = num_complex::Complex<f64>;
/// Double-double real (about 32 significant digits).
pub type Dd = dd::Dd;
/// Complex double-double.
pub type CDd = num_complex::Complex<Dd>;
