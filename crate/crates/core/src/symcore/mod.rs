//! Exact arithmetic kernel: rationals, sparse polynomials in `x1, x2, x3`,
//! multivariate gcd and truncated power series.

mod gcd;
mod poly;
mod series;

pub use gcd::{content_in, gcd, gcd_in_x1, gcd_many, primitive_part_in};
pub use poly::{Monomial, Poly, Var};
pub use series::{Series1, SeriesVar};

use num_bigint::BigInt;
use thiserror::Error;

/// Coefficient field of every polynomial in the crate.
pub type Rational = num_rational::BigRational;

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("gcd of an all-zero list is undefined")]
    AllZero,
    #[error("cannot invert a series whose constant term is zero")]
    NotAUnit,
    #[error("series truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
}
