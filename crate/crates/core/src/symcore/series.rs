use std::fmt;

use super::{Poly, SymError, Var};

/// The expansion variable of a [`Series1`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesVar {
    /// Expansion in `x1`; coefficients are polynomials in `x2, x3`.
    X1,
    /// An auxiliary parameter `t`; coefficients may be any polynomials.
    T,
}

impl fmt::Display for SeriesVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesVar::X1 => write!(f, "x1"),
            SeriesVar::T => write!(f, "t"),
        }
    }
}

/// One-variable power series `sum_{k < order} c_k s^k` with polynomial
/// coefficients, truncated at `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series1 {
    var: SeriesVar,
    coeffs: Vec<Poly>,
}

impl Series1 {
    pub fn zero(var: SeriesVar, order: usize) -> Self {
        Series1 { var, coeffs: vec![Poly::zero(); order] }
    }

    /// Takes coefficients lowest power first; extra entries are truncated and
    /// missing ones are zero.
    pub fn from_coeffs(var: SeriesVar, mut coeffs: Vec<Poly>, order: usize) -> Self {
        coeffs.resize(order, Poly::zero());
        Series1 { var, coeffs }
    }

    /// Expands a polynomial in `x1`, keeping powers below `order`.
    pub fn from_poly_x1(p: &Poly, order: usize) -> Self {
        Series1::from_coeffs(SeriesVar::X1, p.coeffs_in(Var::X1), order)
    }

    pub fn var(&self) -> SeriesVar {
        self.var
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &Poly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    /// Index of the first nonzero coefficient; `None` if the truncation is zero.
    pub fn series_ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Back to a polynomial, only valid for `x1` series.
    pub fn to_poly(&self) -> Poly {
        debug_assert_eq!(self.var, SeriesVar::X1);
        Poly::from_coeffs_in(Var::X1, &self.coeffs)
    }

    fn check(&self, other: &Series1) -> Result<(), SymError> {
        if self.order() != other.order() {
            return Err(SymError::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Series1) -> Result<Series1, SymError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Series1 { var: self.var, coeffs })
    }

    pub fn sub(&self, other: &Series1) -> Result<Series1, SymError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Series1 { var: self.var, coeffs })
    }

    pub fn mul(&self, other: &Series1) -> Result<Series1, SymError> {
        self.check(other)?;
        let n = self.order();
        let mut coeffs = vec![Poly::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] += &(a * b);
            }
        }
        Ok(Series1 { var: self.var, coeffs })
    }

    pub fn scale(&self, c: &Poly) -> Series1 {
        Series1 { var: self.var, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplicative inverse; the constant coefficient must be a nonzero
    /// rational constant.
    pub fn inverse(&self) -> Result<Series1, SymError> {
        let n = self.order();
        let c0 = self.coeffs.first().ok_or(SymError::NotAUnit)?;
        if c0.is_zero() || !c0.is_constant() {
            return Err(SymError::NotAUnit);
        }
        let inv0 = c0.constant_term().recip();
        let mut out = vec![Poly::zero(); n];
        out[0] = Poly::constant(inv0.clone());
        for k in 1..n {
            let mut acc = Poly::zero();
            for j in 1..=k {
                acc += &(&self.coeffs[j] * &out[k - j]);
            }
            out[k] = acc.scale(&-inv0.clone());
        }
        Ok(Series1 { var: self.var, coeffs: out })
    }
}

impl fmt::Display for Series1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*{}", self.var)?,
                _ => write!(f, "({c})*{}^{k}", self.var)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({}^{})", self.var, self.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::int;

    #[test]
    fn geometric_inverse() {
        // 1 / (1 - t) = 1 + t + t^2 + ...
        let s = Series1::from_coeffs(SeriesVar::T, vec![Poly::one(), Poly::from_int(-1)], 6);
        let inv = s.inverse().unwrap();
        assert!(inv.coeffs().iter().all(|c| c.is_one()));
        let prod = s.mul(&inv).unwrap();
        assert_eq!(prod.series_ord(), Some(0));
        assert!(prod.coeffs()[1..].iter().all(Poly::is_zero));
    }

    #[test]
    fn ord_and_mismatch() {
        let s = Series1::from_coeffs(SeriesVar::T, vec![Poly::zero(), Poly::zero(), Poly::constant(int(3))], 4);
        assert_eq!(s.series_ord(), Some(2));
        assert_eq!(Series1::zero(SeriesVar::T, 3).series_ord(), None);
        let t = Series1::zero(SeriesVar::T, 5);
        assert_eq!(s.add(&t), Err(SymError::OrderMismatch(4, 5)));
        assert_eq!(s.inverse(), Err(SymError::NotAUnit));
    }

    #[test]
    fn x1_round_trip() {
        let p = &Poly::var(Var::X1).pow(2) + &Poly::var(Var::X2);
        assert_eq!(Series1::from_poly_x1(&p, 4).to_poly(), p);
    }
}
