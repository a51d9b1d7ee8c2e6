use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};

use super::{Rational, SymError};

/// Exponent triple `(e1, e2, e3)` of `x1^e1 x2^e2 x3^e3`.
///
/// The derived ordering is lexicographic with `x1` most significant, which
/// makes the last entry of a [`Poly`]'s term map its lex-leading term.
pub type Monomial = [u32; 3];

/// One of the three space variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X1,
    X2,
    X3,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X1, Var::X2, Var::X3];

    /// Zero-based slot in a [`Monomial`].
    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
            Var::X3 => 2,
        }
    }

    /// Variable from its 1-based number, as written in `x1`, `x2`, `x3`.
    pub fn from_number(n: usize) -> Option<Var> {
        match n {
            1 => Some(Var::X1),
            2 => Some(Var::X2),
            3 => Some(Var::X3),
            _ => None,
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.number())
    }
}

/// Sparse polynomial in `x1, x2, x3` with exact rational coefficients.
///
/// No stored coefficient is ever zero, so structural equality is polynomial
/// equality and the zero polynomial is the empty map.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(c, [0, 0, 0])
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(super::int(n))
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 3];
        e[v.index()] = 1;
        Poly::monomial(Rational::one(), e)
    }

    /// `var^k`.
    pub fn var_pow(v: Var, k: u32) -> Self {
        let mut e = [0; 3];
        e[v.index()] = k;
        Poly::monomial(Rational::one(), e)
    }

    pub fn monomial(c: Rational, exps: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly { terms }
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging repeats.
    pub fn from_terms<I: IntoIterator<Item = (Rational, Monomial)>>(iter: I) -> Self {
        let mut p = Poly::zero();
        for (c, e) in iter {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&[0, 0, 0]).is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == [0, 0, 0])
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates over `(exponents, coefficient)` in increasing lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Monomial) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Value at the origin.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&[0, 0, 0])
    }

    /// Lex-leading term (x1 most significant), if any.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|e| e[v.index()] > 0)
    }

    pub fn degree_in(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|e| e[v.index()]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest `m` with `v^m` dividing `self`; `None` stands for infinity
    /// (the zero polynomial).
    pub fn ord_var(&self, v: Var) -> Option<u32> {
        self.terms.keys().map(|e| e[v.index()]).min()
    }

    /// Lowest total degree of a term; `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, a)| (*e, a * c)).collect(),
        }
    }

    /// Multiplies by `v^k`.
    pub fn shift(&self, v: Var, k: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = *e;
                    e[v.index()] += k;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// Divides by `v^k`; `None` when some term has a smaller power of `v`.
    pub fn unshift(&self, v: Var, k: u32) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[v.index()] < k {
                return None;
            }
            let mut e = *e;
            e[v.index()] -= k;
            terms.insert(e, c.clone());
        }
        Some(Poly { terms })
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn diff(&self, v: Var) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    /// `k`-th partial derivative in `v`.
    pub fn diff_n(&self, v: Var, k: u32) -> Poly {
        (0..k).fold(self.clone(), |p, _| p.diff(v))
    }

    pub fn eval(&self, point: &[Rational; 3]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= num_traits::pow(point[i].clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes the value `value` for `v`.
    pub fn eval_var(&self, v: Var, value: &Rational) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[i] = 0;
            let factor = if e[i] == 0 {
                Rational::one()
            } else {
                num_traits::pow(value.clone(), e[i] as usize)
            };
            out.add_term(e2, c * factor);
        }
        out
    }

    /// Composition: replaces `v` by the polynomial `replacement`.
    pub fn substitute(&self, v: Var, replacement: &Poly) -> Poly {
        let coeffs = self.coeffs_in(v);
        // Horner in v.
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * replacement) + c;
        }
        acc
    }

    /// Renames variables: the variable `v` becomes `perm[v.index()]`.
    pub fn permute(&self, perm: [Var; 3]) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(e, c)| {
            let mut e2 = [0; 3];
            for i in 0..3 {
                e2[perm[i].index()] = e[i];
            }
            (c.clone(), e2)
        }))
    }

    /// Coefficient of `v^k`, a polynomial free of `v`.
    pub fn coeff_in(&self, v: Var, k: u32) -> Poly {
        let i = v.index();
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[i] == k)
                .map(|(e, c)| {
                    let mut e2 = *e;
                    e2[i] = 0;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// All coefficients in `v`, lowest power first.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let i = v.index();
        let deg = match self.degree_in(v) {
            Some(d) => d as usize,
            None => return Vec::new(),
        };
        let mut out = vec![Poly::zero(); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = *e;
            e2[i] = 0;
            out[e[i] as usize].terms.insert(e2, c.clone());
        }
        out
    }

    /// Inverse of [`Poly::coeffs_in`].
    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            out += c.shift(v, k as u32);
        }
        out
    }

    /// Leading coefficient in `v`.
    pub fn lead_coeff_in(&self, v: Var) -> Poly {
        match self.degree_in(v) {
            Some(d) => self.coeff_in(v, d),
            None => Poly::zero(),
        }
    }

    /// Drops every term of total degree `>= order`.
    pub fn truncate(&self, order: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() < order)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Drops every term with `v`-degree `>= order`.
    pub fn truncate_in(&self, v: Var, order: u32) -> Poly {
        let i = v.index();
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[i] < order)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Product truncated at total degree `order`.
    pub fn mul_trunc(&self, other: &Poly, order: u32) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            if da >= order {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + eb.iter().sum::<u32>() >= order {
                    continue;
                }
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    /// Power-series inverse modulo terms of total degree `>= order`.
    ///
    /// Requires a nonzero constant term.
    pub fn series_inverse(&self, order: u32) -> Result<Poly, SymError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(SymError::NotAUnit);
        }
        let inv_c0 = c0.recip();
        // 1/u = (1/c0) * sum_k w^k with w = 1 - u/c0, which has no constant term.
        let w = &Poly::one() - &self.scale(&inv_c0);
        let mut acc = Poly::one();
        let mut wk = Poly::one();
        for _ in 1..order {
            wk = wk.mul_trunc(&w, order);
            if wk.is_zero() {
                break;
            }
            acc += &wk;
        }
        Ok(acc.truncate(order).scale(&inv_c0))
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (le, lc) = divisor.leading_term()?;
        let (le, lc) = (*le, lc.clone());
        if divisor.terms.len() == 1 {
            let mut terms = BTreeMap::new();
            for (e, c) in &self.terms {
                if (0..3).any(|i| e[i] < le[i]) {
                    return None;
                }
                terms.insert([e[0] - le[0], e[1] - le[1], e[2] - le[2]], c / &lc);
            }
            return Some(Poly { terms });
        }
        let mut quotient = Poly::zero();
        let mut rem = self.clone();
        while let Some((re, rc)) = rem.leading_term() {
            if (0..3).any(|i| re[i] < le[i]) {
                return None;
            }
            let t = Poly::monomial(rc / &lc, [re[0] - le[0], re[1] - le[1], re[2] - le[2]]);
            rem -= &(&t * divisor);
            quotient += t;
        }
        Some(quotient)
    }

    /// Sparse pseudo-remainder of `self` by `divisor` as polynomials in `v`.
    pub fn pseudo_rem(&self, divisor: &Poly, v: Var) -> Poly {
        let dg = match divisor.degree_in(v) {
            Some(d) => d,
            None => return Poly::zero(),
        };
        let lg = divisor.coeff_in(v, dg);
        let mut r = self.clone();
        while let Some(dr) = r.degree_in(v) {
            if dr < dg {
                break;
            }
            let lr = r.coeff_in(v, dr);
            r = &(&r * &lg) - &(&(&lr * divisor).shift(v, dr - dg));
        }
        r
    }

    /// Scales so that the lex-leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Poly::zero(),
        }
    }

    /// Divides out every common rational factor and makes the lex-leading
    /// coefficient positive, giving an integer-coefficient representative.
    pub fn clear_denominators(&self) -> Poly {
        use num_integer::Integer;
        let mut lcm = num_bigint::BigInt::one();
        for c in self.terms.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut out = self.scale(&Rational::from_integer(lcm));
        let mut g = num_bigint::BigInt::zero();
        for c in out.terms.values() {
            g = g.gcd(c.numer());
        }
        if g.is_zero() {
            return Poly::zero();
        }
        if !g.is_one() {
            out = out.scale(&Rational::from_integer(g).recip());
        }
        if out.leading_term().is_some_and(|(_, c)| c.is_negative()) {
            out = -out;
        }
        out
    }

    /// Sum of `|coefficient|` over terms of total degree `<= max_degree`.
    pub fn coefficient_norm(&self, max_degree: u32) -> Rational {
        self.terms
            .iter()
            .filter(|(e, _)| e.iter().sum::<u32>() <= max_degree)
            .map(|(_, c)| c.abs())
            .fold(Rational::zero(), |a, b| a + b)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, e: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if k == 1 {
            write!(f, "x{}", i + 1)?;
        } else {
            write!(f, "x{}^{}", i + 1, k)?;
        }
    }
    Ok(())
}

/// Terms print highest total degree first, e.g. `x1^2*x2 - 3/4*x3 + 1`.
/// The output is accepted back by the spec parser.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, (e, c)) in ordered.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = *e == [0, 0, 0];
            if is_const {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, e)?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += rhs;
        self
    }
}

impl<'a> AddAssign<&'a Poly> for Poly {
    fn add_assign(&mut self, rhs: &'a Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl AddAssign for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl<'a> SubAssign<&'a Poly> for Poly {
    fn sub_assign(&mut self, rhs: &'a Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, -c.clone());
        }
    }
}

impl SubAssign for Poly {
    fn sub_assign(&mut self, rhs: Poly) {
        *self -= &rhs;
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl<'a> Neg for &'a Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Poly {
        Poly::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, rat};

    fn x(i: usize) -> Poly {
        Poly::var(Var::from_number(i).unwrap())
    }

    #[test]
    fn difference_of_squares() {
        let a = &x(1) + &Poly::one();
        let b = &x(1) - &Poly::one();
        assert_eq!(&a * &b, &x(1).pow(2) - &Poly::one());
    }

    #[test]
    fn square_with_rational_coefficient() {
        // (x1 x2 + 1/2 x3)^2 expanded by hand term by term.
        let p = &(&x(1) * &x(2)) + &x(3).scale(&rat(1, 2));
        let expected = Poly::from_terms([
            (int(1), [2, 2, 0]),
            (int(1), [1, 1, 1]),
            (rat(1, 4), [0, 0, 2]),
        ]);
        assert_eq!(p.pow(2), expected);
    }

    #[test]
    fn derivatives() {
        assert_eq!(x(1).pow(3).diff(Var::X1), x(1).pow(2).scale(&int(3)));
        assert!((&x(2) * &x(3)).diff(Var::X1).is_zero());
        let p = &(&x(1).pow(2) * &x(2)) + &x(3);
        assert_eq!(p.diff(Var::X2), x(1).pow(2));
    }

    #[test]
    fn ord_var_cases() {
        let p = &(&x(1).pow(3) * &x(2)) + &x(1).pow(4);
        assert_eq!(p.ord_var(Var::X1), Some(3));
        assert_eq!(Poly::zero().ord_var(Var::X1), None);
        assert_eq!(x(2).pow(2).ord_var(Var::X1), Some(0));
    }

    #[test]
    fn substitute_and_eval_agree() {
        let p = &(&x(1).pow(2) * &x(2)) - &x(3).scale(&rat(3, 4));
        let g = &x(2).pow(2) + &x(3);
        let composed = p.substitute(Var::X1, &g);
        let pt = [rat(1, 3), rat(-2, 5), rat(7, 2)];
        let gval = g.eval(&pt);
        let direct = p.eval(&[gval, pt[1].clone(), pt[2].clone()]);
        assert_eq!(composed.eval(&pt), direct);
    }

    #[test]
    fn exact_division() {
        let a = &x(1) - &x(2).pow(2);
        let b = &(&x(1) + &x(3)) * &x(2);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!((&prod + &Poly::one()).div_exact(&a), None);
    }

    #[test]
    fn series_inverse_of_unit() {
        let u = &(&Poly::from_int(2) + &x(2)) - &(&x(3) * &x(2));
        let inv = u.series_inverse(6).unwrap();
        let prod = u.mul_trunc(&inv, 6);
        assert_eq!(prod, Poly::one());
        assert_eq!(x(2).series_inverse(4), Err(SymError::NotAUnit));
    }

    #[test]
    fn display_round_trip_shape() {
        let p = Poly::from_terms([(rat(-3, 4), [0, 0, 1]), (int(1), [2, 1, 0]), (int(2), [0, 0, 0])]);
        assert_eq!(p.to_string(), "x1^2*x2 - 3/4*x3 + 2");
    }

    #[test]
    fn clear_denominators_makes_primitive_integer_poly() {
        let p = Poly::from_terms([(rat(-1, 2), [1, 0, 0]), (rat(3, 4), [0, 1, 0])]);
        let q = p.clear_denominators();
        assert_eq!(q, Poly::from_terms([(int(2), [1, 0, 0]), (int(-3), [0, 1, 0])]));
    }
}
