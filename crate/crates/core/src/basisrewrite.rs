//! Rewriting fields of the form `α D1 + β x1^{p-1} D2 + γ x1^{q-1} D3` in
//! the basis `X1, X2, X3`, and the commutator expansion
//! `[X_j, D3^m] = Σ_{ℓ≥1} C(m,ℓ) Σ_h γ̃_jh^(ℓ) X_h D3^{m-ℓ}` built on it.

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::fields::{bracket, FieldSymbol, OperatorSpec};
use crate::normalform::StandardForm;
use crate::symcore::{Poly, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("the 2×2 coefficient matrix is singular at the origin (operator is not of type I_0): det = {0}")]
    NotTypeI0(String),
    #[error("fields are not in the expected shape: {0}")]
    NotStandardForm(String),
    #[error("target coefficient of {var} is not divisible by x1^{power}")]
    TargetNotDivisible { var: Var, power: u32 },
    #[error("order m = {0} is outside 1..=4")]
    OrderOutOfRange(u32),
    #[error("field index {0} is outside 1..=3")]
    BadIndex(u8),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// The straightened fields with the `x1` powers of the `ξ2` and `ξ3`
/// columns factored out: `c2(X_j) = x1^{p-1} f_j`, `c3(X_j) = x1^{q-1} g_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisForm {
    pub spec: OperatorSpec,
    pub p: u32,
    pub q: u32,
    pub f: [Poly; 2],
    pub g: [Poly; 2],
    /// `f2 g3 − f3 g2`.
    pub det: Poly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisCoeffs {
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
    /// Coefficients are exact below this total degree.
    pub trunc: u32,
}

impl BasisForm {
    pub fn from_spec(spec: &OperatorSpec, p: u32, q: u32) -> Result<Self, BasisError> {
        if !spec.x1_is_d1() {
            return Err(BasisError::NotStandardForm("X1 is not D1".into()));
        }
        if p == 0 || q < p {
            return Err(BasisError::NotStandardForm(format!("need 1 ≤ p ≤ q, got p = {p}, q = {q}")));
        }
        let mut f = [Poly::zero(), Poly::zero()];
        let mut g = [Poly::zero(), Poly::zero()];
        for k in 0..2 {
            let x = &spec.fields[k + 1];
            f[k] = x.coeff(Var::X2).unshift(Var::X1, p - 1).ok_or_else(|| {
                BasisError::NotStandardForm(format!("ξ2-coefficient of X{} not divisible by x1^{}", k + 2, p - 1))
            })?;
            g[k] = x.coeff(Var::X3).unshift(Var::X1, q - 1).ok_or_else(|| {
                BasisError::NotStandardForm(format!("ξ3-coefficient of X{} not divisible by x1^{}", k + 2, q - 1))
            })?;
        }
        let det = &(&f[0] * &g[1]) - &(&f[1] * &g[0]);
        let d0 = det.constant_term();
        if d0.is_zero() {
            return Err(BasisError::NotTypeI0(det.to_string()));
        }
        Ok(BasisForm { spec: spec.clone(), p, q, f, g, det })
    }

    pub fn from_standard_form(sf: &StandardForm) -> Result<Self, BasisError> {
        Self::from_spec(&sf.reassemble(), sf.p, sf.q)
    }

    /// `a, b, c` with `a X1 + b X2 + c X3 = target` below total degree
    /// `trunc`.
    pub fn solve_basis(&self, target: &FieldSymbol, trunc: u32) -> Result<BasisCoeffs, BasisError> {
        let beta = target
            .coeff(Var::X2)
            .unshift(Var::X1, self.p - 1)
            .ok_or(BasisError::TargetNotDivisible { var: Var::X2, power: self.p - 1 })?;
        let gamma = target
            .coeff(Var::X3)
            .unshift(Var::X1, self.q - 1)
            .ok_or(BasisError::TargetNotDivisible { var: Var::X3, power: self.q - 1 })?;
        let inv = self.det.series_inverse(trunc)?;
        let [f2, f3] = &self.f;
        let [g2, g3] = &self.g;
        let b = (&(&beta * g3) - &(&gamma * f3)).mul_trunc(&inv, trunc);
        let c = (&(&gamma * f2) - &(&beta * g2)).mul_trunc(&inv, trunc);
        let x2 = &self.spec.fields[1];
        let x3 = &self.spec.fields[2];
        let a = (&(target.coeff(Var::X1) - &(&b * x2.coeff(Var::X1))) - &(&c * x3.coeff(Var::X1))).truncate(trunc);
        Ok(BasisCoeffs { a, b, c, trunc })
    }

    /// `a X1 + b X2 + c X3`, untruncated.
    pub fn combine(&self, coeffs: &[Poly; 3]) -> FieldSymbol {
        (0..3).fold(FieldSymbol::zero(), |acc, h| acc.add(&self.spec.fields[h].scale(&coeffs[h])))
    }

    /// `a X1 + b X2 + c X3 − target`, truncated below degree `trunc`;
    /// zero when the coefficients are correct.
    pub fn residual(&self, target: &FieldSymbol, coeffs: &BasisCoeffs) -> FieldSymbol {
        let abc = [coeffs.a.clone(), coeffs.b.clone(), coeffs.c.clone()];
        self.combine(&abc).sub(target).map(|p| p.truncate(coeffs.trunc))
    }
}

/// `γ̃_jh^(ℓ)` for one `j` and `ℓ = 0..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaTable {
    pub j: u8,
    pub m: u32,
    pub trunc: u32,
    /// `entries[ℓ][h-1] = γ̃_jh^(ℓ)`; `entries[0]` is `−δ_jh`.
    pub entries: Vec<[Poly; 3]>,
    /// `ad_{D3}^ℓ X_j = ∂3^ℓ X_j`, the exact fields the rows were solved for.
    pub brackets: Vec<FieldSymbol>,
}

impl GammaTable {
    pub fn is_zero_beyond_0(&self) -> bool {
        self.entries[1..].iter().all(|row| row.iter().all(Poly::is_zero))
    }

    /// `Σ_h γ̃_jh^(ℓ) X_h`, which should equal `−∂3^ℓ X_j` below `trunc`.
    pub fn row_field(&self, basis: &BasisForm, l: usize) -> FieldSymbol {
        basis.combine(&self.entries[l])
    }
}

/// Builds the table by bracketing `X_j` with `D3` `ℓ` times and rewriting
/// each result in the `X` basis.
pub fn expand_commutator(basis: &BasisForm, j: u8, m: u32, trunc: u32) -> Result<GammaTable, BasisError> {
    if !(1..=4).contains(&m) {
        return Err(BasisError::OrderOutOfRange(m));
    }
    if !(1..=3).contains(&j) {
        return Err(BasisError::BadIndex(j));
    }
    let d3 = FieldSymbol::xi(Var::X3);
    let mut current = basis.spec.field(j).clone();
    let mut delta = [Poly::zero(), Poly::zero(), Poly::zero()];
    delta[j as usize - 1] = Poly::from_int(-1);
    let mut entries = vec![delta];
    let mut brackets = vec![current.clone()];
    for _ in 1..=m {
        current = bracket(&d3, &current);
        brackets.push(current.clone());
        let sol = basis.solve_basis(&current.neg(), trunc)?;
        entries.push([sol.a, sol.b, sol.c]);
    }
    Ok(GammaTable { j, m, trunc, entries, brackets })
}

/// Applies `Σ_{ℓ=1}^{m} C(m,ℓ) Σ_h γ̃_jh^(ℓ) X_h D3^{m-ℓ}` to `u`.
pub fn apply_expansion(basis: &BasisForm, table: &GammaTable, u: &Poly) -> Poly {
    let mut out = Poly::zero();
    let mut binom = Poly::one();
    let m = table.m as usize;
    for l in 1..=m {
        // C(m, l) = C(m, l-1) (m - l + 1) / l
        binom = binom.scale(&crate::symcore::rat((m - l + 1) as i64, l as i64));
        let w = u.diff_n(Var::X3, (m - l) as u32);
        let term = table.row_field(basis, l).apply(&w);
        out += &(&binom * &term);
    }
    out
}

/// Applies the commutator `X_j D3^m − D3^m X_j` to `u` directly.
pub fn apply_commutator(x: &FieldSymbol, m: u32, u: &Poly) -> Poly {
    &x.apply(&u.diff_n(Var::X3, m)) - &x.apply(u).diff_n(Var::X3, m)
}

/// Fit of `‖γ̃^(ℓ)‖ ≤ C^ℓ ℓ!` over the computed rows; a diagnostic only.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Sum of `|coefficient|` over terms of total degree `≤ degree`, per ℓ ≥ 1.
    pub norms: Vec<f64>,
    pub degree: u32,
    /// Smallest `C` with `norm_ℓ ≤ C^ℓ ℓ!` for every computed ℓ.
    pub c: f64,
}

pub fn growth_fit(table: &GammaTable, degree: u32) -> GrowthFit {
    let mut norms = Vec::new();
    let mut c: f64 = 0.0;
    let mut fact = 1.0;
    for (l, row) in table.entries.iter().enumerate().skip(1) {
        fact *= l as f64;
        let n: f64 = row.iter().map(|p| p.coefficient_norm(degree).to_f64().unwrap_or(f64::INFINITY)).sum();
        norms.push(n);
        c = c.max((n / fact).powf(1.0 / l as f64));
    }
    GrowthFit { norms, degree, c }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_elements_solve_to_unit_vectors() {
        let b = BasisForm::from_spec(&OperatorSpec::oleinik_radkevic(2, 3), 2, 3).unwrap();
        let s = b.solve_basis(b.spec.field(2), 6).unwrap();
        assert_eq!((s.a.is_zero(), s.b.is_one(), s.c.is_zero()), (true, true, true));
        let t = FieldSymbol::new(Poly::zero(), Poly::zero(), Poly::var_pow(Var::X1, 2));
        let s = b.solve_basis(&t, 6).unwrap();
        assert!(s.a.is_zero() && s.b.is_zero() && s.c.is_one());
    }

    #[test]
    fn x1_field_has_trivial_table() {
        let b = BasisForm::from_spec(&OperatorSpec::oleinik_radkevic(2, 4), 2, 4).unwrap();
        let t = expand_commutator(&b, 1, 3, 6).unwrap();
        assert!(t.is_zero_beyond_0());
        assert_eq!(t.entries[0][0], Poly::from_int(-1));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        // (ã23, ã33) = (1, 0) with λ = 0: −λ(0) g2(0) + g3(0) = 0
        let x1 = Poly::var(Var::X1);
        let spec = OperatorSpec::new(
            FieldSymbol::xi(Var::X1),
            FieldSymbol::new(Poly::zero(), x1.clone(), x1.pow(2)),
            FieldSymbol::new(Poly::zero(), x1.pow(2), Poly::zero()),
        );
        assert!(matches!(BasisForm::from_spec(&spec, 2, 3), Err(BasisError::NotTypeI0(_))));
    }
}
