use num_traits::Zero;

use super::{mat_map, Mat2, NormalFormError};
use crate::fields::{FieldSymbol, OperatorSpec};
use crate::symcore::{gcd_in_x1, int, Poly, SymError, Var};

/// `Σ1 = {ξ1 = 0, x1 = g(x')}` together with the cofactor block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharManifold {
    pub g: Poly,
    /// Multiplicity `k` of `(x1 - g)` in every ξ'-entry.
    pub multiplicity: u32,
    /// `A / (x1 - g)^k`.
    pub tilde_a: Mat2,
}

fn require_d1(spec: &OperatorSpec) -> Result<(), NormalFormError> {
    if spec.x1_is_d1() {
        Ok(())
    } else {
        Err(NormalFormError::NotStandardForm(format!("X1 = {} is not D1", spec.fields[0])))
    }
}

/// Finds `g` with `A = (x1 - g(x'))^k Ã` from the gcd of the ξ'-entries.
pub fn detect_sigma1(spec: &OperatorSpec) -> Result<CharManifold, NormalFormError> {
    require_d1(spec)?;
    let block = spec.xi_prime_block();
    let entries: Vec<Poly> = block.iter().flatten().cloned().collect();
    let factor = match gcd_in_x1(&entries) {
        Ok(f) => f,
        Err(SymError::AllZero) => return Err(NormalFormError::InfiniteOrder),
        Err(e) => return Err(e.into()),
    };
    let d = factor.degree_in(Var::X1).unwrap_or(0);
    if d == 0 {
        return Err(NormalFormError::NoCommonFactor);
    }
    let lead = factor.coeff_in(Var::X1, d);
    if !lead.is_constant() {
        return Err(NormalFormError::NonGraphFactor(factor.to_string()));
    }
    let factor = factor.scale(&lead.constant_term().recip());
    let g = -factor.coeff_in(Var::X1, d - 1).scale(&int(d as i64).recip());
    let linear = &Poly::var(Var::X1) - &g;
    if linear.pow(d) != factor {
        return Err(NormalFormError::NonGraphFactor(factor.to_string()));
    }
    if !g.constant_term().is_zero() {
        return Err(NormalFormError::NotCharacteristic(format!(
            "characteristic hypersurface x1 = {g} misses the base point"
        )));
    }
    let tilde_a = mat_map(&block, |e| e.div_exact(&factor).expect("gcd divides every entry"));
    Ok(CharManifold { g, multiplicity: d, tilde_a })
}

/// Change of variables `y1 = x1 - g(x')`, `y' = x'`, acting on each field
/// by pushforward. It maps `{x1 = g}` to `{y1 = 0}`; the inverse is
/// `apply_cov(·, -g)`.
///
/// # Panics
///
/// If `g` depends on `x1`.
pub fn apply_cov(spec: &OperatorSpec, g: &Poly) -> OperatorSpec {
    assert!(!g.contains_var(Var::X1), "straightening function must not depend on x1");
    if g.is_zero() {
        return spec.clone();
    }
    let back = &Poly::var(Var::X1) + g;
    let g2 = g.diff(Var::X2);
    let g3 = g.diff(Var::X3);
    let push = |f: &FieldSymbol| {
        let c1 = &(&f.c[0] - &(&f.c[1] * &g2)) - &(&f.c[2] * &g3);
        FieldSymbol::new(
            c1.substitute(Var::X1, &back),
            f.c[1].substitute(Var::X1, &back),
            f.c[2].substitute(Var::X1, &back),
        )
    };
    OperatorSpec {
        fields: [push(&spec.fields[0]), push(&spec.fields[1]), push(&spec.fields[2])],
        base_point: spec.base_point.clone(),
        codirection: spec.codirection,
    }
}

/// Fields written as `X1 = ξ1`, `X_k = a_k1 ξ1 + x1^{p-1} (Ã_p ξ')_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialForm {
    pub p: u32,
    pub a21: Poly,
    pub a31: Poly,
    pub tilde_a_p: Mat2,
    pub swapped: bool,
}

impl PartialForm {
    /// `M(x') = Ã_p(0, x')`.
    pub fn m(&self) -> Mat2 {
        mat_map(&self.tilde_a_p, super::at_x1_zero)
    }

    pub fn swap(&self) -> PartialForm {
        let t = &self.tilde_a_p;
        PartialForm {
            p: self.p,
            a21: self.a31.clone(),
            a31: self.a21.clone(),
            tilde_a_p: [t[1].clone(), t[0].clone()],
            swapped: !self.swapped,
        }
    }
}

/// Extracts `x1^{p-1}` from the ξ'-block; `p - 1` is the smallest
/// `x1`-order among the four entries.
pub fn factor_p(spec: &OperatorSpec) -> Result<PartialForm, NormalFormError> {
    require_d1(spec)?;
    let block = spec.xi_prime_block();
    let order = block
        .iter()
        .flatten()
        .filter_map(|e| e.ord_var(Var::X1))
        .min()
        .ok_or(NormalFormError::InfiniteOrder)?;
    let tilde_a_p = mat_map(&block, |e| e.unshift(Var::X1, order).expect("order is minimal"));
    Ok(PartialForm {
        p: order + 1,
        a21: spec.fields[1].c[0].clone(),
        a31: spec.fields[2].c[0].clone(),
        tilde_a_p,
        swapped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::bracket;

    fn x(i: usize) -> Poly {
        Poly::var(Var::from_number(i).unwrap())
    }

    fn spec_from_block(block: &Mat2) -> OperatorSpec {
        OperatorSpec::new(
            FieldSymbol::xi(Var::X1),
            FieldSymbol::new(Poly::zero(), block[0][0].clone(), block[0][1].clone()),
            FieldSymbol::new(Poly::zero(), block[1][0].clone(), block[1][1].clone()),
        )
    }

    #[test]
    fn sheared_identity_recovers_g() {
        let f = &x(1) - &x(2).pow(2);
        let spec = spec_from_block(&[[f.clone(), Poly::zero()], [Poly::zero(), f]]);
        let cm = detect_sigma1(&spec).unwrap();
        assert_eq!(cm.g, x(2).pow(2));
        assert_eq!(cm.multiplicity, 1);
    }

    #[test]
    fn model_block_has_g_zero() {
        let spec = spec_from_block(&[[x(1), Poly::zero()], [Poly::zero(), x(1).pow(4)]]);
        let cm = detect_sigma1(&spec).unwrap();
        assert!(cm.g.is_zero());
        let spec = spec_from_block(&[[Poly::one(), Poly::zero()], [Poly::zero(), Poly::one()]]);
        assert_eq!(detect_sigma1(&spec), Err(NormalFormError::NoCommonFactor));
    }

    #[test]
    fn cov_round_trip_and_identity() {
        let spec = OperatorSpec::oleinik_radkevic(2, 3);
        assert_eq!(apply_cov(&spec, &Poly::zero()), spec);
        let g = &x(2).pow(2) - &x(3);
        let there = apply_cov(&spec, &g);
        assert_eq!(apply_cov(&there, &-g.clone()), spec);
        let lhs = apply_cov(
            &OperatorSpec::new(bracket(&spec.fields[0], &spec.fields[1]), FieldSymbol::zero(), FieldSymbol::zero()),
            &g,
        );
        assert_eq!(lhs.fields[0], bracket(&there.fields[0], &there.fields[1]));
    }

    #[test]
    fn p_from_block() {
        let spec = OperatorSpec::oleinik_radkevic(3, 4);
        assert_eq!(factor_p(&spec).unwrap().p, 3);
        let spec = spec_from_block(&[[x(1), Poly::zero()], [Poly::zero(), x(1)]]);
        let pf = factor_p(&spec).unwrap();
        assert_eq!(pf.p, 2);
        assert_eq!(pf.tilde_a_p, [[Poly::one(), Poly::zero()], [Poly::zero(), Poly::one()]]);
        let zero = spec_from_block(&[[Poly::zero(), Poly::zero()], [Poly::zero(), Poly::zero()]]);
        assert_eq!(factor_p(&zero), Err(NormalFormError::InfiniteOrder));
    }
}
