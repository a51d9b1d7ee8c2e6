use num_traits::Zero;

use super::{
    at_x1_zero, det2, mat_map, CaseData, CaseIData, CaseIIaData, CaseIIbData, IIbSubcase, NormalFormError,
    PartialForm, StandardForm,
};
use crate::fields::rank_one_factor;
use crate::symcore::{gcd, Poly, Rational, Var};

/// Outcome of the analysis of `M(x') = Ã_p(0, x')`, before `q` is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifiedCase {
    /// `M = (α, λα)ᵀ ⊗ (1, 0)`.
    I { alpha: Poly, lambda_alpha: Poly },
    /// `M = x_j^m · M̃` with `det M̃(0) ≠ 0`.
    IIa { j: Var, m: u32 },
    /// `M = h ⊗ (α, β)` with `α(0) = β(0) = 0`.
    IIb { subcase: IIbSubcase, alpha: Poly, beta: Poly, h: [Poly; 2] },
}

fn origin() -> [Rational; 3] {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

fn at0(p: &Poly) -> Rational {
    p.constant_term()
}

/// `x_j^m` (up to a constant) for `j ∈ {2, 3}`.
fn as_coordinate_power(c: &Poly) -> Option<(Var, u32)> {
    if c.nterms() != 1 {
        return None;
    }
    let (e, _) = c.leading_term()?;
    match e {
        [0, m, 0] if *m > 0 => Some((Var::X2, *m)),
        [0, 0, m] if *m > 0 => Some((Var::X3, *m)),
        _ => None,
    }
}

/// Square-free part of `c` (up to a constant), for the smoothness test.
fn squarefree(c: &Poly) -> Poly {
    let d = gcd(&gcd(c, &c.diff(Var::X2)), &c.diff(Var::X3));
    c.div_exact(&d).unwrap_or_else(|| c.clone())
}

/// Reads off which standard shape `M(x') = Ã_p(0, x')` has.
///
/// Returns the (possibly `X2 ↔ X3`-exchanged) partial form alongside the
/// case. Shapes that only become standard after a change of the `x'`
/// coordinates are reported as [`NormalFormError::NeedsCoordinateChange`].
pub fn classify_case(pf: &PartialForm) -> Result<(PartialForm, ClassifiedCase), NormalFormError> {
    let m = pf.m();
    let d = det2(&m);
    if !at0(&d).is_zero() {
        return Err(NormalFormError::SigmaPEmpty(format!(
            "det M(0) = {} ≠ 0, so M(0) ξ' = 0 has no solution ξ' ≠ 0",
            at0(&d)
        )));
    }
    let content = m.iter().flatten().fold(Poly::zero(), |acc, e| gcd(&acc, e));
    if at0(&content).is_zero() {
        let reduced = mat_map(&m, |e| e.div_exact(&content).expect("content divides"));
        let reduced_det0 = det2(&reduced).constant_term();
        if let Some((j, mult)) = as_coordinate_power(&content) {
            if !reduced_det0.is_zero() {
                return Ok((pf.clone(), ClassifiedCase::IIa { j, m: mult }));
            }
        }
        let sf = squarefree(&content);
        let grad0 = [sf.diff(Var::X2).eval(&origin()), sf.diff(Var::X3).eval(&origin())];
        if grad0.iter().all(|g| g.is_zero()) {
            return Err(NormalFormError::SigmaPEmpty(format!(
                "common factor {content} of M does not cut out a smooth hypersurface"
            )));
        }
        return Err(NormalFormError::NeedsCoordinateChange(format!(
            "Σ_p lies over {content} = 0, not a coordinate plane"
        )));
    }
    if !d.is_zero() {
        return Err(NormalFormError::NeedsCoordinateChange(format!(
            "M has full rank off det M = {d} = 0"
        )));
    }
    let (h, alpha, beta) = rank_one_factor(&m).expect("rank one with nonzero content");
    let mut pf = pf.clone();
    let mut h = [h[0].clone(), h[1].clone()];
    if at0(&h[0]).is_zero() {
        if at0(&h[1]).is_zero() {
            return Err(NormalFormError::NeedsCoordinateChange(format!(
                "both cofactors ({}, {}) vanish at the origin",
                h[0], h[1]
            )));
        }
        pf = pf.swap();
        h.swap(0, 1);
    }
    if !at0(&beta).is_zero() {
        return Err(NormalFormError::SigmaPEmpty(format!(
            "Σ_p = {{({alpha}) ξ2 + ({beta}) ξ3 = 0}} does not contain the direction e3"
        )));
    }
    if !at0(&alpha).is_zero() {
        if !beta.is_zero() {
            return Err(NormalFormError::NeedsCoordinateChange(format!(
                "Σ_p = {{ξ2 + ({}) ξ3 = 0}} needs straightening to ξ2 = 0",
                beta.scale(&at0(&alpha).recip())
            )));
        }
        // β ≡ 0 forces α to be a unit constant after normalisation.
        let alpha_x = h[0].scale(&at0(&alpha));
        let lambda_alpha = h[1].scale(&at0(&alpha));
        return Ok((pf, ClassifiedCase::I { alpha: alpha_x, lambda_alpha }));
    }
    let b2 = beta.diff(Var::X2).eval(&origin());
    let b3 = beta.diff(Var::X3).eval(&origin());
    let subcase = if !b2.is_zero() {
        IIbSubcase::B1
    } else if !b3.is_zero() {
        IIbSubcase::B2
    } else {
        return Err(NormalFormError::NeedsCoordinateChange(format!(
            "β = {beta} has vanishing gradient at the origin"
        )));
    };
    Ok((pf, ClassifiedCase::IIb { subcase, alpha, beta, h }))
}

fn min_ord_x1<'a>(entries: impl IntoIterator<Item = &'a Poly>) -> Option<u32> {
    entries.into_iter().filter_map(|e| e.ord_var(Var::X1)).min()
}

fn lambda_series(alpha: &Poly, lambda_alpha: &Poly, trunc: u32) -> Result<Poly, NormalFormError> {
    let inv = alpha.series_inverse(trunc)?;
    Ok(lambda_alpha.mul_trunc(&inv, trunc))
}

/// Extracts `x1^{q-p}` from the part of `Ã_p` that does not vanish on
/// `Σ_p`, checks that the last layer is elliptic at the base point and
/// returns the full standard form.
pub fn compute_q(pf: &PartialForm, case: &ClassifiedCase, trunc: u32) -> Result<StandardForm, NormalFormError> {
    let t = &pf.tilde_a_p;
    let p = pf.p;
    let build = |qp: u32, case: CaseData| StandardForm {
        p,
        q: p + qp,
        a21: pf.a21.clone(),
        a31: pf.a31.clone(),
        swapped: pf.swapped,
        case,
    };
    match case {
        ClassifiedCase::I { alpha, lambda_alpha } => {
            let a22 = (&t[0][0] - alpha).unshift(Var::X1, 1).expect("α is the x1-free part");
            let a32 = (&t[1][0] - lambda_alpha).unshift(Var::X1, 1).expect("λα is the x1-free part");
            let qp = min_ord_x1([&t[0][1], &t[1][1]]).ok_or_else(|| {
                NormalFormError::LastLayerNotElliptic("the ξ3 column vanishes identically".into())
            })?;
            let a23 = t[0][1].unshift(Var::X1, qp).unwrap();
            let a33 = t[1][1].unshift(Var::X1, qp).unwrap();
            if at0(&a23).is_zero() && at0(&a33).is_zero() {
                return Err(NormalFormError::LastLayerNotElliptic(format!(
                    "(ã23, ã33)(0) = (0, 0) with ã23 = {a23}, ã33 = {a33}"
                )));
            }
            let lambda = lambda_series(alpha, lambda_alpha, trunc)?;
            Ok(build(
                qp,
                CaseData::I(CaseIData {
                    alpha: alpha.clone(),
                    lambda_alpha: lambda_alpha.clone(),
                    lambda,
                    lambda_trunc: trunc,
                    a22,
                    a32,
                    a23,
                    a33,
                }),
            ))
        }
        ClassifiedCase::IIa { j, m } => {
            let low = mat_map(t, |e| e.truncate_in(*j, *m));
            let qp = min_ord_x1(low.iter().flatten()).ok_or_else(|| {
                NormalFormError::LastLayerNotElliptic(format!("Ã_p is divisible by {j}^{m}"))
            })?;
            let hat = mat_map(&low, |e| e.unshift(Var::X1, qp).unwrap());
            let tilde = [
                [
                    (&t[0][0] - &low[0][0]).unshift(*j, *m).unwrap(),
                    (&t[0][1] - &low[0][1]).unshift(*j, *m).unwrap(),
                ],
                [
                    (&t[1][0] - &low[1][0]).unshift(*j, *m).unwrap(),
                    (&t[1][1] - &low[1][1]).unshift(*j, *m).unwrap(),
                ],
            ];
            let tilde_det0 = at0(&det2(&tilde));
            if tilde_det0.is_zero() {
                return Err(NormalFormError::LastLayerNotElliptic("det Ã(0) = 0".into()));
            }
            let hat_det0 = at0(&det2(&hat));
            if hat_det0.is_zero() {
                return Err(NormalFormError::LastLayerNotElliptic("det Â(0) = 0".into()));
            }
            Ok(build(qp, CaseData::IIa(CaseIIaData { j: *j, m: *m, tilde, hat })))
        }
        ClassifiedCase::IIb { subcase, alpha, beta, .. } => {
            let cols: Vec<[Vec<Poly>; 2]> = (0..2)
                .map(|i| [t[i][0].coeffs_in(Var::X1), t[i][1].coeffs_in(Var::X1)])
                .collect();
            let depth = t.iter().flatten().filter_map(|e| e.degree_in(Var::X1)).max().unwrap_or(0);
            let coeff = |i: usize, c: usize, k: u32| cols[i][c].get(k as usize).cloned().unwrap_or_else(Poly::zero);
            let mut hfull = [Poly::zero(), Poly::zero()];
            let mut qp = None;
            'levels: for k in 0..=depth {
                let mut level = [Poly::zero(), Poly::zero()];
                for i in 0..2 {
                    let row = [coeff(i, 0, k), coeff(i, 1, k)];
                    if !(&(alpha * &row[1]) - &(beta * &row[0])).is_zero() {
                        qp = Some(k);
                        break 'levels;
                    }
                    let hi = if !alpha.is_zero() { row[0].div_exact(alpha) } else { row[1].div_exact(beta) };
                    match hi {
                        Some(hi) => level[i] = hi,
                        None => {
                            qp = Some(k);
                            break 'levels;
                        }
                    }
                }
                for i in 0..2 {
                    hfull[i] += level[i].shift(Var::X1, k);
                }
            }
            let qp = qp.ok_or_else(|| {
                NormalFormError::LastLayerNotElliptic("Ã_p = h ⊗ Y exactly, fields dependent everywhere".into())
            })?;
            let rest = [
                [&t[0][0] - &(&hfull[0] * alpha), &t[0][1] - &(&hfull[0] * beta)],
                [&t[1][0] - &(&hfull[1] * alpha), &t[1][1] - &(&hfull[1] * beta)],
            ];
            let hat = mat_map(&rest, |e| e.unshift(Var::X1, qp).expect("lower levels removed"));
            if at0(&det2(&hat)).is_zero() {
                return Err(NormalFormError::LastLayerNotElliptic("det Â(0) = 0".into()));
            }
            Ok(build(
                qp,
                CaseData::IIb(CaseIIbData {
                    subcase: *subcase,
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    h: hfull,
                    hat,
                }),
            ))
        }
    }
}

/// The `q = p` reading of a block whose `M(0)` is invertible: Case I with
/// `ã23, ã33` the full ξ3 column and no `x1` power in front of it.
pub fn degenerate_case_i(pf: &PartialForm, trunc: u32) -> Result<StandardForm, NormalFormError> {
    let mut pf = pf.clone();
    if at0(&at_x1_zero(&pf.tilde_a_p[0][0])).is_zero() {
        pf = pf.swap();
    }
    let t = &pf.tilde_a_p;
    let alpha = at_x1_zero(&t[0][0]);
    let lambda_alpha = at_x1_zero(&t[1][0]);
    if at0(&alpha).is_zero() {
        return Err(NormalFormError::NotCaseI);
    }
    let a22 = (&t[0][0] - &alpha).unshift(Var::X1, 1).unwrap();
    let a32 = (&t[1][0] - &lambda_alpha).unshift(Var::X1, 1).unwrap();
    let lambda = lambda_series(&alpha, &lambda_alpha, trunc)?;
    Ok(StandardForm {
        p: pf.p,
        q: pf.p,
        a21: pf.a21.clone(),
        a31: pf.a31.clone(),
        swapped: pf.swapped,
        case: CaseData::I(CaseIData {
            alpha,
            lambda_alpha,
            lambda,
            lambda_trunc: trunc,
            a22,
            a32,
            a23: t[0][1].clone(),
            a33: t[1][1].clone(),
        }),
    })
}
