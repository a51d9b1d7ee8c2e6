use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{det2, CaseData, CaseTag, ClassificationReport, NormalFormError, StandardForm};
use crate::symcore::{int, rat, Poly, Rational, Series1, SeriesVar, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proven,
    VerifiedOnSamples,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proven => write!(f, "proven"),
            Verdict::VerifiedOnSamples => write!(f, "verified_on_samples"),
            Verdict::Violated => write!(f, "violated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionVerdict {
    pub id: String,
    pub verdict: Verdict,
    /// A point or value demonstrating a violation, when there is one.
    pub witness: Option<String>,
    pub detail: String,
}

impl ConditionVerdict {
    pub(crate) fn new(id: &str, verdict: Verdict, witness: Option<String>, detail: String) -> Self {
        ConditionVerdict { id: id.to_string(), verdict, witness, detail }
    }
}

/// Cubical sample grid `{-w, …, w}³` with `n` points per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGrid {
    pub half_width: Rational,
    pub n: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { half_width: rat(1, 4), n: 11 }
    }
}

impl SampleGrid {
    pub fn axis(&self) -> Vec<Rational> {
        if self.n <= 1 {
            return vec![Rational::zero()];
        }
        let step = &self.half_width * int(2) / int(self.n as i64 - 1);
        (0..self.n).map(|k| -&self.half_width + &step * int(k as i64)).collect()
    }
}

pub(crate) fn fmt_point(p: &[Rational; 3]) -> String {
    format!("({}, {}, {})", p[0], p[1], p[2])
}

/// The quantity that must not vanish off `{x1 = 0}` for the fields to be
/// independent there.
///
/// Case I uses `α·(−λ ã23 + ã33) + x1 det Ã`, which is `α` times the
/// usual expression and therefore polynomial; Cases IIa/IIb use `det Ã_p`.
pub fn independence_expression(sf: &StandardForm) -> Poly {
    match &sf.case {
        CaseData::I(d) => {
            let lin = &(&d.alpha * &d.a33) - &(&d.lambda_alpha * &d.a23);
            &lin + &det2(&d.tilde()).shift(Var::X1, 1)
        }
        _ => det2(&sf.tilde_a_p()),
    }
}

/// Two-tier check of "`expr ≠ 0` whenever `x1 ≠ 0`" near the origin.
fn nonvanishing_off_x1(id: &str, expr: &Poly, grid: &SampleGrid) -> ConditionVerdict {
    let Some(m) = expr.ord_var(Var::X1) else {
        let w = [grid.axis().last().cloned().unwrap_or_else(|| rat(1, 20)), int(0), int(0)];
        return ConditionVerdict::new(id, Verdict::Violated, Some(fmt_point(&w)), "expression is identically 0".into());
    };
    let unit = expr.unshift(Var::X1, m).expect("ord divides");
    let u0 = unit.constant_term();
    if !u0.is_zero() {
        return ConditionVerdict::new(
            id,
            Verdict::Proven,
            None,
            format!("expression = x1^{m} · u with u(0) = {u0}"),
        );
    }
    // Smallest zero (max-norm, then lexicographic) on the grid off x1 = 0.
    let axis = grid.axis();
    let mut best: Option<(Rational, [Rational; 3])> = None;
    let mut count = 0usize;
    for a in &axis {
        if a.is_zero() {
            continue;
        }
        for b in &axis {
            for c in &axis {
                count += 1;
                let pt = [a.clone(), b.clone(), c.clone()];
                if unit.eval(&pt).is_zero() {
                    let norm = pt.iter().map(|v| v.abs()).max().unwrap();
                    if best.as_ref().map_or(true, |(n, _)| norm < *n) {
                        best = Some((norm, pt));
                    }
                }
            }
        }
    }
    match best {
        Some((_, pt)) => ConditionVerdict::new(
            id,
            Verdict::Violated,
            Some(fmt_point(&pt)),
            format!("expression {expr} vanishes at a sample point with x1 ≠ 0"),
        ),
        None => ConditionVerdict::new(
            id,
            Verdict::VerifiedOnSamples,
            None,
            format!("nonzero at {count} sample points in [-{w}, {w}]³ off x1 = 0", w = grid.half_width),
        ),
    }
}

fn exact_nonzero(id: &str, value: Rational, what: &str) -> ConditionVerdict {
    if value.is_zero() {
        ConditionVerdict::new(id, Verdict::Violated, Some("0".into()), format!("{what} = 0"))
    } else {
        ConditionVerdict::new(id, Verdict::Proven, None, format!("{what} = {value}"))
    }
}

/// Side conditions of the standard form: nonvanishing at the base point
/// (exact) and independence of the fields off `{x1 = 0}` (certificate or
/// samples).
pub fn check_th1_conditions(sf: &StandardForm, grid: &SampleGrid) -> Vec<ConditionVerdict> {
    let mut out = Vec::new();
    match &sf.case {
        CaseData::I(d) => {
            out.push(exact_nonzero("alpha_nonzero", d.alpha.constant_term(), "α(0)"));
            let v = (d.a23.constant_term(), d.a33.constant_term());
            let verdict = if v.0.is_zero() && v.1.is_zero() { Verdict::Violated } else { Verdict::Proven };
            out.push(ConditionVerdict::new(
                "last_layer_elliptic",
                verdict,
                None,
                format!("(ã23, ã33)(0) = ({}, {})", v.0, v.1),
            ));
        }
        CaseData::IIa(d) => {
            out.push(exact_nonzero("tilde_det_nonzero", det2(&d.tilde).constant_term(), "det Ã(0)"));
            out.push(exact_nonzero("hat_det_nonzero", det2(&d.hat).constant_term(), "det Â(0)"));
        }
        CaseData::IIb(d) => {
            out.push(exact_nonzero("h2_nonzero", d.h[0].constant_term(), "h2(0)"));
            out.push(exact_nonzero("hat_det_nonzero", det2(&d.hat).constant_term(), "det Â(0)"));
        }
    }
    out.push(nonvanishing_off_x1("independent_off_x1_zero", &independence_expression(sf), grid));
    out
}

/// Order of vanishing of the Case I degeneracy function along the
/// `x1`-bicharacteristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeR {
    pub r: u32,
    /// `E(t)` at `x̄' = 0`, truncated.
    pub series: Series1,
    pub truncation: u32,
    /// Order of `E` at a few nearby `x̄'` (`None` above truncation).
    pub nearby: Vec<([Rational; 2], Option<u32>)>,
}

fn degeneracy_poly(sf: &StandardForm, at: &[Rational; 2]) -> Result<Poly, NormalFormError> {
    let CaseData::I(d) = &sf.case else {
        return Err(NormalFormError::NotCaseI);
    };
    let restrict = |p: &Poly| p.eval_var(Var::X2, &at[0]).eval_var(Var::X3, &at[1]);
    let pt = [int(0), at[0].clone(), at[1].clone()];
    let alpha = d.alpha.eval(&pt);
    let lambda = d.lambda_alpha.eval(&pt) / &alpha;
    let e = &(&restrict(&d.a33) - &restrict(&d.a23).scale(&lambda))
        + &restrict(&det2(&d.tilde())).shift(Var::X1, 1).scale(&alpha.recip());
    Ok(e)
}

/// `E(t) = −λ(0) ã23(t, 0) + ã33(t, 0) + (t / α(0)) det Ã(t, 0)`, and
/// `r` its order at `t = 0`.
///
/// The unit prefactor `α / (α + t ã22)` that multiplies `E` along the
/// bicharacteristic is omitted; it cannot change the order.
pub fn compute_type_r(sf: &StandardForm, trunc: u32) -> Result<TypeR, NormalFormError> {
    let origin = [int(0), int(0)];
    let e = degeneracy_poly(sf, &origin)?;
    let series = Series1::from_coeffs(SeriesVar::T, e.coeffs_in(Var::X1), trunc as usize);
    let r = series.series_ord().ok_or(NormalFormError::AboveTruncation(trunc))? as u32;
    let h = rat(1, 10);
    let mut nearby = Vec::new();
    for at in [[h.clone(), int(0)], [-h.clone(), int(0)], [int(0), h.clone()], [int(0), -h.clone()]] {
        let e = degeneracy_poly(sf, &at)?;
        let s = Series1::from_coeffs(SeriesVar::T, e.coeffs_in(Var::X1), trunc as usize);
        nearby.push((at, s.series_ord().map(|k| k as u32)));
    }
    Ok(TypeR { r, series, truncation: trunc, nearby })
}

/// `q/p` for type `I_0`; `None` for every other case.
pub fn threshold_for(case: CaseTag, p: u32, q: u32, r: Option<u32>) -> Option<Rational> {
    (case == CaseTag::I && r == Some(0)).then(|| rat(q as i64, p as i64))
}

/// Gevrey threshold recorded in a report: `q/p` exactly for type `I_0`,
/// unknown otherwise.
pub fn gevrey_threshold(report: &ClassificationReport) -> Option<Rational> {
    match (report.case, report.p, report.q) {
        (Some(case), Some(p), Some(q)) => threshold_for(case, p, q, report.r),
        _ => None,
    }
}
