//! Reduction of raw operator specs to standard form: the characteristic
//! manifold, the order `p` of the first bracket layer, case classification,
//! the order `q` of the elliptic layer, side conditions and the type index.

mod classify;
mod conditions;
mod report;
mod sigma;

pub use classify::{classify_case, compute_q, degenerate_case_i, ClassifiedCase};
pub use conditions::{
    check_th1_conditions, compute_type_r, gevrey_threshold, independence_expression, threshold_for,
    ConditionVerdict, SampleGrid, TypeR, Verdict,
};
pub use report::{
    CaseTag, ClassificationReport, LayerReport, RatioJson, StageOutcome, Status, Versions, SCHEMA_VERSION,
};
pub use sigma::{apply_cov, detect_sigma1, factor_p, CharManifold, PartialForm};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::fields::{FieldSymbol, OperatorSpec};
use crate::symcore::{Poly, SymError, Var};

/// 2×2 block of polynomial coefficients, rows indexed by `X2, X3` and
/// columns by `ξ2, ξ3`.
pub type Mat2 = [[Poly; 2]; 2];

pub fn det2(m: &Mat2) -> Poly {
    &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0])
}

pub(crate) fn mat_map(m: &Mat2, f: impl Fn(&Poly) -> Poly) -> Mat2 {
    [[f(&m[0][0]), f(&m[0][1])], [f(&m[1][0]), f(&m[1][1])]]
}

pub(crate) fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [&a[0][0] + &b[0][0], &a[0][1] + &b[0][1]],
        [&a[1][0] + &b[1][0], &a[1][1] + &b[1][1]],
    ]
}

pub(crate) fn at_x1_zero(p: &Poly) -> Poly {
    p.eval_var(Var::X1, &num_traits::Zero::zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormError {
    #[error("not in the expected form: {0}")]
    NotStandardForm(String),
    #[error("the ξ'-block has no common factor vanishing on a hypersurface")]
    NoCommonFactor,
    #[error("common factor {0} is not of the form (x1 - g(x2, x3))^k")]
    NonGraphFactor(String),
    #[error("base point is not characteristic: {0}")]
    NotCharacteristic(String),
    #[error("the ξ'-block vanishes identically; bracket condition fails")]
    InfiniteOrder,
    #[error("Σ_p is empty near the base point: {0}")]
    SigmaPEmpty(String),
    #[error("Σ_p is not straightened in the given coordinates: {0}")]
    NeedsCoordinateChange(String),
    #[error("last layer is not elliptic at the base point: {0}")]
    LastLayerNotElliptic(String),
    #[error("degeneracy order exceeds the truncation order {0}")]
    AboveTruncation(u32),
    #[error("operation requires Case I")]
    NotCaseI,
    #[error(transparent)]
    Sym(#[from] SymError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IIbSubcase {
    #[serde(rename = "b1")]
    B1,
    #[serde(rename = "b2")]
    B2,
}

impl fmt::Display for IIbSubcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IIbSubcase::B1 => write!(f, "b1"),
            IIbSubcase::B2 => write!(f, "b2"),
        }
    }
}

/// Case I: `Ã_p = [[α + x1 ã22, x1^{q-p} ã23], [λα + x1 ã32, x1^{q-p} ã33]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseIData {
    /// `α(x')`, nonzero at the origin.
    pub alpha: Poly,
    /// `λ(x') α(x')`, kept exactly.
    pub lambda_alpha: Poly,
    /// `λ = (λα)/α` as a series truncated below total degree `lambda_trunc`.
    pub lambda: Poly,
    pub lambda_trunc: u32,
    pub a22: Poly,
    pub a32: Poly,
    pub a23: Poly,
    pub a33: Poly,
}

impl CaseIData {
    /// `λ(0)`, exact.
    pub fn lambda0(&self) -> crate::symcore::Rational {
        self.lambda_alpha.constant_term() / self.alpha.constant_term()
    }

    /// `[[ã22, ã23], [ã32, ã33]]`.
    pub fn tilde(&self) -> Mat2 {
        [[self.a22.clone(), self.a23.clone()], [self.a32.clone(), self.a33.clone()]]
    }
}

/// Case IIa: `Ã_p = x_j^m Ã + x1^{q-p} Â`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseIIaData {
    pub j: Var,
    pub m: u32,
    pub tilde: Mat2,
    pub hat: Mat2,
}

/// Case IIb: `Ã_p = h ⊗ (α, β) + x1^{q-p} Â` with `Y = α ξ2 + β ξ3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseIIbData {
    pub subcase: IIbSubcase,
    pub alpha: Poly,
    pub beta: Poly,
    pub h: [Poly; 2],
    pub hat: Mat2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseData {
    I(CaseIData),
    IIa(CaseIIaData),
    IIb(CaseIIbData),
}

/// Fields in one of the standard shapes:
/// `X1 = ξ1`, `X_k = a_k1 ξ1 + x1^{p-1} (Ã_p ξ')_k` for `k = 2, 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardForm {
    pub p: u32,
    pub q: u32,
    pub a21: Poly,
    pub a31: Poly,
    /// `X2` and `X3` were exchanged to put the form in shape.
    pub swapped: bool,
    pub case: CaseData,
}

impl StandardForm {
    pub fn tag(&self) -> CaseTag {
        match &self.case {
            CaseData::I(_) => CaseTag::I,
            CaseData::IIa(_) => CaseTag::IIa,
            CaseData::IIb(_) => CaseTag::IIb,
        }
    }

    /// The block `Ã_p` rebuilt from the stored case data.
    pub fn tilde_a_p(&self) -> Mat2 {
        let qp = self.q - self.p;
        let x1 = Poly::var(Var::X1);
        match &self.case {
            CaseData::I(d) => [
                [&d.alpha + &(&x1 * &d.a22), d.a23.shift(Var::X1, qp)],
                [&d.lambda_alpha + &(&x1 * &d.a32), d.a33.shift(Var::X1, qp)],
            ],
            CaseData::IIa(d) => mat_add(
                &mat_map(&d.tilde, |e| e.shift(d.j, d.m)),
                &mat_map(&d.hat, |e| e.shift(Var::X1, qp)),
            ),
            CaseData::IIb(d) => {
                let rank_one = [
                    [&d.h[0] * &d.alpha, &d.h[0] * &d.beta],
                    [&d.h[1] * &d.alpha, &d.h[1] * &d.beta],
                ];
                mat_add(&rank_one, &mat_map(&d.hat, |e| e.shift(Var::X1, qp)))
            }
        }
    }

    /// Reassembles the three fields, undoing the `X2 ↔ X3` exchange.
    pub fn reassemble(&self) -> OperatorSpec {
        let block = mat_map(&self.tilde_a_p(), |e| e.shift(Var::X1, self.p - 1));
        let x2 = FieldSymbol::new(self.a21.clone(), block[0][0].clone(), block[0][1].clone());
        let x3 = FieldSymbol::new(self.a31.clone(), block[1][0].clone(), block[1][1].clone());
        let x1 = FieldSymbol::xi(Var::X1);
        if self.swapped {
            OperatorSpec::new(x1, x3, x2)
        } else {
            OperatorSpec::new(x1, x2, x3)
        }
    }
}
