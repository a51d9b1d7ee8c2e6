//! Vector fields as first-order symbols `c1 ξ1 + c2 ξ2 + c3 ξ3`, their
//! brackets, the Hörmander bracket-generating check and the layer chain
//! cut out by iterated brackets.
//!
//! The Poisson bracket of two symbols linear in `ξ` coincides with the
//! symbol of the commutator of the underlying vector fields, so everything
//! here is phrased with commutators of derivations.

use std::collections::HashSet;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::symcore::{gcd, gcd_in_x1, Poly, Rational, SymError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldsError {
    #[error("bracket word must be nonempty with letters in 1..=3")]
    BadWord,
    #[error("not in standard form: {0}")]
    NotStandardForm(String),
    #[error("span dimension {dim} < 3 for all words up to length {max_len}")]
    HormanderFail { dim: usize, max_len: usize },
}

/// Symbol `c1(x) ξ1 + c2(x) ξ2 + c3(x) ξ3` of a vector field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldSymbol {
    pub c: [Poly; 3],
}

impl FieldSymbol {
    pub fn new(c1: Poly, c2: Poly, c3: Poly) -> Self {
        FieldSymbol { c: [c1, c2, c3] }
    }

    pub fn zero() -> Self {
        FieldSymbol::default()
    }

    /// The coordinate field `ξ_j`.
    pub fn xi(j: Var) -> Self {
        let mut f = FieldSymbol::zero();
        f.c[j.index()] = Poly::one();
        f
    }

    pub fn coeff(&self, j: Var) -> &Poly {
        &self.c[j.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Poly::is_zero)
    }

    /// The field acting on a function as a derivation: `Σ c_j ∂_j a`.
    pub fn apply(&self, a: &Poly) -> Poly {
        let mut out = Poly::zero();
        for v in Var::ALL {
            if !self.c[v.index()].is_zero() {
                out += &self.c[v.index()] * &a.diff(v);
            }
        }
        out
    }

    pub fn scale(&self, a: &Poly) -> FieldSymbol {
        FieldSymbol { c: self.c.clone().map(|ci| &ci * a) }
    }

    pub fn add(&self, other: &FieldSymbol) -> FieldSymbol {
        FieldSymbol {
            c: [0, 1, 2].map(|i| &self.c[i] + &other.c[i]),
        }
    }

    pub fn sub(&self, other: &FieldSymbol) -> FieldSymbol {
        FieldSymbol {
            c: [0, 1, 2].map(|i| &self.c[i] - &other.c[i]),
        }
    }

    pub fn neg(&self) -> FieldSymbol {
        FieldSymbol { c: self.c.clone().map(|ci| -ci) }
    }

    /// Coefficientwise `∂_v`; for `v = x1` this is the bracket with `ξ1`.
    pub fn diff(&self, v: Var) -> FieldSymbol {
        FieldSymbol { c: self.c.clone().map(|ci| ci.diff(v)) }
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> FieldSymbol {
        FieldSymbol {
            c: [f(&self.c[0]), f(&self.c[1]), f(&self.c[2])],
        }
    }

    pub fn eval(&self, point: &[Rational; 3]) -> [Rational; 3] {
        [0, 1, 2].map(|i| self.c[i].eval(point))
    }
}

/// Prints as `(c1)*D1 + (c2)*D2 + ...`, which the spec parser reads back.
impl fmt::Display for FieldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if ci.is_one() {
                write!(f, "D{}", i + 1)?;
            } else {
                write!(f, "({ci})*D{}", i + 1)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Commutator symbol: coefficient `i` is `Σ_j (F_j ∂_j G_i − G_j ∂_j F_i)`.
pub fn bracket(f: &FieldSymbol, g: &FieldSymbol) -> FieldSymbol {
    FieldSymbol {
        c: [0, 1, 2].map(|i| &f.apply(&g.c[i]) - &g.apply(&f.c[i])),
    }
}

/// Multi-index `I = (i1, …, ik)` of an iterated bracket.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BracketWord(Vec<u8>);

impl BracketWord {
    pub fn new(indices: Vec<u8>) -> Result<Self, FieldsError> {
        if indices.is_empty() || indices.iter().any(|&i| !(1..=3).contains(&i)) {
            return Err(FieldsError::BadWord);
        }
        Ok(BracketWord(indices))
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::str::FromStr for BracketWord {
    type Err = FieldsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let idx: Result<Vec<u8>, _> = s.split(',').map(|t| t.trim().parse::<u8>()).collect();
        BracketWord::new(idx.map_err(|_| FieldsError::BadWord)?)
    }
}

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Characteristic direction at the base point: `sign · e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Codirection {
    pub axis: Var,
    pub positive: bool,
}

impl Default for Codirection {
    fn default() -> Self {
        Codirection { axis: Var::X3, positive: true }
    }
}

impl fmt::Display for Codirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.positive { "" } else { "-" };
        write!(f, "{sign}e{}", self.axis.number())
    }
}

/// The operator `X1² + X2² + X3²` together with the characteristic point
/// it is studied at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSpec {
    pub fields: [FieldSymbol; 3],
    pub base_point: [Rational; 3],
    pub codirection: Codirection,
}

impl OperatorSpec {
    pub fn new(x1: FieldSymbol, x2: FieldSymbol, x3: FieldSymbol) -> Self {
        OperatorSpec {
            fields: [x1, x2, x3],
            base_point: [Rational::zero(), Rational::zero(), Rational::zero()],
            codirection: Codirection::default(),
        }
    }

    /// `ξ1, x1^{p-1} ξ2, x1^{q-1} ξ3`.
    pub fn oleinik_radkevic(p: u32, q: u32) -> Self {
        let x1 = FieldSymbol::xi(Var::X1);
        let x2 = FieldSymbol::xi(Var::X2).scale(&Poly::var_pow(Var::X1, p - 1));
        let x3 = FieldSymbol::xi(Var::X3).scale(&Poly::var_pow(Var::X1, q - 1));
        OperatorSpec::new(x1, x2, x3)
    }

    /// `X_j` for `j` in 1..=3.
    pub fn field(&self, j: u8) -> &FieldSymbol {
        &self.fields[(j - 1) as usize]
    }

    /// `X1 = ξ1` exactly.
    pub fn x1_is_d1(&self) -> bool {
        self.fields[0] == FieldSymbol::xi(Var::X1)
    }

    /// The ξ'-block `[[a22, a23], [a32, a33]]`.
    pub fn xi_prime_block(&self) -> [[Poly; 2]; 2] {
        let f = &self.fields;
        [
            [f[1].c[1].clone(), f[1].c[2].clone()],
            [f[2].c[1].clone(), f[2].c[2].clone()],
        ]
    }

    /// Moves the base point to the origin and the codirection to `±e3`.
    ///
    /// Codirection `±e2` is handled by exchanging `x2` and `x3` (together
    /// with `ξ2`, `ξ3`); `±e1` is returned unchanged since it cannot be a
    /// characteristic direction once `X1 = ξ1`.
    pub fn normalized(&self) -> OperatorSpec {
        let shift = |p: &Poly| {
            let mut out = p.clone();
            for v in Var::ALL {
                let b = &self.base_point[v.index()];
                if !b.is_zero() {
                    out = out.substitute(v, &(&Poly::var(v) + &Poly::constant(b.clone())));
                }
            }
            out
        };
        let mut fields = self.fields.clone().map(|f| f.map(shift));
        let mut codirection = self.codirection;
        if codirection.axis == Var::X2 {
            let perm = [Var::X1, Var::X3, Var::X2];
            fields = fields.map(|f| {
                let g = f.map(|p| p.permute(perm));
                FieldSymbol::new(g.c[0].clone(), g.c[2].clone(), g.c[1].clone())
            });
            codirection.axis = Var::X3;
        }
        let zero = Rational::zero();
        OperatorSpec {
            fields,
            base_point: [zero.clone(), zero.clone(), zero],
            codirection,
        }
    }
}

/// Right-nested iterated bracket `{X_{i1}, {X_{i2}, … X_{ik}}}`.
pub fn iterated_bracket(spec: &OperatorSpec, word: &BracketWord) -> FieldSymbol {
    let idx = word.indices();
    let mut acc = spec.field(idx[idx.len() - 1]).clone();
    for &i in idx[..idx.len() - 1].iter().rev() {
        acc = bracket(spec.field(i), &acc);
    }
    acc
}

/// All distinct nonzero symbols `X_I` with `|I| = len`, for `len = 1..=max_len`.
///
/// Level `h` is obtained by bracketing each `X_i` with the level `h − 1`
/// symbols, which is exactly the right-nested convention; repeated symbols
/// are dropped since they cannot contribute anything new.
pub fn bracket_levels(spec: &OperatorSpec, max_len: usize) -> Vec<Vec<FieldSymbol>> {
    let mut levels: Vec<Vec<FieldSymbol>> = Vec::new();
    let mut seen: HashSet<FieldSymbol> = HashSet::new();
    let mut current: Vec<FieldSymbol> = Vec::new();
    for f in &spec.fields {
        if !f.is_zero() && seen.insert(f.clone()) {
            current.push(f.clone());
        }
    }
    if max_len == 0 {
        return levels;
    }
    levels.push(current.clone());
    for _ in 1..max_len {
        let mut next = Vec::new();
        for x in &spec.fields {
            for f in &current {
                let b = bracket(x, f);
                if !b.is_zero() && seen.insert(b.clone()) {
                    next.push(b);
                }
            }
        }
        levels.push(next.clone());
        current = next;
    }
    levels
}

/// Rank over `Q` of a list of rational vectors.
pub fn rank_q<const N: usize>(rows: &[[Rational; N]]) -> usize {
    let mut m: Vec<[Rational; N]> = rows.to_vec();
    let mut rank = 0;
    for col in 0..N {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let pv = m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = &m[r][col] / &pv;
                for c in col..N {
                    let delta = &factor * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Smallest `m ≤ max_len` such that the values at `point` of all `X_I` with
/// `|I| ≤ m` span `R³`.
pub fn hormander_check(spec: &OperatorSpec, point: &[Rational; 3], max_len: usize) -> Result<usize, FieldsError> {
    let levels = bracket_levels(spec, max_len);
    let mut rows: Vec<[Rational; 3]> = Vec::new();
    let mut dim = 0;
    for (h, level) in levels.iter().enumerate() {
        rows.extend(level.iter().map(|f| f.eval(point)));
        dim = rank_q(&rows);
        if dim == 3 {
            return Ok(h + 1);
        }
    }
    Err(FieldsError::HormanderFail { dim, max_len })
}

/// Per-point outcome of the grid variant of [`hormander_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridHormander {
    pub points: usize,
    /// Largest minimal length over the grid.
    pub worst: usize,
    /// First grid point where the check failed, if any.
    pub failure: Option<[Rational; 3]>,
}

/// Runs [`hormander_check`] at the `n³` points `center + k·step` with
/// `k ∈ {−(n−1)/2, …}` in each coordinate.
pub fn hormander_check_grid(
    spec: &OperatorSpec,
    center: &[Rational; 3],
    step: &Rational,
    n: usize,
    max_len: usize,
) -> GridHormander {
    let offsets: Vec<Rational> = (0..n)
        .map(|k| step * Rational::from_integer((k as i64 - (n as i64 - 1) / 2).into()))
        .collect();
    let mut worst = 0;
    let mut count = 0;
    for a in &offsets {
        for b in &offsets {
            for c in &offsets {
                let pt = [&center[0] + a, &center[1] + b, &center[2] + c];
                count += 1;
                match hormander_check(spec, &pt, max_len) {
                    Ok(m) => worst = worst.max(m),
                    Err(_) => {
                        return GridHormander { points: count, worst, failure: Some(pt) };
                    }
                }
            }
        }
    }
    GridHormander { points: count, worst, failure: None }
}

/// Shape of a layer `Σ_h` near the base point `(0; e3)`, inside
/// `{x1 = 0, ξ1 = 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerShape {
    /// No further equations: the layer is all of `{x1 = 0, ξ1 = 0}`.
    Whole,
    /// `base · (α ξ2 + β ξ3) = 0`; `base` is one unless the generators
    /// share a factor in `x'`.
    Fiber { alpha: Poly, beta: Poly, base: Poly },
    /// `c(x') = 0`, with `ξ'` free.
    Base { equation: Poly },
    /// Only the zero section remains near the base point.
    ZeroSection,
    /// Several independent equations not in one of the shapes above.
    Other { equations: Vec<[Poly; 2]> },
}

impl fmt::Display for LayerShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerShape::Whole => write!(f, "whole"),
            LayerShape::Fiber { alpha, beta, base } => {
                let lin = FieldSymbol::new(Poly::zero(), alpha.clone(), beta.clone());
                let lin = lin.to_string().replace('D', "xi");
                if base.is_one() {
                    write!(f, "{lin} = 0")
                } else {
                    write!(f, "({base})*({lin}) = 0")
                }
            }
            LayerShape::Base { equation } => write!(f, "{equation} = 0"),
            LayerShape::ZeroSection => write!(f, "zero section"),
            LayerShape::Other { equations } => {
                let parts: Vec<String> = equations
                    .iter()
                    .map(|[a, b]| {
                        let s = FieldSymbol::new(Poly::zero(), a.clone(), b.clone()).to_string();
                        format!("{} = 0", s.replace('D', "xi"))
                    })
                    .collect();
                write!(f, "{}", parts.join(", "))
            }
        }
    }
}

/// How `Σ_h` relates to `Σ_{h−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerChange {
    Equal,
    NewEquation,
    Empty,
}

impl fmt::Display for LayerChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerChange::Equal => write!(f, "equal"),
            LayerChange::NewEquation => write!(f, "new equation"),
            LayerChange::Empty => write!(f, "empty"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumLayer {
    pub level: usize,
    pub shape: LayerShape,
    pub change: LayerChange,
}

/// Writes a rank-one matrix with rows `r_i` as `r_i = h_i · (α, β)` with
/// `(α, β)` coprime. Returns `None` if some 2×2 minor is nonzero or every
/// row vanishes.
pub fn rank_one_factor(rows: &[[Poly; 2]]) -> Option<(Vec<Poly>, Poly, Poly)> {
    let first = rows.iter().find(|r| !r[0].is_zero() || !r[1].is_zero())?;
    for r in rows {
        if !(&(&first[0] * &r[1]) - &(&first[1] * &r[0])).is_zero() {
            return None;
        }
    }
    let g = gcd(&first[0], &first[1]);
    let mut alpha = first[0].div_exact(&g)?;
    let mut beta = first[1].div_exact(&g)?;
    // Normalise so the first nonzero of (α, β) is monic.
    let lead = if alpha.is_zero() { beta.monic() } else { alpha.monic() };
    let scale = if alpha.is_zero() {
        beta.div_exact(&lead)?
    } else {
        alpha.div_exact(&lead)?
    };
    alpha = alpha.div_exact(&scale)?;
    beta = beta.div_exact(&scale)?;
    let mut h = Vec::with_capacity(rows.len());
    for r in rows {
        let hi = if !alpha.is_zero() {
            r[0].div_exact(&alpha)?
        } else {
            r[1].div_exact(&beta)?
        };
        h.push(hi);
    }
    Some((h, alpha, beta))
}

fn layer_shape(rows: &[[Poly; 2]]) -> LayerShape {
    let rows: Vec<[Poly; 2]> = rows
        .iter()
        .filter(|r| !r[0].is_zero() || !r[1].is_zero())
        .cloned()
        .collect();
    if rows.is_empty() {
        return LayerShape::Whole;
    }
    let origin = [Rational::zero(), Rational::zero(), Rational::zero()];
    let at0: Vec<[Rational; 2]> = rows.iter().map(|r| [r[0].eval(&origin), r[1].eval(&origin)]).collect();
    if rank_q(&at0) == 2 {
        return LayerShape::ZeroSection;
    }
    let entries: Vec<Poly> = rows.iter().flat_map(|r| r.iter().cloned()).collect();
    let content = entries.iter().fold(Poly::zero(), |acc, e| gcd(&acc, e));
    let reduced: Vec<[Poly; 2]> = rows
        .iter()
        .map(|r| [r[0].div_exact(&content).unwrap(), r[1].div_exact(&content).unwrap()])
        .collect();
    let red0: Vec<[Rational; 2]> = reduced.iter().map(|r| [r[0].eval(&origin), r[1].eval(&origin)]).collect();
    if rank_q(&red0) == 2 {
        return LayerShape::Base { equation: content };
    }
    if let Some((_, alpha, beta)) = rank_one_factor(&reduced) {
        return LayerShape::Fiber { alpha, beta, base: content };
    }
    let mut equations = Vec::new();
    for r in &reduced {
        if !equations.contains(r) {
            equations.push(r.clone());
        }
    }
    LayerShape::Other { equations }
}

/// Layers `Σ_1, …, Σ_{max_level}` of a spec in standard form.
///
/// Each generator `X_I` with `|I| ≤ h` is reduced modulo `x1 = 0, ξ1 = 0`,
/// leaving the linear form `c2(0, x') ξ2 + c3(0, x') ξ3`. This is exact for
/// standard forms but is not a general stratification algorithm.
pub fn stratification(spec: &OperatorSpec, max_level: usize) -> Result<Vec<StratumLayer>, FieldsError> {
    let spec = spec.normalized();
    check_standard_form(&spec)?;
    let levels = bracket_levels(&spec, max_level);
    let mut rows: Vec<[Poly; 2]> = Vec::new();
    let mut prev = LayerShape::Whole;
    let mut out = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        for f in level {
            let r = [
                f.c[1].eval_var(Var::X1, &Rational::zero()),
                f.c[2].eval_var(Var::X1, &Rational::zero()),
            ];
            if (!r[0].is_zero() || !r[1].is_zero()) && !rows.contains(&r) {
                rows.push(r);
            }
        }
        let shape = layer_shape(&rows);
        let change = if shape == LayerShape::ZeroSection {
            LayerChange::Empty
        } else if shape == prev {
            LayerChange::Equal
        } else {
            LayerChange::NewEquation
        };
        prev = shape.clone();
        out.push(StratumLayer { level: i + 1, shape, change });
    }
    Ok(out)
}

/// `X1 = ξ1` and the characteristic set already straightened to `x1 = 0`.
pub fn check_standard_form(spec: &OperatorSpec) -> Result<(), FieldsError> {
    if !spec.x1_is_d1() {
        return Err(FieldsError::NotStandardForm("X1 is not D1".into()));
    }
    let block = spec.xi_prime_block();
    let entries: Vec<Poly> = block.iter().flat_map(|r| r.iter().cloned()).collect();
    match gcd_in_x1(&entries) {
        Err(SymError::AllZero) => Ok(()),
        Err(e) => Err(FieldsError::NotStandardForm(e.to_string())),
        Ok(g) => {
            let d = g.degree_in(Var::X1).unwrap_or(0);
            if g == Poly::var_pow(Var::X1, d) {
                Ok(())
            } else {
                Err(FieldsError::NotStandardForm(format!("characteristic factor {g} is not a power of x1")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::int;

    fn origin() -> [Rational; 3] {
        [int(0), int(0), int(0)]
    }

    #[test]
    fn bracket_with_d1_differentiates() {
        let d1 = FieldSymbol::xi(Var::X1);
        let g = FieldSymbol::xi(Var::X2).scale(&Poly::var(Var::X1));
        assert_eq!(bracket(&d1, &g), FieldSymbol::xi(Var::X2));
    }

    #[test]
    fn bracket_mixed() {
        // [x2 D1, x1 D2] = x2 D2 − x1 D1
        let f = FieldSymbol::xi(Var::X1).scale(&Poly::var(Var::X2));
        let g = FieldSymbol::xi(Var::X2).scale(&Poly::var(Var::X1));
        let expected = FieldSymbol::new(-Poly::var(Var::X1), Poly::var(Var::X2), Poly::zero());
        assert_eq!(bracket(&f, &g), expected);
    }

    #[test]
    fn iterated_words_on_model() {
        let spec = OperatorSpec::oleinik_radkevic(2, 3);
        let w = |s: &str| s.parse::<BracketWord>().unwrap();
        assert_eq!(iterated_bracket(&spec, &w("1,2")), FieldSymbol::xi(Var::X2));
        assert_eq!(
            iterated_bracket(&spec, &w("1,1,3")),
            FieldSymbol::xi(Var::X3).scale(&Poly::from_int(2))
        );
        assert_eq!(&iterated_bracket(&spec, &w("2")), spec.field(2));
        assert!("".parse::<BracketWord>().is_err());
        assert!("1,4".parse::<BracketWord>().is_err());
    }

    #[test]
    fn hormander_numbers() {
        let or23 = OperatorSpec::oleinik_radkevic(2, 3);
        assert_eq!(hormander_check(&or23, &origin(), 6), Ok(3));
        let flat = OperatorSpec::oleinik_radkevic(1, 1);
        assert_eq!(hormander_check(&flat, &origin(), 1), Ok(1));
        let or25 = OperatorSpec::oleinik_radkevic(2, 5);
        assert_eq!(
            hormander_check(&or25, &origin(), 3),
            Err(FieldsError::HormanderFail { dim: 2, max_len: 3 })
        );
    }

    #[test]
    fn model_chain() {
        let layers = stratification(&OperatorSpec::oleinik_radkevic(2, 5), 5).unwrap();
        let changes: Vec<LayerChange> = layers.iter().map(|l| l.change).collect();
        use LayerChange::*;
        assert_eq!(changes, vec![Equal, NewEquation, Equal, Equal, Empty]);
        assert_eq!(layers[1].shape.to_string(), "xi2 = 0");
    }

    #[test]
    fn rank_one_factorisation() {
        let x2 = Poly::var(Var::X2);
        let x3 = Poly::var(Var::X3);
        let rows = [[&x2 * &x3, x3.pow(2)], [x2.clone(), x3.clone()]];
        let (h, a, b) = rank_one_factor(&rows).unwrap();
        assert_eq!((a, b), (x2, x3.clone()));
        assert_eq!(h, vec![x3, Poly::one()]);
    }
}
