//! Line-oriented operator spec files.
//!
//! ```text
//! # Oleinik–Radkevič model, p = 2, q = 5
//! name: or_p2_q5
//! expect: case=I p=2 q=5 r=0 threshold=5/2
//! X1 = D1
//! X2 = x1*D2
//! X3 = x1^4*D3
//! ```
//!
//! Optional headers: `vars: a b c` renames the coordinates, `point: 0, 1/2, 0`
//! sets the base point and `codirection: -e2` the covector direction.
//! `D1..D3` stand for the symbols `ξ1..ξ3` and must appear linearly.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::fields::{Codirection, FieldSymbol, OperatorSpec};
use crate::normalform::CaseTag;
use crate::symcore::{Poly, Rational, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Parse { line: usize, col: usize, expected: Vec<String>, found: String },
    #[error("{line}:{col}: product of two derivative symbols; fields must be linear in D")]
    NonlinearInD { line: usize, col: usize },
    #[error("{line}:{col}: {msg}")]
    Invalid { line: usize, col: usize, msg: String },
    #[error("missing field X{0}")]
    MissingField(u8),
}

impl SpecError {
    pub fn line(&self) -> Option<usize> {
        match self {
            SpecError::Parse { line, .. } | SpecError::NonlinearInD { line, .. } | SpecError::Invalid { line, .. } => {
                Some(*line)
            }
            SpecError::MissingField(_) => None,
        }
    }
}

/// Values declared on an `expect:` line. `None` means "not declared";
/// `Some(None)` for `r`/`threshold` means "declared unknown".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expectation {
    pub case: Option<CaseTag>,
    pub subcase: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub r: Option<Option<u32>>,
    pub threshold: Option<Option<Rational>>,
    pub status: Option<String>,
}

impl Expectation {
    pub fn is_empty(&self) -> bool {
        *self == Expectation::default()
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(s) = &self.status {
            parts.push(format!("status={s}"));
        }
        if let Some(c) = self.case {
            parts.push(format!("case={c}"));
        }
        if let Some(s) = &self.subcase {
            parts.push(format!("subcase={s}"));
        }
        if let Some(p) = self.p {
            parts.push(format!("p={p}"));
        }
        if let Some(q) = self.q {
            parts.push(format!("q={q}"));
        }
        if let Some(r) = &self.r {
            parts.push(format!("r={}", r.map_or_else(|| "unknown".into(), |r| r.to_string())));
        }
        if let Some(t) = &self.threshold {
            parts.push(format!("threshold={}", t.as_ref().map_or_else(|| "unknown".into(), |t| t.to_string())));
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A parsed spec file. Equality ignores the source text.
#[derive(Debug, Clone)]
pub struct SpecDocument {
    pub source: String,
    pub name: Option<String>,
    pub expect: Expectation,
    pub spec: OperatorSpec,
    /// Coordinate names used in the source (`x1 x2 x3` unless renamed).
    pub vars: [String; 3],
}

impl PartialEq for SpecDocument {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.expect == other.expect && self.spec == other.spec
    }
}

impl SpecDocument {
    pub fn from_spec(name: Option<String>, spec: OperatorSpec) -> Self {
        let mut doc =
            SpecDocument { source: String::new(), name, expect: Expectation::default(), spec, vars: default_vars() };
        doc.source = doc.print();
        doc
    }

    /// Canonical text; `parse_spec(&doc.print())` reproduces `doc`.
    pub fn print(&self) -> String {
        let mut out = String::new();
        if let Some(n) = &self.name {
            out.push_str(&format!("name: {n}\n"));
        }
        if !self.expect.is_empty() {
            out.push_str(&format!("expect: {}\n", self.expect));
        }
        let bp = &self.spec.base_point;
        if bp.iter().any(|c| !c.is_zero()) {
            out.push_str(&format!("point: {}, {}, {}\n", bp[0], bp[1], bp[2]));
        }
        if self.spec.codirection != Codirection::default() {
            out.push_str(&format!("codirection: {}\n", self.spec.codirection));
        }
        for (j, f) in self.spec.fields.iter().enumerate() {
            out.push_str(&format!("X{} = {}\n", j + 1, print_field(f)));
        }
        out
    }
}

fn print_field(f: &FieldSymbol) -> String {
    let mut terms = Vec::new();
    for v in Var::ALL {
        let c = f.coeff(v);
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            terms.push(format!("D{}", v.number()));
        } else {
            terms.push(format!("({c})*D{}", v.number()));
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "'{n}'"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::End => write!(f, "end of line"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Lexer, SpecError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push((Tok::Num(s.parse().expect("digits")), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(SpecError::Parse {
                line,
                col,
                expected: vec!["number".into(), "variable".into(), "D1..D3".into(), "operator".into()],
                found: format!("'{c}'"),
            });
        }
    }
    toks.push((Tok::End, col0 + chars.len()));
    Ok(Lexer { toks, pos: 0, line })
}

/// `scalar + Σ d_i ξ_i`, the value of a subexpression.
#[derive(Debug, Clone)]
struct Value {
    scalar: Poly,
    d: [Poly; 3],
}

impl Value {
    fn scalar(p: Poly) -> Self {
        Value { scalar: p, d: [Poly::zero(), Poly::zero(), Poly::zero()] }
    }
    fn has_d(&self) -> bool {
        self.d.iter().any(|p| !p.is_zero())
    }
    fn add(&self, o: &Value) -> Value {
        Value {
            scalar: &self.scalar + &o.scalar,
            d: [&self.d[0] + &o.d[0], &self.d[1] + &o.d[1], &self.d[2] + &o.d[2]],
        }
    }
    fn neg(&self) -> Value {
        Value { scalar: -&self.scalar, d: [-&self.d[0], -&self.d[1], -&self.d[2]] }
    }
    fn scale(&self, s: &Poly) -> Value {
        Value { scalar: &self.scalar * s, d: [&self.d[0] * s, &self.d[1] * s, &self.d[2] * s] }
    }
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn col(&self) -> usize {
        self.toks[self.pos].1
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn error(&self, expected: &[&str]) -> SpecError {
        SpecError::Parse {
            line: self.line,
            col: self.col(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }
    fn expect_end(&self) -> Result<(), SpecError> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.error(&["'+'", "'-'", "'*'", "'/'", "end of line"])),
        }
    }

    fn expr(&mut self, vars: &[String; 3]) -> Result<Value, SpecError> {
        let mut acc = self.term(vars)?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.term(vars)?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.add(&self.term(vars)?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, vars: &[String; 3]) -> Result<Value, SpecError> {
        let mut acc = self.unary(vars)?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    let col = self.col();
                    let rhs = self.unary(vars)?;
                    acc = self.mul(&acc, &rhs, col)?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let col = self.col();
                    let rhs = self.unary(vars)?;
                    if rhs.has_d() || !rhs.scalar.is_constant() {
                        return Err(SpecError::Invalid {
                            line: self.line,
                            col,
                            msg: "only division by a constant is supported".into(),
                        });
                    }
                    let c = rhs.scalar.constant_term();
                    if c.is_zero() {
                        return Err(SpecError::Invalid { line: self.line, col, msg: "division by zero".into() });
                    }
                    acc = acc.scale(&Poly::constant(c.recip()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn mul(&self, a: &Value, b: &Value, col: usize) -> Result<Value, SpecError> {
        if a.has_d() && b.has_d() {
            return Err(SpecError::NonlinearInD { line: self.line, col });
        }
        if b.has_d() {
            return self.mul(b, a, col);
        }
        Ok(a.scale(&b.scalar))
    }

    fn unary(&mut self, vars: &[String; 3]) -> Result<Value, SpecError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(self.unary(vars)?.neg())
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary(vars)
            }
            _ => self.power(vars),
        }
    }

    fn power(&mut self, vars: &[String; 3]) -> Result<Value, SpecError> {
        let base = self.atom(vars)?;
        if self.peek() != &Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let col = self.col();
        let Tok::Num(n) = self.peek().clone() else {
            return Err(self.error(&["exponent"]));
        };
        self.bump();
        let k: u32 = n.try_into().map_err(|_| SpecError::Invalid {
            line: self.line,
            col,
            msg: "exponent too large".into(),
        })?;
        if base.has_d() {
            return match k {
                0 => Ok(Value::scalar(Poly::one())),
                1 => Ok(base),
                _ => Err(SpecError::NonlinearInD { line: self.line, col }),
            };
        }
        Ok(Value::scalar(base.scalar.pow(k)))
    }

    fn atom(&mut self, vars: &[String; 3]) -> Result<Value, SpecError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Value::scalar(Poly::constant(Rational::from_integer(n))))
            }
            Tok::Ident(id) => {
                if let Some(k) = vars.iter().position(|v| *v == id) {
                    self.bump();
                    return Ok(Value::scalar(Poly::var(Var::ALL[k])));
                }
                if let Some(k) = ["D1", "D2", "D3"].iter().position(|d| *d == id) {
                    self.bump();
                    let mut v = Value::scalar(Poly::zero());
                    v.d[k] = Poly::one();
                    return Ok(v);
                }
                Err(self.error(&["number", "variable", "D1..D3", "'('"]))
            }
            Tok::Sym('(') => {
                self.bump();
                let v = self.expr(vars)?;
                if self.peek() != &Tok::Sym(')') {
                    return Err(self.error(&["')'"]));
                }
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(&["number", "variable", "D1..D3", "'('"])),
        }
    }
}

fn default_vars() -> [String; 3] {
    ["x1".to_string(), "x2".to_string(), "x3".to_string()]
}

/// Parses a rational scalar expression such as `-3/4` or `1/2 + 1`.
fn parse_scalar(text: &str, line: usize, col: usize) -> Result<Rational, SpecError> {
    let mut lx = lex(text, line, col)?;
    let v = lx.expr(&default_vars())?;
    lx.expect_end()?;
    if v.has_d() || !v.scalar.is_constant() {
        return Err(SpecError::Invalid { line, col, msg: "expected a rational constant".into() });
    }
    Ok(v.scalar.constant_term())
}

fn parse_codirection(text: &str, line: usize, col: usize) -> Result<Codirection, SpecError> {
    let t = text.trim();
    let (positive, rest) = match t.strip_prefix('-') {
        Some(r) => (false, r),
        None => (true, t.strip_prefix('+').unwrap_or(t)),
    };
    let axis = match rest {
        "e1" => Var::X1,
        "e2" => Var::X2,
        "e3" => Var::X3,
        _ => {
            return Err(SpecError::Parse {
                line,
                col,
                expected: vec!["e2".into(), "e3".into(), "-e2".into(), "-e3".into()],
                found: format!("'{t}'"),
            })
        }
    };
    Ok(Codirection { axis, positive })
}

fn parse_expect(text: &str, line: usize, col: usize) -> Result<Expectation, SpecError> {
    let mut e = Expectation::default();
    let bad = |msg: String| SpecError::Invalid { line, col, msg };
    for item in text.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("expected key=value, found '{item}'")))?;
        let num = |v: &str| v.parse::<u32>().map_err(|_| bad(format!("bad integer '{v}' for {k}")));
        match k {
            "case" => e.case = Some(v.parse().map_err(bad)?),
            "subcase" => e.subcase = Some(v.to_string()),
            "status" => e.status = Some(v.to_string()),
            "p" => e.p = Some(num(v)?),
            "q" => e.q = Some(num(v)?),
            "r" => e.r = Some(if v == "unknown" { None } else { Some(num(v)?) }),
            "threshold" => {
                e.threshold = Some(if v == "unknown" { None } else { Some(parse_scalar(v, line, col)?) })
            }
            _ => return Err(bad(format!("unknown expectation key '{k}'"))),
        }
    }
    Ok(e)
}

fn field_at(text: &str, vars: &[String; 3], line: usize, col: usize) -> Result<FieldSymbol, SpecError> {
    let mut lx = lex(text, line, col)?;
    let v = lx.expr(vars)?;
    lx.expect_end()?;
    if !v.scalar.is_zero() {
        return Err(SpecError::Invalid { line, col, msg: format!("term without a derivative symbol: {}", v.scalar) });
    }
    let [a, b, c] = v.d;
    Ok(FieldSymbol::new(a, b, c))
}

/// Parses a single field expression such as `x1*D2 + x1^2*D3`.
pub fn parse_field(text: &str, vars: &[String; 3]) -> Result<FieldSymbol, SpecError> {
    field_at(text, vars, 1, 1)
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    let mut name = None;
    let mut expect = Expectation::default();
    let mut vars = default_vars();
    let mut point = None;
    let mut codirection = Codirection::default();
    let mut fields: [Option<FieldSymbol>; 3] = [None, None, None];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let trimmed = content.trim();
        if let Some((key, rest)) = trimmed.split_once(':') {
            let col = indent + key.len() + 2;
            match key.trim() {
                "name" => name = Some(rest.trim().to_string()),
                "expect" => expect = parse_expect(rest, line, col)?,
                "vars" => {
                    let v: Vec<&str> = rest.split_whitespace().collect();
                    let valid = |s: &str| {
                        s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                            && !["D1", "D2", "D3"].contains(&s)
                    };
                    if v.len() != 3 || !v.iter().all(|s| valid(s)) {
                        return Err(SpecError::Invalid { line, col, msg: "vars needs three identifiers".into() });
                    }
                    vars = [v[0].to_string(), v[1].to_string(), v[2].to_string()];
                }
                "point" => {
                    let parts: Vec<&str> = rest.split(',').collect();
                    if parts.len() != 3 {
                        return Err(SpecError::Invalid { line, col, msg: "point needs three coordinates".into() });
                    }
                    point = Some([
                        parse_scalar(parts[0], line, col)?,
                        parse_scalar(parts[1], line, col)?,
                        parse_scalar(parts[2], line, col)?,
                    ]);
                }
                "codirection" => codirection = parse_codirection(rest, line, col)?,
                other => {
                    return Err(SpecError::Parse {
                        line,
                        col: indent + 1,
                        expected: ["name", "expect", "vars", "point", "codirection", "X1", "X2", "X3"]
                            .iter()
                            .map(|s| s.to_string())
                            .collect(),
                        found: format!("'{other}'"),
                    })
                }
            }
            continue;
        }
        let Some((lhs, rhs)) = trimmed.split_once('=') else {
            return Err(SpecError::Parse {
                line,
                col: indent + 1,
                expected: vec!["'Xj = <expr>'".into(), "header".into()],
                found: format!("'{trimmed}'"),
            });
        };
        let j = match lhs.trim() {
            "X1" => 0,
            "X2" => 1,
            "X3" => 2,
            other => {
                return Err(SpecError::Parse {
                    line,
                    col: indent + 1,
                    expected: vec!["X1".into(), "X2".into(), "X3".into()],
                    found: format!("'{other}'"),
                })
            }
        };
        if fields[j].is_some() {
            return Err(SpecError::Invalid { line, col: indent + 1, msg: format!("X{} defined twice", j + 1) });
        }
        fields[j] = Some(field_at(rhs, &vars, line, indent + lhs.len() + 2)?);
    }

    let [f1, f2, f3] = fields;
    let f1 = f1.ok_or(SpecError::MissingField(1))?;
    let f2 = f2.ok_or(SpecError::MissingField(2))?;
    let f3 = f3.ok_or(SpecError::MissingField(3))?;
    let mut spec = OperatorSpec::new(f1, f2, f3);
    if let Some(p) = point {
        spec.base_point = p;
    }
    spec.codirection = codirection;
    Ok(SpecDocument { source: text.to_string(), name, expect, spec, vars })
}
