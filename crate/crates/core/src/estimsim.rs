//! Exponent bookkeeping for the iterated a-priori estimate.
//!
//! Each derivation branch is abstracted to a [`NormTerm`]: the power `a` of
//! `x1` in front, the number `b` of derivatives that landed on the cutoff,
//! the `D3` deficit `cq` in units of `1/q`, and the move counters. A branch
//! ends once the remaining `D3` exponent, counting each leftover power of
//! `x1` as the `1/q` it will eventually cost, is used up. The quantity of
//! interest is the largest `K + L` (powers of `r` collected) over all
//! complete branches.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("illegal move {mv}: {reason}")]
    IllegalMove { mv: Move, reason: String },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("trace line {line}: {msg}")]
    BadTrace { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Move {
    /// Trade one power of `x1` for `1/q` of a `D3` derivative.
    Subelliptic,
    /// A derivative lands on the cutoff: one more `r`, `x1^{p-1}` in front.
    PhiStep,
    /// Combine `x1^{q-1}` with `D3` into a field of the basis.
    XCreate,
    /// Derivatives land on the coefficients: `ℓ'` more powers of `r`.
    RLoss(u64),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Subelliptic => write!(f, "SUBELLIPTIC"),
            Move::PhiStep => write!(f, "PHI_STEP"),
            Move::XCreate => write!(f, "X_CREATE"),
            Move::RLoss(l) => write!(f, "RLOSS({l})"),
        }
    }
}

impl FromStr for Move {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SUBELLIPTIC" => Ok(Move::Subelliptic),
            "PHI_STEP" => Ok(Move::PhiStep),
            "X_CREATE" => Ok(Move::XCreate),
            _ => s
                .strip_prefix("RLOSS(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.parse().ok())
                .filter(|&n| n >= 1)
                .map(Move::RLoss)
                .ok_or_else(|| format!("unknown move '{s}'")),
        }
    }
}

impl Move {
    /// Powers of `r` the move contributes to `K + L`.
    pub fn weight(&self) -> u64 {
        match self {
            Move::PhiStep => 1,
            Move::RLoss(l) => *l,
            _ => 0,
        }
    }
}

/// Fixed data of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimParams {
    pub p: u64,
    pub q: u64,
    pub r: u64,
    /// Upper bound on `b`, the derivatives spent on the cutoff.
    pub budget: u64,
}

impl SimParams {
    /// Budget `max(3, ⌈q/p⌉)·r`, or `factor·r` when a factor is given.
    pub fn new(p: u64, q: u64, r: u64, cutoff_factor: Option<u64>) -> Result<Self, SimError> {
        if p == 0 || q < p {
            return Err(SimError::BadParams(format!("need 1 ≤ p ≤ q, got p = {p}, q = {q}")));
        }
        if r == 0 {
            return Err(SimError::BadParams("need r ≥ 1".into()));
        }
        let factor = cutoff_factor.unwrap_or_else(|| 3.max(q.div_ceil(p)));
        Ok(SimParams { p, q, r, budget: factor * r })
    }

    /// `q·r`, the full `D3` exponent in units of `1/q`.
    pub fn full(&self) -> u64 {
        self.q * self.r
    }

    /// `⌈q r / p⌉`.
    pub fn bound(&self) -> u64 {
        (self.q * self.r).div_ceil(self.p)
    }
}

/// Exponent state of one norm term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NormTerm {
    /// Power of `x1`.
    pub a: u64,
    /// Derivatives on the cutoff.
    pub b: u64,
    /// `D3` deficit in units of `1/q`.
    pub cq: u64,
    pub r: u64,
    pub k: u64,
    pub s: u64,
    pub t: u64,
    pub l: u64,
}

impl NormTerm {
    pub fn initial(r: u64) -> Self {
        NormTerm { a: 0, b: 0, cq: 0, r, k: 0, s: 0, t: 0, l: 0 }
    }

    pub fn weight(&self) -> u64 {
        self.k + self.l
    }

    /// `cq + a = q ℓ + p k`: the deficit once leftover `x1` powers are paid.
    pub fn effective(&self) -> u64 {
        self.cq + self.a
    }

    /// Remaining `D3` exponent in units of `1/q`, ignoring leftover `x1`.
    pub fn remaining(&self, params: &SimParams) -> i64 {
        params.full() as i64 - self.cq as i64
    }

    pub fn is_terminal(&self, params: &SimParams) -> bool {
        self.effective() >= params.full()
    }

    /// Moves legal at this state, with `RLOSS(ℓ')` for every admissible `ℓ'`.
    pub fn legal_moves(&self, params: &SimParams) -> Vec<Move> {
        let mut out = Vec::new();
        if self.is_terminal(params) {
            return out;
        }
        if self.a >= 1 {
            out.push(Move::Subelliptic);
        }
        if self.b < params.budget {
            out.push(Move::PhiStep);
        }
        if params.q >= 2 && self.a >= params.q - 1 {
            out.push(Move::XCreate);
        }
        let room = (params.full() - self.effective()) / params.q;
        out.extend((1..=room).map(Move::RLoss));
        out
    }

    fn check(&self, params: &SimParams) -> Result<(), String> {
        let k_part = self.k * (params.p - 1);
        let used = self.s + self.t * (params.q - 1);
        if k_part < used || self.a != k_part - used {
            return Err(format!("a = {} but k(p-1) - s - t(q-1) = {}", self.a, k_part as i64 - used as i64));
        }
        if self.b != self.k {
            return Err(format!("b = {} differs from k = {}", self.b, self.k));
        }
        if self.cq > params.full() {
            return Err(format!("D3 exponent overdrawn: cq = {} > qr = {}", self.cq, params.full()));
        }
        if self.b > params.budget {
            return Err(format!("cutoff budget exceeded: b = {} > {}", self.b, params.budget));
        }
        Ok(())
    }
}

impl fmt::Display for NormTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} b={} cq={} r={} k={} s={} t={} l={}",
            self.a, self.b, self.cq, self.r, self.k, self.s, self.t, self.l
        )
    }
}

/// Applies one move, re-checking every state invariant.
pub fn apply_move(state: &NormTerm, mv: Move, params: &SimParams) -> Result<NormTerm, SimError> {
    let illegal = |reason: String| SimError::IllegalMove { mv, reason };
    if state.is_terminal(params) {
        return Err(illegal("state is already terminal".into()));
    }
    let mut n = *state;
    match mv {
        Move::Subelliptic => {
            if n.a == 0 {
                return Err(illegal("needs a power of x1 (a ≥ 1)".into()));
            }
            n.a -= 1;
            n.s += 1;
            n.cq += 1;
        }
        Move::PhiStep => {
            n.a += params.p - 1;
            n.k += 1;
            n.b += 1;
            n.cq += 1;
        }
        Move::XCreate => {
            if params.q < 2 {
                return Err(illegal("needs q ≥ 2".into()));
            }
            if n.a < params.q - 1 {
                return Err(illegal(format!("needs a ≥ q - 1 = {}, have a = {}", params.q - 1, n.a)));
            }
            n.a -= params.q - 1;
            n.t += 1;
            n.cq += params.q - 1;
        }
        Move::RLoss(l) => {
            if l == 0 {
                return Err(illegal("ℓ' must be at least 1".into()));
            }
            n.l += l;
            n.cq += params.q * l;
            if n.effective() > params.full() {
                return Err(illegal(format!("overshoots the D3 exponent by {}/q", n.effective() - params.full())));
            }
        }
    }
    n.check(params).map_err(illegal)?;
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Dp,
    Greedy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => write!(f, "exhaustive"),
            Mode::Dp => write!(f, "dp"),
            Mode::Greedy => write!(f, "greedy"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "dp" => Ok(Mode::Dp),
            "greedy" => Ok(Mode::Greedy),
            _ => Err(format!("unknown mode '{s}' (expected exhaustive, dp or greedy)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub params: SimParams,
    pub moves: Vec<Move>,
    /// `states[0]` is the initial state, `states[i + 1]` follows `moves[i]`.
    pub states: Vec<NormTerm>,
}

impl DerivationTrace {
    pub fn new(params: SimParams) -> Self {
        DerivationTrace { params, moves: Vec::new(), states: vec![NormTerm::initial(params.r)] }
    }

    pub fn last(&self) -> &NormTerm {
        self.states.last().expect("trace has an initial state")
    }

    pub fn push(&mut self, mv: Move) -> Result<(), SimError> {
        let next = apply_move(self.last(), mv, &self.params)?;
        self.moves.push(mv);
        self.states.push(next);
        Ok(())
    }

    pub fn from_moves(params: SimParams, moves: &[Move]) -> Result<Self, SimError> {
        let mut tr = DerivationTrace::new(params);
        for &m in moves {
            tr.push(m)?;
        }
        Ok(tr)
    }

    /// `K = Σ k`.
    pub fn big_k(&self) -> u64 {
        self.last().k
    }

    /// `L = Σ ℓ`.
    pub fn big_l(&self) -> u64 {
        self.last().l
    }

    pub fn weight(&self) -> u64 {
        self.last().weight()
    }

    pub fn is_terminal(&self) -> bool {
        self.last().is_terminal(&self.params)
    }

    /// Amount by which the last move overran the budget, in units of `1/q`.
    pub fn overshoot(&self) -> u64 {
        self.last().effective().saturating_sub(self.params.full())
    }

    /// Text form: a header, a `START` line, then one line per move with the
    /// resulting state.
    pub fn to_text(&self, mode: Mode) -> String {
        let p = &self.params;
        let mut out = format!(
            "# p={} q={} r={} mode={} weight={} budget={}\n",
            p.p,
            p.q,
            p.r,
            mode,
            self.weight(),
            p.budget
        );
        out.push_str(&format!("START {}\n", self.states[0]));
        for (m, s) in self.moves.iter().zip(&self.states[1..]) {
            out.push_str(&format!("{m} {s}\n"));
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output, replaying and checking
    /// every move against the recorded state.
    pub fn parse(text: &str) -> Result<(Self, Mode), SimError> {
        let bad = |line: usize, msg: String| SimError::BadTrace { line, msg };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty trace".into()))?;
        let header = header.strip_prefix("# ").ok_or_else(|| bad(1, "missing header".into()))?;
        let kv: HashMap<&str, &str> = header.split_whitespace().filter_map(|w| w.split_once('=')).collect();
        let num = |k: &str| -> Result<u64, SimError> {
            kv.get(k).and_then(|v| v.parse().ok()).ok_or_else(|| bad(1, format!("missing or bad '{k}'")))
        };
        let mode: Mode = kv.get("mode").ok_or_else(|| bad(1, "missing 'mode'".into()))?.parse().map_err(|e| bad(1, e))?;
        let params = SimParams { p: num("p")?, q: num("q")?, r: num("r")?, budget: num("budget")? };
        let mut tr = DerivationTrace::new(params);
        for (i, line) in lines {
            let mut words = line.split_whitespace();
            let Some(head) = words.next() else { continue };
            let state = words.collect::<Vec<_>>().join(" ");
            if head == "START" {
                if state != tr.states[0].to_string() {
                    return Err(bad(i + 1, "START state is not the initial state".into()));
                }
                continue;
            }
            let mv: Move = head.parse().map_err(|e| bad(i + 1, e))?;
            tr.push(mv).map_err(|e| bad(i + 1, e.to_string()))?;
            if state != tr.last().to_string() {
                return Err(bad(i + 1, format!("recorded state '{state}' differs from replay '{}'", tr.last())));
            }
        }
        if num("weight")? != tr.weight() {
            return Err(bad(1, "header weight differs from replay".into()));
        }
        Ok((tr, mode))
    }
}

/// Recomputes the closed-form exponents from the raw move counts at every
/// step and compares them with the tracked state.
///
/// Checks `a = k(p−1) − s − t(q−1)` and `cq = qℓ + k + s + (q−1)t` (the
/// remaining `D3` exponent `r − ℓ − (k + s − t)/q − t` in units of `1/q`),
/// and, when the trace ends with every power of `x1` spent (`a = 0`), that
/// the residual exponent equals `r − (ℓ + k p / q)`. Returns the first
/// failing step index on mismatch (0 is the initial state).
pub fn verify_exponent_identities(trace: &DerivationTrace) -> Result<(), usize> {
    let (p, q) = (trace.params.p as i64, trace.params.q as i64);
    let (mut k, mut s, mut t, mut l) = (0i64, 0i64, 0i64, 0i64);
    for (i, st) in trace.states.iter().enumerate() {
        if i > 0 {
            match trace.moves[i - 1] {
                Move::Subelliptic => s += 1,
                Move::PhiStep => k += 1,
                Move::XCreate => t += 1,
                Move::RLoss(x) => l += x as i64,
            }
        }
        let a = k * (p - 1) - s - t * (q - 1);
        let cq = q * l + k + s + (q - 1) * t;
        let counters = (st.k as i64, st.s as i64, st.t as i64, st.l as i64) == (k, s, t, l);
        if !counters || a < 0 || st.a as i64 != a || st.cq as i64 != cq || st.b as i64 != k {
            return Err(i);
        }
    }
    let last = trace.last();
    if last.a == 0 {
        let residual = trace.params.full() as i64 - last.cq as i64;
        if residual != q * trace.params.r as i64 - (q * l + k * p) {
            return Err(trace.states.len() - 1);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimResult {
    pub mode: Mode,
    /// Largest `K + L` over complete derivations; `None` if none completes.
    pub weight: Option<u64>,
    /// A derivation attaining `weight` (for greedy: the one it followed).
    pub trace: DerivationTrace,
    pub states_explored: usize,
}

/// Largest `K + L` over all complete derivations from the initial state.
pub fn max_weight(params: &SimParams, mode: Mode) -> SimResult {
    match mode {
        Mode::Exhaustive => exhaustive(params),
        Mode::Dp => dp(params),
        Mode::Greedy => greedy(params),
    }
}

/// Breadth-first enumeration of every reachable state.
fn exhaustive(params: &SimParams) -> SimResult {
    let start = NormTerm::initial(params.r);
    let mut parent: HashMap<NormTerm, (NormTerm, Move)> = HashMap::new();
    let mut seen: HashSet<NormTerm> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut best: Option<NormTerm> = None;
    while let Some(st) = queue.pop_front() {
        if st.is_terminal(params) {
            if best.map_or(true, |b| st.weight() > b.weight()) {
                best = Some(st);
            }
            continue;
        }
        for mv in st.legal_moves(params) {
            let next = apply_move(&st, mv, params).expect("legal move applies");
            if seen.insert(next) {
                parent.insert(next, (st, mv));
                queue.push_back(next);
            }
        }
    }
    let mut moves = Vec::new();
    if let Some(mut cur) = best {
        while let Some(&(prev, mv)) = parent.get(&cur) {
            moves.push(mv);
            cur = prev;
        }
    }
    moves.reverse();
    let trace = DerivationTrace::from_moves(*params, &moves).expect("replayed path is legal");
    SimResult { mode: Mode::Exhaustive, weight: best.map(|b| b.weight()), trace, states_explored: seen.len() }
}

/// Reduced state for the dynamic program: `(a, k, ℓ)` determines `b`, the
/// effective deficit and every move's legality.
type Key = (u64, u64, u64);

fn key(st: &NormTerm) -> Key {
    (st.a, st.k, st.l)
}

/// Memoized best additional weight over `(a, k, ℓ)`; the deficit strictly
/// increases along every move, so states are solved in decreasing order of
/// `cq`.
fn dp(params: &SimParams) -> SimResult {
    let start = NormTerm::initial(params.r);
    let mut reps: HashMap<Key, NormTerm> = HashMap::from([(key(&start), start)]);
    let mut queue = VecDeque::from([start]);
    while let Some(st) = queue.pop_front() {
        for mv in st.legal_moves(params) {
            let next = apply_move(&st, mv, params).expect("legal move applies");
            if let std::collections::hash_map::Entry::Vacant(e) = reps.entry(key(&next)) {
                e.insert(next);
                queue.push_back(next);
            }
        }
    }
    let mut order: Vec<NormTerm> = reps.values().copied().collect();
    order.sort_by_key(|s| std::cmp::Reverse(s.cq));
    let mut value: HashMap<Key, (Option<u64>, Option<Move>)> = HashMap::new();
    for st in &order {
        let entry = if st.is_terminal(params) {
            (Some(0), None)
        } else {
            let mut best: (Option<u64>, Option<Move>) = (None, None);
            for mv in st.legal_moves(params) {
                let next = apply_move(st, mv, params).expect("legal move applies");
                if let Some(v) = value[&key(&next)].0 {
                    let w = v + mv.weight();
                    if best.0.map_or(true, |b| w > b) {
                        best = (Some(w), Some(mv));
                    }
                }
            }
            best
        };
        value.insert(key(st), entry);
    }
    let (weight, _) = value[&key(&start)];
    let mut trace = DerivationTrace::new(*params);
    if weight.is_some() {
        while let (_, Some(mv)) = value[&key(trace.last())] {
            trace.push(mv).expect("dp path is legal");
        }
    }
    SimResult { mode: Mode::Dp, weight, trace, states_explored: reps.len() }
}

/// Combines `x1^{q-1}` with `D3` whenever possible, otherwise differentiates
/// the cutoff, then spends single powers of `x1`, then loses one power of
/// `r` on the coefficients.
fn greedy(params: &SimParams) -> SimResult {
    let mut trace = DerivationTrace::new(*params);
    loop {
        let moves = trace.last().legal_moves(params);
        let pick = [Move::XCreate, Move::PhiStep, Move::Subelliptic, Move::RLoss(1)]
            .into_iter()
            .find(|m| moves.contains(m));
        match pick {
            Some(mv) => trace.push(mv).expect("legal move applies"),
            None => break,
        }
    }
    let weight = trace.is_terminal().then(|| trace.weight());
    let n = trace.states.len();
    SimResult { mode: Mode::Greedy, weight, trace, states_explored: n }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u64, q: u64, r: u64) -> SimParams {
        SimParams::new(p, q, r, None).unwrap()
    }

    #[test]
    fn single_moves() {
        let pr = params(3, 4, 10);
        let s = apply_move(&NormTerm::initial(10), Move::PhiStep, &pr).unwrap();
        assert_eq!((s.a, s.k, s.cq), (2, 1, 1));
        let s = apply_move(&s, Move::Subelliptic, &pr).unwrap();
        assert_eq!((s.a, s.s, s.cq), (1, 1, 2));
        let err = apply_move(&NormTerm::initial(10), Move::XCreate, &pr).unwrap_err();
        assert!(matches!(err, SimError::IllegalMove { mv: Move::XCreate, .. }));
    }

    #[test]
    fn trace_text_round_trip() {
        let res = max_weight(&params(2, 3, 4), Mode::Dp);
        let text = res.trace.to_text(Mode::Dp);
        let (back, mode) = DerivationTrace::parse(&text).unwrap();
        assert_eq!(mode, Mode::Dp);
        assert_eq!(back, res.trace);
    }

    #[test]
    fn move_names_parse() {
        for m in [Move::Subelliptic, Move::PhiStep, Move::XCreate, Move::RLoss(3)] {
            assert_eq!(m.to_string().parse::<Move>().unwrap(), m);
        }
        assert!("RLOSS(0)".parse::<Move>().is_err());
    }
}
