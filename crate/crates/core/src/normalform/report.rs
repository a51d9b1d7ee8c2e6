use std::fmt;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::ConditionVerdict;
use crate::symcore::Rational;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    I,
    IIa,
    IIb,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::I => write!(f, "I"),
            CaseTag::IIa => write!(f, "IIa"),
            CaseTag::IIb => write!(f, "IIb"),
        }
    }
}

impl std::str::FromStr for CaseTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(CaseTag::I),
            "IIa" => Ok(CaseTag::IIa),
            "IIb" => Ok(CaseTag::IIb),
            other => Err(format!("unknown case tag '{other}'")),
        }
    }
}

/// Overall outcome; maps one-to-one onto the CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Classified,
    AssumptionViolated,
    NeedsCoordinateChange,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Classified => write!(f, "classified"),
            Status::AssumptionViolated => write!(f, "assumption violated"),
            Status::NeedsCoordinateChange => write!(f, "needs coordinate change"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioJson {
    pub num: i64,
    pub den: i64,
}

impl From<&Rational> for RatioJson {
    fn from(r: &Rational) -> Self {
        RatioJson {
            num: r.numer().to_i64().expect("threshold numerator fits in i64"),
            den: r.denom().to_i64().expect("threshold denominator fits in i64"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerReport {
    pub level: usize,
    pub change: crate::fields::LayerChange,
    pub shape: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageOutcome {
    pub stage: String,
    /// `ok`, `error` or `skipped`.
    pub outcome: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Versions {
    pub tool: String,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { tool: env!("CARGO_PKG_VERSION").to_string(), schema: SCHEMA_VERSION }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub name: String,
    pub status: Status,
    pub case: Option<CaseTag>,
    pub subcase: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub r: Option<u32>,
    pub threshold: Option<RatioJson>,
    pub conditions: Vec<ConditionVerdict>,
    pub layers: Vec<LayerReport>,
    pub truncation: u32,
    /// `g` of the straightening `y1 = x1 - g(x')`, when one was applied.
    pub straightening: Option<String>,
    pub swapped: bool,
    pub stages: Vec<StageOutcome>,
    pub notes: Vec<String>,
    pub versions: Versions,
}

impl ClassificationReport {
    pub fn threshold_rational(&self) -> Option<Rational> {
        self.threshold.as_ref().map(|t| crate::symcore::rat(t.num, t.den))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// First condition with a `violated` verdict, if any.
    pub fn first_violation(&self) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|c| c.verdict == super::Verdict::Violated)
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "unknown".to_string(), T::to_string)
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "operator: {}", self.name)?;
        writeln!(f, "status:   {}", self.status)?;
        let sub = self.subcase.as_deref().map(|s| format!(" ({s})")).unwrap_or_default();
        writeln!(f, "case:     {}{sub}", opt(&self.case))?;
        writeln!(f, "p, q:     {}, {}", opt(&self.p), opt(&self.q))?;
        writeln!(f, "r:        {}", opt(&self.r))?;
        let thr = self
            .threshold
            .as_ref()
            .map_or_else(|| "unknown".to_string(), |t| crate::symcore::rat(t.num, t.den).to_string());
        writeln!(f, "gevrey threshold: {thr}")?;
        if let Some(g) = &self.straightening {
            writeln!(f, "straightening: y1 = x1 - ({g})")?;
        }
        if self.swapped {
            writeln!(f, "X2 and X3 exchanged")?;
        }
        writeln!(f, "truncation: {}", self.truncation)?;
        if !self.conditions.is_empty() {
            writeln!(f, "conditions:")?;
            for c in &self.conditions {
                let w = c.witness.as_deref().map(|w| format!(" witness {w}")).unwrap_or_default();
                writeln!(f, "  {:<26} {:<20}{w}  [{}]", c.id, c.verdict.to_string(), c.detail)?;
            }
        }
        if !self.layers.is_empty() {
            writeln!(f, "layers:")?;
            for l in &self.layers {
                writeln!(f, "  Σ_{:<3} {:<13} {}", l.level, l.change.to_string(), l.shape)?;
            }
        }
        writeln!(f, "stages:")?;
        for s in &self.stages {
            if s.detail.is_empty() {
                writeln!(f, "  {:<22} {}", s.stage, s.outcome)?;
            } else {
                writeln!(f, "  {:<22} {:<8} {}", s.stage, s.outcome, s.detail)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}
