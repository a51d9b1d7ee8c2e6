//! End-to-end classification of an operator spec.

use num_traits::Zero;

use crate::fields::{hormander_check, stratification, OperatorSpec};
use crate::normalform::{
    apply_cov, check_th1_conditions, classify_case, compute_q, compute_type_r, degenerate_case_i, det2,
    detect_sigma1, factor_p, threshold_for, CaseData, ClassificationReport, ConditionVerdict, LayerReport,
    NormalFormError, RatioJson, SampleGrid, StageOutcome, StandardForm, Status, Verdict, Versions,
};
use crate::symcore::{Poly, Rational};

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Series truncation order; defaults to `2(q + 1)`.
    pub trunc: Option<u32>,
    pub grid: SampleGrid,
    /// Deepest stratification layer reported; defaults to `q`.
    pub max_level: Option<usize>,
}

/// The report plus the intermediate objects, for callers that need them.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: ClassificationReport,
    /// Spec after moving the base point and straightening `Σ1`.
    pub straightened: Option<OperatorSpec>,
    pub standard_form: Option<StandardForm>,
}

const STAGES: [&str; 10] = [
    "normalize",
    "detect_sigma1",
    "apply_cov",
    "factor_p",
    "classify_case",
    "compute_q",
    "check_conditions",
    "compute_type_r",
    "gevrey_threshold",
    "stratification",
];

struct Run {
    report: ClassificationReport,
}

impl Run {
    fn stage(&mut self, stage: &str, outcome: &str, detail: impl Into<String>) {
        self.report.stages.push(StageOutcome {
            stage: stage.to_string(),
            outcome: outcome.to_string(),
            detail: detail.into(),
        });
    }

    fn fail(mut self, stage: &str, err: &NormalFormError) -> ClassificationReport {
        self.stage(stage, "error", err.to_string());
        let done = self.report.stages.len();
        for s in &STAGES[done.min(STAGES.len())..] {
            self.stage(s, "skipped", "");
        }
        self.report.status = status_for(err);
        self.report
    }
}

fn status_for(err: &NormalFormError) -> Status {
    match err {
        NormalFormError::NeedsCoordinateChange(_) | NormalFormError::NotStandardForm(_) => {
            Status::NeedsCoordinateChange
        }
        _ => Status::AssumptionViolated,
    }
}

fn origin() -> [Rational; 3] {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

/// Runs every stage in order, recording each outcome; stages after a hard
/// error are marked skipped.
pub fn run_pipeline(name: &str, spec: &OperatorSpec, opts: &PipelineOptions) -> PipelineOutcome {
    let mut run = Run {
        report: ClassificationReport {
            name: name.to_string(),
            status: Status::Classified,
            case: None,
            subcase: None,
            p: None,
            q: None,
            r: None,
            threshold: None,
            conditions: Vec::new(),
            layers: Vec::new(),
            truncation: 0,
            straightening: None,
            swapped: false,
            stages: Vec::new(),
            notes: vec!["D_j is read as ∂/∂x_j; the 1/i factor does not affect any computed quantity".into()],
            versions: Versions::default(),
        },
    };
    let fail = |run: Run, stage: &str, err: NormalFormError| PipelineOutcome {
        report: run.fail(stage, &err),
        straightened: None,
        standard_form: None,
    };

    if spec.codirection.axis == crate::symcore::Var::X1 {
        let err = NormalFormError::NotCharacteristic("codirection ±e1 is not characteristic for X1 = D1".into());
        return fail(run, "normalize", err);
    }
    let spec = spec.normalized();
    run.stage("normalize", "ok", "base point at origin, codirection e3");

    let g = match detect_sigma1(&spec) {
        Ok(cm) => {
            run.stage(
                "detect_sigma1",
                "ok",
                format!("Σ1 = {{x1 = {}}}, multiplicity {}", cm.g, cm.multiplicity),
            );
            cm.g
        }
        Err(NormalFormError::NoCommonFactor) => {
            run.stage("detect_sigma1", "ok", "no common factor in x1: p = 1");
            Poly::zero()
        }
        Err(e) => return fail(run, "detect_sigma1", e),
    };
    let straight = apply_cov(&spec, &g);
    if g.is_zero() {
        run.stage("apply_cov", "ok", "identity");
    } else {
        run.stage("apply_cov", "ok", format!("y1 = x1 - ({g})"));
        run.report.straightening = Some(g.to_string());
    }

    let pf = match factor_p(&straight) {
        Ok(pf) => pf,
        Err(e) => return fail(run, "factor_p", e),
    };
    run.stage("factor_p", "ok", format!("p = {}", pf.p));
    run.report.p = Some(pf.p);

    let provisional = opts.trunc.unwrap_or(2 * (pf.p + 1));
    let classified = classify_case(&pf);
    let build = |trunc: u32| match &classified {
        Ok((pf2, case)) => compute_q(pf2, case, trunc),
        Err(_) => degenerate_case_i(&pf, trunc),
    };
    match &classified {
        Ok(_) => {
            run.report.conditions.push(ConditionVerdict {
                id: "sigma_p_nonempty".into(),
                verdict: Verdict::Proven,
                witness: None,
                detail: "det M(0) = 0".into(),
            });
        }
        Err(NormalFormError::SigmaPEmpty(detail)) if !det2(&pf.m()).constant_term().is_zero() => {
            let m0 = det2(&pf.m()).constant_term();
            run.report.conditions.push(ConditionVerdict {
                id: "sigma_p_nonempty".into(),
                verdict: Verdict::Violated,
                witness: Some(format!("det M(0) = {m0}")),
                detail: detail.clone(),
            });
            run.report.status = Status::AssumptionViolated;
            run.report
                .notes
                .push("M(0) is invertible: read as the degenerate Case I with q = p (elliptic at level p)".into());
        }
        Err(e) => return fail(run, "classify_case", e.clone()),
    }
    let sf = match build(provisional) {
        Ok(sf) => sf,
        Err(e) => {
            run.stage("classify_case", "ok", "");
            return fail(run, "compute_q", e);
        }
    };
    let trunc = opts.trunc.unwrap_or(2 * (sf.q + 1));
    let sf = if trunc == provisional { sf } else { build(trunc).unwrap_or(sf) };
    match &classified {
        Ok(_) => run.stage("classify_case", "ok", format!("Case {}", sf.tag())),
        Err(e) => run.stage("classify_case", "error", e.to_string()),
    }
    run.report.truncation = trunc;
    run.report.q = Some(sf.q);
    run.report.case = Some(sf.tag());
    run.report.swapped = sf.swapped;
    run.report.subcase = match &sf.case {
        CaseData::I(_) => None,
        CaseData::IIa(d) => Some(format!("{}", d.j)),
        CaseData::IIb(d) => Some(d.subcase.to_string()),
    };
    run.stage("compute_q", "ok", format!("q = {}", sf.q));
    if sf.reassemble() != straight {
        run.report.notes.push("internal: reassembled fields differ from the input".into());
    }

    let conds = check_th1_conditions(&sf, &opts.grid);
    let bad = conds.iter().filter(|c| c.verdict == Verdict::Violated).count();
    run.report.conditions.extend(conds);
    let max_len = (sf.q as usize).max(1) + 2;
    match hormander_check(&straight, &origin(), max_len) {
        Ok(m) => run.report.conditions.push(ConditionVerdict {
            id: "hormander".into(),
            verdict: Verdict::Proven,
            witness: None,
            detail: format!("brackets of length ≤ {m} span at the origin"),
        }),
        Err(e) => run.report.conditions.push(ConditionVerdict {
            id: "hormander".into(),
            verdict: Verdict::Violated,
            witness: Some("origin".into()),
            detail: e.to_string(),
        }),
    }
    if run.report.first_violation().is_some() {
        run.report.status = Status::AssumptionViolated;
    }
    run.stage(
        "check_conditions",
        if bad == 0 { "ok" } else { "error" },
        format!("{} conditions, {bad} violated", run.report.conditions.len()),
    );

    match &sf.case {
        CaseData::I(_) => match compute_type_r(&sf, trunc) {
            Ok(tr) => {
                run.report.r = Some(tr.r);
                run.stage("compute_type_r", "ok", format!("E(t) = {}", tr.series));
                run.report.notes.push(
                    "E(t) omits the unit prefactor α/(α + t ã22), which cannot change its order".into(),
                );
                let orders: Vec<String> = tr
                    .nearby
                    .iter()
                    .map(|(pt, o)| {
                        let o = o.map_or_else(|| "≥ trunc".to_string(), |o| o.to_string());
                        format!("({}, {}) → {o}", pt[0], pt[1])
                    })
                    .collect();
                run.report
                    .notes
                    .push(format!("order of E at nearby x̄': {} (sampled, not certified)", orders.join(", ")));
            }
            Err(e) => {
                run.stage("compute_type_r", "error", e.to_string());
                run.report.notes.push(format!("r unknown: {e}; raise --trunc"));
            }
        },
        _ => run.stage("compute_type_r", "skipped", "only defined in Case I"),
    }

    let threshold = threshold_for(sf.tag(), sf.p, sf.q, run.report.r);
    match &threshold {
        Some(t) => run.stage("gevrey_threshold", "ok", format!("q/p = {t}")),
        None => {
            run.stage("gevrey_threshold", "ok", "unknown");
            run.report
                .notes
                .push("Gevrey threshold is only established for type I_0; left unknown here".into());
        }
    }
    run.report.threshold = threshold.as_ref().map(RatioJson::from);

    let max_level = opts.max_level.unwrap_or(sf.q as usize);
    match stratification(&straight, max_level) {
        Ok(layers) => {
            run.report.layers = layers
                .iter()
                .map(|l| LayerReport { level: l.level, change: l.change, shape: l.shape.to_string() })
                .collect();
            run.stage("stratification", "ok", format!("{} layers", layers.len()));
        }
        Err(e) => run.stage("stratification", "error", e.to_string()),
    }

    PipelineOutcome { report: run.report, straightened: Some(straight), standard_form: Some(sf) }
}

/// Differences between the declared expectations and a report, one line
/// per mismatching field; empty when everything declared matches.
pub fn check_expectation(expect: &crate::specfile::Expectation, report: &ClassificationReport) -> Vec<String> {
    let mut out = Vec::new();
    let mut cmp = |what: &str, want: String, got: String| {
        if want != got {
            out.push(format!("{what}: expected {want}, got {got}"));
        }
    };
    let show = |v: Option<String>| v.unwrap_or_else(|| "unknown".into());
    if let Some(s) = &expect.status {
        let got = serde_json::to_value(report.status).ok().and_then(|v| v.as_str().map(String::from));
        cmp("status", s.clone(), show(got));
    }
    if let Some(c) = expect.case {
        cmp("case", c.to_string(), show(report.case.map(|c| c.to_string())));
    }
    if let Some(s) = &expect.subcase {
        cmp("subcase", s.clone(), show(report.subcase.clone()));
    }
    if let Some(p) = expect.p {
        cmp("p", p.to_string(), show(report.p.map(|v| v.to_string())));
    }
    if let Some(q) = expect.q {
        cmp("q", q.to_string(), show(report.q.map(|v| v.to_string())));
    }
    if let Some(r) = &expect.r {
        cmp("r", show(r.map(|v| v.to_string())), show(report.r.map(|v| v.to_string())));
    }
    if let Some(t) = &expect.threshold {
        cmp(
            "threshold",
            show(t.as_ref().map(|v| v.to_string())),
            show(report.threshold_rational().map(|v| v.to_string())),
        );
    }
    out
}
