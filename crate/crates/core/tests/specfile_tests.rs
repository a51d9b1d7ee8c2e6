mod common;

use common::{arb_field, arb_rat, corpus_files};
use proptest::prelude::*;
use sumsq_core::fields::{Codirection, FieldSymbol, OperatorSpec};
use sumsq_core::normalform::CaseTag;
use sumsq_core::specfile::{parse_field, parse_spec, Expectation, SpecDocument, SpecError};
use sumsq_core::symcore::{Poly, Var};

fn codirections() -> impl Strategy<Value = Codirection> {
    (prop_oneof![Just(Var::X2), Just(Var::X3)], any::<bool>()).prop_map(|(axis, positive)| Codirection { axis, positive })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(
        f in arb_field(4), g in arb_field(4), h in arb_field(4),
        bp in (arb_rat(), arb_rat(), arb_rat()), cd in codirections(),
        p in 1u32..5, r in proptest::option::of(0u32..4),
    ) {
        let spec = OperatorSpec { fields: [f, g, h], base_point: [bp.0, bp.1, bp.2], codirection: cd };
        let mut doc = SpecDocument::from_spec(Some("random".into()), spec);
        doc.expect = Expectation { case: Some(CaseTag::IIb), p: Some(p), r: Some(r), ..Default::default() };
        let printed = doc.print();
        let back = parse_spec(&printed).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.print(), printed);
    }
}

#[test]
fn distribution_against_naive_expansion() {
    let f = parse_field("x1*(D2 + x1^2*D3)", &["x1".into(), "x2".into(), "x3".into()]).unwrap();
    let x1 = Poly::var(Var::X1);
    assert_eq!(f, FieldSymbol::new(Poly::zero(), x1.clone(), x1.pow(3)));
    let g = parse_field("(x1 - x2)^2*D1 - (2*x3 + 1/2)*(D1 - D3)/3", &["x1".into(), "x2".into(), "x3".into()]).unwrap();
    let naive = parse_field(
        "x1^2*D1 - 2*x1*x2*D1 + x2^2*D1 - 2/3*x3*D1 - 1/6*D1 + 2/3*x3*D3 + 1/6*D3",
        &["x1".into(), "x2".into(), "x3".into()],
    )
    .unwrap();
    assert_eq!(g, naive);
}

#[test]
fn error_reporting() {
    let e = parse_spec("X1 = D1\nX2 = D2*D3\nX3 = D3").unwrap_err();
    assert_eq!(e, SpecError::NonlinearInD { line: 2, col: 9 });
    let e = parse_spec("X1 = D1\nX2 = (x1*D2\nX3 = D3").unwrap_err();
    assert!(matches!(&e, SpecError::Parse { line: 2, expected, .. } if expected == &["')'".to_string()]));
    let e = parse_spec("X1 = D1\nX2 = x1/x2*D2\nX3 = D3").unwrap_err();
    assert!(matches!(e, SpecError::Invalid { line: 2, .. }));
    let e = parse_spec("X1 = D1\nX4 = D2\nX3 = D3").unwrap_err();
    assert!(matches!(e, SpecError::Parse { line: 2, col: 1, .. }));
    assert!(e.to_string().starts_with("2:1: expected"));
}

#[test]
fn every_corpus_file_round_trips() {
    for path in corpus_files() {
        let doc = parse_spec(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parse_spec(&doc.print()).unwrap(), doc, "{}", path.display());
    }
}
