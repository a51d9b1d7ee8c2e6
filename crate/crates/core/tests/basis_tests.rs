mod common;

use common::{load_corpus, random_poly, random_type_i0, rng};
use sumsq_core::basisrewrite::{
    apply_commutator, apply_expansion, expand_commutator, growth_fit, BasisError, BasisForm,
};
use sumsq_core::fields::{FieldSymbol, OperatorSpec};
use sumsq_core::symcore::{rat, Poly, Var};

fn target_for(g: &mut impl rand::Rng, p: u32, q: u32) -> FieldSymbol {
    let x1 = Poly::var(Var::X1);
    FieldSymbol::new(
        random_poly(g, 3, 4),
        &x1.pow(p - 1) * &random_poly(g, 3, 4),
        &x1.pow(q - 1) * &random_poly(g, 3, 4),
    )
}

#[test]
fn random_targets_reassemble_exactly() {
    let mut g = rng(61);
    for _ in 0..100 {
        let (spec, p, q) = random_type_i0(&mut g);
        let basis = BasisForm::from_spec(&spec, p, q).unwrap();
        let target = target_for(&mut g, p, q);
        let sol = basis.solve_basis(&target, 8).unwrap();
        // independent oracle: combine by hand and compare below degree 8
        let mut sum = FieldSymbol::zero();
        for (coef, field) in [(&sol.a, &spec.fields[0]), (&sol.b, &spec.fields[1]), (&sol.c, &spec.fields[2])] {
            sum = sum.add(&field.map(|c| c * coef));
        }
        assert_eq!(sum.map(|c| c.truncate(8)), target.map(|c| c.truncate(8)));
        assert!(basis.residual(&target, &sol).is_zero());
    }
}

#[test]
fn basis_elements_map_to_unit_vectors() {
    let mut g = rng(3);
    for _ in 0..10 {
        let (spec, p, q) = random_type_i0(&mut g);
        let basis = BasisForm::from_spec(&spec, p, q).unwrap();
        for h in 0..3 {
            let s = basis.solve_basis(&spec.fields[h], 6).unwrap();
            let got = [s.a.is_one(), s.b.is_one(), s.c.is_one()];
            let zero = [s.a.is_zero(), s.b.is_zero(), s.c.is_zero()];
            for k in 0..3 {
                assert!(if k == h { got[k] } else { zero[k] }, "h={h} k={k}");
            }
        }
    }
}

#[test]
fn model_basis_vector() {
    for (p, q) in [(1, 1), (2, 3), (2, 5)] {
        let basis = BasisForm::from_spec(&OperatorSpec::oleinik_radkevic(p, q), p, q).unwrap();
        let t = FieldSymbol::new(Poly::zero(), Poly::zero(), Poly::var_pow(Var::X1, q - 1));
        let s = basis.solve_basis(&t, 8).unwrap();
        assert!(s.a.is_zero() && s.b.is_zero() && s.c.is_one());
    }
}

#[test]
fn rejects_non_i0_and_bad_targets() {
    let spec = load_corpus("case1_ex3_p2_q4.op").spec;
    assert!(matches!(BasisForm::from_spec(&spec, 2, 4), Err(BasisError::NotTypeI0(_))));
    let basis = BasisForm::from_spec(&OperatorSpec::oleinik_radkevic(2, 3), 2, 3).unwrap();
    let t = FieldSymbol::xi(Var::X2);
    assert_eq!(basis.solve_basis(&t, 4), Err(BasisError::TargetNotDivisible { var: Var::X2, power: 1 }));
    assert_eq!(expand_commutator(&basis, 2, 5, 4).unwrap_err(), BasisError::OrderOutOfRange(5));
}

fn test_polys() -> Vec<Poly> {
    let mut g = rng(404);
    let mut v = vec![Poly::var_pow(Var::X3, 5), &Poly::var(Var::X1) * &Poly::var_pow(Var::X3, 4)];
    v.extend((0..3).map(|_| random_poly(&mut g, 6, 6)));
    v
}

#[test]
fn expansion_matches_the_commutator_applied_directly() {
    let mut g = rng(77);
    let us = test_polys();
    for _ in 0..20 {
        let (spec, p, q) = random_type_i0(&mut g);
        let basis = BasisForm::from_spec(&spec, p, q).unwrap();
        for j in 1..=3u8 {
            for m in 1..=4u32 {
                let trunc = 8;
                let table = expand_commutator(&basis, j, m, trunc).unwrap();
                assert_eq!(table.entries[0][j as usize - 1], Poly::from_int(-1));
                assert_eq!(table.entries[0].iter().filter(|e| e.is_zero()).count(), 2);
                for u in &us {
                    let direct = apply_commutator(spec.field(j), m, u).truncate(trunc);
                    let expanded = apply_expansion(&basis, &table, u).truncate(trunc);
                    assert_eq!(direct, expanded, "j={j} m={m} u={u}");
                }
            }
        }
    }
}

#[test]
fn x3_independent_coefficients_give_a_zero_table() {
    let spec = load_corpus("case1_ex1_p2_q5.op").spec;
    let basis = BasisForm::from_spec(&spec, 2, 5).unwrap();
    for j in 1..=3 {
        assert!(expand_commutator(&basis, j, 4, 6).unwrap().is_zero_beyond_0());
    }
}

#[test]
fn twisted_model_matches_double_bracket() {
    // X2 = x1 (1 + x3) D2: ∂3 X2 = x1 D2 = X2 / (1 + x3), ∂3² X2 = 0
    let x1 = Poly::var(Var::X1);
    let twist = &Poly::one() + &Poly::var(Var::X3);
    let mut spec = OperatorSpec::oleinik_radkevic(2, 4);
    spec.fields[1] = FieldSymbol::new(Poly::zero(), &x1 * &twist, Poly::zero());
    let basis = BasisForm::from_spec(&spec, 2, 4).unwrap();
    let table = expand_commutator(&basis, 2, 2, 6).unwrap();
    let direct2 = spec.fields[1].map(|c| c.diff_n(Var::X3, 2));
    assert_eq!(table.brackets[2], direct2);
    assert!(table.entries[2].iter().all(Poly::is_zero));
    // γ_22^(1) = −1/(1 + x3) truncated: −1 + x3 − x3² + …
    let want = Poly::from_terms((0..6u32).map(|k| (rat(if k % 2 == 0 { -1 } else { 1 }, 1), [0, 0, k])));
    assert_eq!(table.entries[1][1], want);
    let fit = growth_fit(&table, 6);
    assert_eq!(fit.norms.len(), 2);
    assert!(fit.c.is_finite());
}
