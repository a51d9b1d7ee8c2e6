mod common;

use common::{arb_poly, arb_rat};
use proptest::prelude::*;
use sumsq_core::symcore::{gcd, rat, Poly, Series1, SeriesVar, Var};

fn vars() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::X1), Just(Var::X2), Just(Var::X3)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ring_axioms(a in arb_poly(4, 5), b in arb_poly(4, 5), c in arb_poly(4, 5)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly::one(), a.clone());
    }

    #[test]
    fn order_is_additive(a in arb_poly(4, 4), b in arb_poly(4, 4), v in vars()) {
        let prod = &a * &b;
        match (a.ord_var(v), b.ord_var(v)) {
            (Some(x), Some(y)) => prop_assert_eq!(prod.ord_var(v), Some(x + y)),
            _ => prop_assert!(prod.is_zero()),
        }
        match (a.order(), b.order()) {
            (Some(x), Some(y)) => prop_assert_eq!(prod.order(), Some(x + y)),
            _ => prop_assert!(prod.is_zero()),
        }
    }

    #[test]
    fn derivative_is_a_derivation(a in arb_poly(4, 4), b in arb_poly(4, 4), v in vars()) {
        let lhs = (&a * &b).diff(v);
        let rhs = &(&a.diff(v) * &b) + &(&a * &b.diff(v));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_commutes_with_evaluation(
        a in arb_poly(3, 4), r in arb_poly(2, 3), v in vars(),
        x in arb_rat(), y in arb_rat(), z in arb_rat(),
    ) {
        let pt = [x, y, z];
        let mut moved = pt.clone();
        moved[v.index()] = r.eval(&pt);
        prop_assert_eq!(a.substitute(v, &r).eval(&pt), a.eval(&moved));
    }

    #[test]
    fn series_inverse_inverts(c in arb_rat(), a in arb_poly(3, 4), n in 1u32..7) {
        prop_assume!(c != rat(0, 1));
        let unit = &Poly::constant(c) + &(&a - &Poly::constant(a.constant_term()));
        let inv = unit.series_inverse(n).unwrap();
        prop_assert!(unit.mul_trunc(&inv, n).is_one());
        prop_assert_eq!(inv.truncate(n), inv);
    }

    #[test]
    fn clear_denominators_is_a_rescaling(a in arb_poly(3, 4)) {
        prop_assume!(!a.is_zero());
        let b = a.clear_denominators();
        prop_assert!(b.terms().all(|(_, c)| c.is_integer()));
        prop_assert_eq!(a.monic(), b.monic());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gcd_divides_and_scales(a in arb_poly(2, 3), b in arb_poly(2, 3), c in arb_poly(2, 3)) {
        prop_assume!(!a.is_zero() && !b.is_zero() && !c.is_zero());
        let g = gcd(&a, &b);
        prop_assert!(a.div_exact(&g).is_some());
        prop_assert!(b.div_exact(&g).is_some());
        let gc = gcd(&(&a * &c), &(&b * &c));
        prop_assert_eq!(gc, (&g * &c).monic());
    }

    #[test]
    fn univariate_series_arithmetic(a in arb_poly(2, 3), b in arb_poly(2, 3)) {
        let sa = Series1::from_poly_x1(&a, 5);
        let sb = Series1::from_poly_x1(&b, 5);
        let prod = sa.mul(&sb).unwrap();
        let expect = Series1::from_poly_x1(&(&a * &b), 5);
        prop_assert_eq!(prod, expect);
        let z = Series1::zero(SeriesVar::X1, 5);
        prop_assert_eq!(sa.sub(&sa).unwrap(), z);
    }
}

#[test]
fn gcd_of_shared_factor() {
    let x1 = Poly::var(Var::X1);
    let x2 = Poly::var(Var::X2);
    let f = &(&x1 - &x2.pow(2)) * &(&x1 + &Poly::one());
    let g = &(&x1 - &x2.pow(2)) * &x2;
    assert_eq!(gcd(&f, &g), &x1 - &x2.pow(2));
}
