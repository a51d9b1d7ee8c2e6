#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sumsq_core::fields::{FieldSymbol, OperatorSpec};
use sumsq_core::specfile::{parse_spec, SpecDocument};
use sumsq_core::symcore::{rat, Poly, Var};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse polynomial with up to `max_terms` terms of total degree ≤ `max_deg`
/// and small rational coefficients.
pub fn random_poly(rng: &mut impl Rng, max_deg: u32, max_terms: usize) -> Poly {
    let n = rng.gen_range(0..=max_terms);
    Poly::from_terms((0..n).map(|_| {
        let d = rng.gen_range(0..=max_deg);
        let e1 = rng.gen_range(0..=d);
        let e2 = rng.gen_range(0..=d - e1);
        let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        (c, [e1, e2, d - e1 - e2])
    }))
}

/// Random polynomial in `x2, x3` only.
pub fn random_poly_xprime(rng: &mut impl Rng, max_deg: u32, max_terms: usize) -> Poly {
    random_poly(rng, max_deg, max_terms).eval_var(Var::X1, &rat(0, 1))
}

pub fn random_field(rng: &mut impl Rng, max_deg: u32) -> FieldSymbol {
    FieldSymbol::new(random_poly(rng, max_deg, 4), random_poly(rng, max_deg, 4), random_poly(rng, max_deg, 4))
}

pub fn random_spec(rng: &mut impl Rng, max_deg: u32) -> OperatorSpec {
    OperatorSpec::new(random_field(rng, max_deg), random_field(rng, max_deg), random_field(rng, max_deg))
}

fn nonzero_constant(rng: &mut impl Rng) -> Poly {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-4..=4);
    }
    Poly::constant(rat(n, rng.gen_range(1..=3)))
}

fn no_constant(rng: &mut impl Rng, max_deg: u32) -> Poly {
    let p = random_poly(rng, max_deg, 3);
    &p - &Poly::constant(p.constant_term())
}

/// Case I fields of type I_0 built from random data; returns `(spec, p, q)`.
pub fn random_type_i0(rng: &mut impl Rng) -> (OperatorSpec, u32, u32) {
    let p = rng.gen_range(1..=3u32);
    let q = p + rng.gen_range(0..=3u32);
    let x1 = Poly::var(Var::X1);
    let alpha = &nonzero_constant(rng) + &no_constant(rng, 2);
    let lambda = random_poly(rng, 2, 3);
    let a22 = random_poly(rng, 2, 3);
    let a32 = random_poly(rng, 2, 3);
    let a23 = random_poly(rng, 2, 3);
    // ã33(0) − λ(0) ã23(0) ≠ 0
    let shift = &nonzero_constant(rng) + &Poly::constant(lambda.constant_term() * a23.constant_term());
    let a33 = &shift + &no_constant(rng, 2);
    let pp = x1.pow(p - 1);
    let qq = x1.pow(q - p);
    let x2 = FieldSymbol::new(
        random_poly(rng, 2, 2),
        &pp * &(&alpha + &(&x1 * &a22)),
        &pp * &(&qq * &a23),
    );
    let x3 = FieldSymbol::new(
        random_poly(rng, 2, 2),
        &pp * &(&(&lambda * &alpha) + &(&x1 * &a32)),
        &pp * &(&qq * &a33),
    );
    (OperatorSpec::new(FieldSymbol::xi(Var::X1), x2, x3), p, q)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn load_corpus(file: &str) -> SpecDocument {
    let path = corpus_dir().join(file);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_spec(&text).unwrap_or_else(|e| panic!("{file}: {e}"))
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "op"))
        .collect();
    v.sort();
    v
}

prop_compose! {
    pub fn arb_rat()(n in -6i64..=6, d in 1i64..=4) -> sumsq_core::symcore::Rational {
        rat(n, d)
    }
}

prop_compose! {
    pub fn arb_term(max_deg: u32)(e1 in 0..=max_deg, e2 in 0..=max_deg, e3 in 0..=max_deg, c in arb_rat())
        -> (sumsq_core::symcore::Rational, [u32; 3]) {
        // fold the exponents back into the total-degree simplex
        let mut e = [e1, e2, e3];
        while e.iter().sum::<u32>() > max_deg {
            let i = e.iter().enumerate().max_by_key(|(_, v)| **v).map(|(i, _)| i).unwrap();
            e[i] -= 1;
        }
        (c, e)
    }
}

pub fn arb_poly(max_deg: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(arb_term(max_deg), 0..=max_terms).prop_map(Poly::from_terms)
}

pub fn arb_field(max_deg: u32) -> impl Strategy<Value = FieldSymbol> {
    (arb_poly(max_deg, 4), arb_poly(max_deg, 4), arb_poly(max_deg, 4)).prop_map(|(a, b, c)| FieldSymbol::new(a, b, c))
}
