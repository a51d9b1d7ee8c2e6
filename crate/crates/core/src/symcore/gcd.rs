use super::{Poly, SymError, Var};

/// Greatest common divisor over `Q[x1, x2, x3]`, normalised to a monic
/// lex-leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let v = match Var::ALL.iter().find(|v| a.contains_var(**v) || b.contains_var(**v)) {
        Some(v) => *v,
        None => return Poly::one(),
    };
    if !a.contains_var(v) {
        return gcd(a, &content_in(b, v));
    }
    if !b.contains_var(v) {
        return gcd(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(pa, pb, v);
    (&c * &g).monic()
}

/// Gcd of a list; errors on an empty or all-zero list.
pub fn gcd_many(polys: &[Poly]) -> Result<Poly, SymError> {
    let mut acc = Poly::zero();
    for p in polys {
        acc = gcd(&acc, p);
        if acc.is_one() {
            break;
        }
    }
    if acc.is_zero() {
        Err(SymError::AllZero)
    } else {
        Ok(acc)
    }
}

/// The part of the gcd of `polys` that genuinely depends on `x1`.
///
/// Factors free of `x1` are discarded; when the `x1`-leading coefficient of
/// the result is a constant it is scaled to one.
pub fn gcd_in_x1(polys: &[Poly]) -> Result<Poly, SymError> {
    let g = gcd_many(polys)?;
    if !g.contains_var(Var::X1) {
        return Ok(Poly::one());
    }
    let pp = primitive_part_in(&g, Var::X1);
    let lead = pp.lead_coeff_in(Var::X1);
    if lead.is_constant() {
        Ok(pp.scale(&lead.constant_term().recip()))
    } else {
        Ok(pp)
    }
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Poly, v: Var) -> Poly {
    let coeffs = p.coeffs_in(v);
    gcd_many(&coeffs).unwrap_or_else(|_| Poly::zero())
}

pub fn primitive_part_in(p: &Poly, v: Var) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides")
}

fn primitive_prs(a: Poly, b: Poly, v: Var) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = a.pseudo_rem(&b, v);
        if r.is_zero() {
            return b.clear_denominators();
        }
        if !r.contains_var(v) {
            return Poly::one();
        }
        a = b;
        b = primitive_part_in(&r, v).clear_denominators();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, rat};

    fn x(i: usize) -> Poly {
        Poly::var(Var::from_number(i).unwrap())
    }

    #[test]
    fn gcd_recovers_planted_factor() {
        let f = &(&x(1) - &x(2).pow(2)) * &(&x(3) + &Poly::one());
        let a = &f * &(&x(1) + &x(3));
        let b = &f * &(&x(2) - &x(3).scale(&rat(1, 2)));
        assert_eq!(gcd(&a, &b), f.monic());
    }

    #[test]
    fn coprime_inputs() {
        let a = &x(1) + &x(2);
        let b = &x(1) - &x(2);
        assert!(gcd(&a, &b).is_one());
        assert!(gcd(&Poly::from_int(6), &x(3)).is_one());
    }

    #[test]
    fn monomial_gcd() {
        let a = Poly::monomial(int(3), [2, 1, 0]);
        let b = Poly::monomial(int(5), [1, 3, 2]);
        assert_eq!(gcd(&a, &b), Poly::monomial(int(1), [1, 1, 0]));
    }

    #[test]
    fn gcd_in_x1_drops_x1_free_factors() {
        let shifted = &x(1) - &x(2).pow(2);
        let list = [
            &(&shifted * &x(3)) * &x(2),
            &shifted * &x(3),
            Poly::zero(),
            &shifted.pow(2) * &x(3),
        ];
        assert_eq!(gcd_in_x1(&list).unwrap(), shifted);
        assert_eq!(gcd_in_x1(&[Poly::zero()]), Err(SymError::AllZero));
        assert!(gcd_in_x1(&[x(2), x(3)]).unwrap().is_one());
    }
}
