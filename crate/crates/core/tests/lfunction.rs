use newton_hodge::character::AswCharacter;
use newton_hodge::exactnum::{rat, rat_int, CyclotomicInteger, Rational};
use newton_hodge::lfunction::{
    character_sum, check_equality, check_touching, hodge_polygon, l_polynomial, l_polynomial_of_power, zeta_cover,
};
use newton_hodge::polygon::SlopePolygon;
use newton_hodge::witt::WittStructure;
use num_bigint::BigInt;

fn chr(p: u32, q: u64, e: &str) -> AswCharacter {
    AswCharacter::parse(p, q, e).unwrap()
}

fn witt2(p: u32, f0: &str, f1: &str) -> AswCharacter {
    AswCharacter::from_toml(&format!("p = {p}\nn = 2\nwitt = [\"{f0}\", \"{f1}\"]")).unwrap()
}

/// Value exponent of the character at a point of `F_{q^e}`, computed directly.
fn residue_at(f: &AswCharacter, e: u32, x: &newton_hodge::ff::FFElem) -> Option<usize> {
    let ev = f.evaluator(e).unwrap();
    let field = ev.field().clone();
    let v = ev.eval(x)?;
    let w = WittStructure::get(f.p(), f.n() as usize).unwrap();
    Some(w.to_residue(&w.trace(&field, &v).unwrap()).unwrap() as usize)
}

fn truncated_mul(a: &[CyclotomicInteger], b: &[CyclotomicInteger], len: usize) -> Vec<CyclotomicInteger> {
    let z = CyclotomicInteger::zero(a[0].p(), a[0].n());
    let mut out = vec![z; len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
    }
    out
}

/// `∏_{closed x, deg x ≤ D} (1 - ρ(Frob_x) s^{deg x})^{-1} mod s^{D+1}`.
fn euler_product(f: &AswCharacter, d: usize) -> Vec<CyclotomicInteger> {
    let (p, n, q) = (f.p(), f.n(), f.q());
    let one = CyclotomicInteger::one(p, n);
    let mut acc = vec![one.clone()];
    acc.resize(d + 1, CyclotomicInteger::zero(p, n));
    let mut factor = |c: usize, e: usize| {
        let a = CyclotomicInteger::zeta_power(p, n, c as i64);
        let mut series = vec![CyclotomicInteger::zero(p, n); d + 1];
        let mut pw = one.clone();
        for i in (0..=d).step_by(e) {
            series[i] = pw.clone();
            pw = &pw * &a;
        }
        acc = truncated_mul(&acc, &series, d + 1);
    };
    if !f.places().contains(&newton_hodge::character::Place::Infinity) {
        let ev = f.evaluator(1).unwrap();
        let w = WittStructure::get(p, n as usize).unwrap();
        let c = w.to_residue(&w.trace(ev.field(), ev.at_infinity().unwrap()).unwrap()).unwrap();
        factor(c as usize, 1);
    }
    for e in 1..=d as u32 {
        let field = f.evaluator(e).unwrap().field().clone();
        for i in 0..field.size() {
            let x = field.element_at(i);
            // orbit under x ↦ x^q; keep the smallest index as representative
            let mut orbit = vec![i];
            let mut y = field.pow(&x, q);
            while y != x {
                orbit.push(field.index_of(&y));
                y = field.pow(&y, q);
            }
            if orbit.len() != e as usize || orbit.iter().any(|&j| j < i) {
                continue;
            }
            if let Some(c) = residue_at(f, e, &x) {
                factor(c, e as usize);
            }
        }
    }
    acc
}

#[test]
fn newton_identities_match_euler_product() {
    let cases = [
        chr(3, 3, "x^2"),
        chr(5, 5, "x^2"),
        chr(5, 5, "x^3 + 2x"),
        chr(3, 3, "x + x^-1"),
        chr(3, 9, "a x^2"),
        witt2(3, "x", "0"),
        witt2(3, "x", "x"),
    ];
    for f in &cases {
        let l = l_polynomial(f).unwrap();
        assert!(l.degree() <= 2);
        assert_eq!(l.coeffs(), &euler_product(f, l.degree())[..], "{:?}", f.coords());
    }
}

#[test]
fn reduction_preserves_character_sums() {
    for (p, q, e) in [(3, 3, "x^3 + x^-6"), (5, 5, "x^10 + x"), (3, 9, "x^6 + a x^2"), (3, 3, "(x-1)^-3 + x")] {
        let f = chr(p, q, e);
        let g = f.reduce();
        assert!(g.is_reduced());
        for k in 1..=3 {
            assert_eq!(character_sum(&f, k).unwrap(), character_sum(&g, k).unwrap(), "{e} k={k}");
        }
    }
}

#[test]
fn galois_conjugation_matches_scalar_multiple() {
    for (p, e) in [(3u32, "x^2"), (5, "x^4"), (5, "x^3 + x^-1"), (3, "x^5")] {
        let f = chr(p, p as u64, e);
        let l = l_polynomial(&f).unwrap();
        for a in 2..p as i64 {
            let scaled = chr(p, p as u64, &format!("{a}({e})"));
            let la = l_polynomial(&scaled).unwrap();
            let conj: Vec<CyclotomicInteger> = l.coeffs().iter().map(|c| c.conjugate(a)).collect();
            assert_eq!(la.coeffs(), &conj[..]);
            assert_eq!(l_polynomial_of_power(&f, a as u64).unwrap().coeffs(), &conj[..]);
        }
    }
}

fn symmetric(np: &SlopePolygon) -> bool {
    let mut flipped: Vec<Rational> = np.slopes().iter().map(|s| rat_int(1) - s).collect();
    flipped.sort();
    flipped == np.slopes()
}

#[test]
fn bounds_and_functional_equation_hold() {
    let cases = [
        chr(5, 5, "x^4"),
        chr(3, 3, "x^5"),
        chr(5, 5, "x^2 + x^-2"),
        chr(3, 3, "x^5 + x^-2"),
        chr(3, 3, "x^4 + (x-1)^-1"),
        chr(7, 7, "x^3"),
        chr(3, 9, "x^4 + a x"),
        witt2(3, "x", "0"),
        witt2(3, "x^2", "x"),
    ];
    for f in &cases {
        let np = l_polynomial(f).unwrap().newton_polygon().unwrap();
        let hp = hodge_polygon(f).unwrap();
        assert!(np.lies_on_or_above(&hp).unwrap(), "{np} vs {hp}");
        assert!(np.shares_terminal_point(&hp).unwrap());
        assert!(symmetric(&np), "{np}");
    }
}

#[test]
fn touching_examples() {
    let rep = check_touching(&chr(5, 5, "x^2 + x^-2"), &rat_int(1)).unwrap();
    assert!(rep.global && rep.theorem_consistent);
    assert_eq!(rep.locals.len(), 2);
    assert!(rep.locals.iter().all(|l| l.touching));

    let rep = check_touching(&chr(3, 3, "x^5"), &rat(2, 5)).unwrap();
    assert!(!rep.global && !rep.locals[0].touching && rep.theorem_consistent);
}

#[test]
fn order_p_squared_example() {
    let f = witt2(3, "x", "0");
    let rep = check_equality(&f).unwrap();
    assert!(rep.predicted && rep.observed);
    assert_eq!(rep.np.slopes(), &[rat(1, 3), rat(2, 3)]);
}

#[test]
fn zeta_of_artin_schreier_curve() {
    let z = zeta_cover(&chr(3, 3, "x^2")).unwrap();
    assert_eq!(z.product, vec![BigInt::from(1), BigInt::from(0), BigInt::from(3)]);
    assert_eq!(z.point_counts[0], (1, BigInt::from(4), BigInt::from(4)));
    assert_eq!(z.point_counts.len(), 2);
    let nps: Vec<SlopePolygon> = z.factors.iter().map(|l| l.newton_polygon().unwrap()).collect();
    let joined = nps[0].concat(&nps[1]).unwrap();
    assert_eq!(joined.slopes(), &[rat(1, 2), rat(1, 2)]);
}

#[test]
fn zeta_of_larger_covers() {
    for f in [chr(5, 5, "x^3"), chr(3, 3, "x^2 + x^-1"), witt2(3, "x^2", "0")] {
        let z = zeta_cover(&f).unwrap();
        assert_eq!(z.point_counts.len(), 2);
        assert_eq!(z.product[0], BigInt::from(1));
    }
}
