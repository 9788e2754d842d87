use newton_hodge::character::AswCharacter;
use newton_hodge::dwork::{
    block_periodicity_check, dwork_pi, frobenius_structure, hodge_bound_check, local_np_oracle, splitting_function,
    theta_matrix, Growth, OracleParams,
};
use newton_hodge::exactnum::{rat, rat_int, Rational};
use newton_hodge::lfunction::l_polynomial;
use newton_hodge::valmat::{ValuedScalar, ValuedMatrix};
use num_traits::Zero;

fn chr(p: u32, e: &str) -> AswCharacter {
    AswCharacter::parse(p, p as u64, e).unwrap()
}

fn params(m_prime: usize, precision: u64) -> OracleParams {
    OracleParams { m_prime, precision }
}

#[test]
fn oracle_matches_character_sums() {
    for (p, e) in [(5, "x^4"), (3, "x^2"), (3, "x^5"), (5, "x^3 + 2x"), (7, "x^2")] {
        let f = chr(p, e);
        let want = l_polynomial(&f).unwrap().newton_polygon().unwrap().truncate_below(&rat_int(1));
        let rep = local_np_oracle(&f, &rat_int(1), params(40, 60)).unwrap();
        assert!(rep.stabilized);
        assert_eq!(rep.np(), &want, "p={p} f={e}");
        assert_eq!(rep.run.c_polygon.slopes()[0], Rational::zero());
    }
}

#[test]
fn fredholm_factors_off_the_constant_vector() {
    // row 0 of Θ is (1, 0, …), so C(s) = (1 - s) C_tr(s)
    let pi = dwork_pi(5, 40).unwrap();
    let e = frobenius_structure(&[(4, 1)], &pi, 5 * 9).unwrap();
    let t = theta_matrix(&e, 10).unwrap();
    let full = t.fredholm_coefficients(None);
    let idx: Vec<usize> = (1..10).collect();
    let tr = t.principal_submatrix(&idx).fredholm_coefficients(None);
    for k in 1..full.len() {
        let prev = tr.get(k - 1).cloned().unwrap_or_else(|| full[0].zero_like());
        let cur = tr.get(k).cloned().unwrap_or_else(|| full[0].zero_like());
        assert_eq!(full[k], cur.sub(&prev));
    }
}

#[test]
fn hodge_bound_and_block_periodicity() {
    for (p, e) in [(5, "x^4"), (3, "x^5")] {
        let rep = hodge_bound_check(&chr(p, e), &rat_int(1), params(40, 60)).unwrap();
        assert!(rep.passed, "{}", rep.detail);
    }
    let rep = hodge_bound_check(&chr(3, "x^2"), &rat_int(1), params(40, 60)).unwrap();
    assert_eq!(rep.np.slopes()[0], rat_int(1));
    assert!(rep.passed);
    for blocks in 1..=2 {
        let rep = block_periodicity_check(&chr(5, "x^4"), blocks, params(40, 60)).unwrap();
        assert!(rep.passed, "{}", rep.detail);
    }
}

fn bound_holds(coeffs: &[newton_hodge::dwork::PadicScalar], g: &Growth) -> Option<usize> {
    coeffs.iter().enumerate().find_map(|(k, c)| match c.valuation() {
        Some(v) if rat_int(v as i64) < g.bound(k) => Some(k),
        _ => None,
    })
}

#[test]
fn growth_of_splitting_functions() {
    for p in [3u32, 5, 7] {
        let pi = dwork_pi(p, 120).unwrap();
        let th = splitting_function(&pi, 300).unwrap();
        let pp = p as i64;
        let loose = Growth { m: rat(pp * pp, pp - 1), b: Rational::zero() };
        assert_eq!(bound_holds(&th.coeffs, &loose), None);
        assert_eq!(bound_holds(&th.coeffs, th.growth.as_ref().unwrap()), None);
    }
}

#[test]
fn growth_of_frobenius_structures() {
    for (p, terms) in [(3u32, vec![(1usize, 1u64)]), (3, vec![(5, 1)]), (5, vec![(4, 1)]), (5, vec![(1, 2), (3, 1)])] {
        let d = terms.iter().map(|t| t.0).max().unwrap() as i64;
        let pi = dwork_pi(p, 120).unwrap();
        let e = frobenius_structure(&terms, &pi, 300).unwrap();
        assert_eq!(bound_holds(&e.coeffs, e.growth.as_ref().unwrap()), None);
        let pp = p as i64;
        let claimed = Growth { m: rat(pp * d, pp - 1), b: Rational::zero() };
        let first = bound_holds(&e.coeffs, &claimed);
        // the stronger linear bound is false in general
        if p == 3 && terms == [(1, 1)] {
            assert_eq!(first, Some(9));
            assert_eq!(e.coeffs[9].valuation(), Some(5));
        }
    }
}

#[test]
fn theta_matrix_is_u_p_after_multiplication() {
    let pi = dwork_pi(3, 30).unwrap();
    let e = frobenius_structure(&[(2, 1)], &pi, 30).unwrap();
    let t: ValuedMatrix<_> = theta_matrix(&e, 6).unwrap();
    for m in 0..6 {
        for k in 0..6 {
            let want = if 3 * m >= k { e.coeffs[3 * m - k] } else { pi.pi.zero_like() };
            assert_eq!(*t.get(m, k), want);
        }
    }
}
