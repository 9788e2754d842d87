//! p-typical Witt vectors of length `n` over any commutative ring.
//!
//! The addition and multiplication polynomials are obtained from the ghost
//! components `w_i = Σ_{j≤i} p^j x_j^{p^{i-j}}` by solving triangularly, which
//! requires dividing by `p^i`; a non-exact division is reported as an error
//! because it can only come from a bug.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::is_prime;
use crate::ff::{FFElem, FieldParams};

/// A commutative ring the Witt polynomials can be evaluated in.
pub trait CoeffRing {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn from_bigint(&self, c: &BigInt) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// The ring of rational integers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl CoeffRing for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn from_bigint(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
}

impl CoeffRing for FieldParams {
    type Elem = FFElem;

    fn zero(&self) -> FFElem {
        FieldParams::zero(self)
    }
    fn one(&self) -> FFElem {
        FieldParams::one(self)
    }
    fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FieldParams::add(self, a, b)
    }
    fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FieldParams::mul(self, a, b)
    }
    fn from_bigint(&self, c: &BigInt) -> FFElem {
        let r = c.mod_floor(&BigInt::from(self.p()));
        self.from_int(r.to_i64().unwrap())
    }
    fn pow(&self, a: &FFElem, e: u64) -> FFElem {
        FieldParams::pow(self, a, e)
    }
}

/// Integer polynomial in a fixed number of variables, keyed by exponent vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self { nvars, terms: BTreeMap::from([(e, BigInt::one())]) }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn insert(&mut self, e: Vec<u32>, c: BigInt) {
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc: HashMap<Vec<u32>, BigInt> = HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += c1 * c2;
            }
        }
        Self { nvars: self.nvars, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self { nvars: self.nvars, terms: BTreeMap::from([(vec![0; self.nvars], BigInt::one())]) };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(e.clone(), q);
        }
        Some(Self { nvars: self.nvars, terms })
    }

    /// Substitutes the polynomials `subs[i]` for the variables.
    pub fn compose(&self, subs: &[IntPoly]) -> IntPoly {
        let nv = subs[0].nvars;
        let mut out = IntPoly::zero(nv);
        for (e, c) in &self.terms {
            let mut term = IntPoly { nvars: nv, terms: BTreeMap::from([(vec![0; nv], c.clone())]) };
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = term.mul(&subs[i].pow(k as u64));
                }
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval<R: CoeffRing>(&self, ring: &R, vals: &[R::Elem]) -> R::Elem {
        let mut acc = ring.zero();
        for (e, c) in &self.terms {
            let mut t = ring.from_bigint(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = ring.mul(&t, &ring.pow(&vals[i], k as u64));
                }
            }
            acc = ring.add(&acc, &t);
        }
        acc
    }
}

/// Ghost polynomial `w_i` in the variables `offset..offset+n`.
fn ghost(p: u64, i: usize, nvars: usize, offset: usize) -> IntPoly {
    let mut w = IntPoly::zero(nvars);
    for j in 0..=i {
        let coeff = BigInt::from(p).pow(j as u32);
        let term = IntPoly::var(nvars, offset + j).pow(p.pow((i - j) as u32)).scale(&coeff);
        w = w.add(&term);
    }
    w
}

/// Addition and multiplication polynomials of `W_n` for a prime `p`.
#[derive(Debug, Clone)]
pub struct WittStructure {
    p: u32,
    n: usize,
    sum_polys: Vec<IntPoly>,
    prod_polys: Vec<IntPoly>,
}

fn structure_cache() -> &'static Mutex<HashMap<(u32, usize), Arc<WittStructure>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<WittStructure>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl WittStructure {
    pub fn build(p: u32, n: usize) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        if n == 0 || n > 4 {
            return Err(Error::InvalidParameter(format!("Witt length {n} outside 1..=4")));
        }
        let nv = 2 * n;
        let pb = p as u64;
        let mut sum_polys: Vec<IntPoly> = Vec::with_capacity(n);
        let mut prod_polys: Vec<IntPoly> = Vec::with_capacity(n);
        for i in 0..n {
            let wx = ghost(pb, i, nv, 0);
            let wy = ghost(pb, i, nv, n);
            let mut s = wx.add(&wy);
            let mut m = wx.mul(&wy);
            for j in 0..i {
                let c = BigInt::from(pb).pow(j as u32);
                let e = pb.pow((i - j) as u32);
                s = s.sub(&sum_polys[j].pow(e).scale(&c));
                m = m.sub(&prod_polys[j].pow(e).scale(&c));
            }
            let d = BigInt::from(pb).pow(i as u32);
            let si = s.div_exact(&d).ok_or_else(|| {
                Error::Integrality(format!("Witt sum polynomial S_{i} for p={p} is not integral"))
            })?;
            let pi = m.div_exact(&d).ok_or_else(|| {
                Error::Integrality(format!("Witt product polynomial P_{i} for p={p} is not integral"))
            })?;
            sum_polys.push(si);
            prod_polys.push(pi);
        }
        let st = Self { p, n, sum_polys, prod_polys };
        if n <= 3 {
            st.check_ghost_identities()?;
        }
        Ok(st)
    }

    /// Shared, cached instance of [`WittStructure::build`].
    pub fn get(p: u32, n: usize) -> Result<Arc<Self>> {
        if let Some(s) = structure_cache().lock().unwrap().get(&(p, n)) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::build(p, n)?);
        structure_cache().lock().unwrap().insert((p, n), s.clone());
        Ok(s)
    }

    /// `w_i(S(x,y)) = w_i(x) + w_i(y)` and `w_i(P(x,y)) = w_i(x) w_i(y)` as
    /// polynomial identities.
    fn check_ghost_identities(&self) -> Result<()> {
        let nv = 2 * self.n;
        let pb = self.p as u64;
        for i in 0..self.n {
            let w = ghost(pb, i, self.n, 0);
            let wx = ghost(pb, i, nv, 0);
            let wy = ghost(pb, i, nv, self.n);
            if w.compose(&self.sum_polys) != wx.add(&wy) || w.compose(&self.prod_polys) != wx.mul(&wy) {
                return Err(Error::Integrality(format!("ghost identity fails at level {i}")));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sum_polys(&self) -> &[IntPoly] {
        &self.sum_polys
    }

    pub fn prod_polys(&self) -> &[IntPoly] {
        &self.prod_polys
    }

    fn check_len<E>(&self, a: &[E]) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::StructureMismatch(format!(
                "Witt vector of length {} used with W_{}",
                a.len(),
                self.n
            )));
        }
        Ok(())
    }

    fn apply<R: CoeffRing>(&self, polys: &[IntPoly], ring: &R, a: &[R::Elem], b: &[R::Elem]) -> Result<Vec<R::Elem>> {
        self.check_len(a)?;
        self.check_len(b)?;
        let vals: Vec<R::Elem> = a.iter().chain(b).cloned().collect();
        Ok(polys.iter().map(|poly| poly.eval(ring, &vals)).collect())
    }

    pub fn add<R: CoeffRing>(&self, ring: &R, a: &[R::Elem], b: &[R::Elem]) -> Result<Vec<R::Elem>> {
        self.apply(&self.sum_polys, ring, a, b)
    }

    pub fn mul<R: CoeffRing>(&self, ring: &R, a: &[R::Elem], b: &[R::Elem]) -> Result<Vec<R::Elem>> {
        self.apply(&self.prod_polys, ring, a, b)
    }

    pub fn zero<R: CoeffRing>(&self, ring: &R) -> Vec<R::Elem> {
        vec![ring.zero(); self.n]
    }

    pub fn one<R: CoeffRing>(&self, ring: &R) -> Vec<R::Elem> {
        let mut v = self.zero(ring);
        v[0] = ring.one();
        v
    }

    /// Ghost components `(w_0(a), …, w_{n-1}(a))`.
    pub fn ghost_components<R: CoeffRing>(&self, ring: &R, a: &[R::Elem]) -> Result<Vec<R::Elem>> {
        self.check_len(a)?;
        Ok((0..self.n).map(|i| ghost(self.p as u64, i, self.n, 0).eval(ring, a)).collect())
    }

    /// Componentwise `p`-th power, which is the Witt Frobenius over a perfect
    /// field of characteristic `p` (not over general rings).
    pub fn frobenius(&self, field: &FieldParams, a: &[FFElem]) -> Vec<FFElem> {
        a.iter().map(|x| field.frobenius(x)).collect()
    }

    /// `Σ_{i<m} F^i(a)` for `a ∈ W_n(F_{p^m})`, landing in `W_n(F_p)`.
    pub fn trace(&self, field: &FieldParams, a: &[FFElem]) -> Result<Vec<u32>> {
        self.check_len(a)?;
        if field.p() != self.p {
            return Err(Error::StructureMismatch(format!(
                "field of characteristic {} used with p={}",
                field.p(),
                self.p
            )));
        }
        let mut acc = a.to_vec();
        let mut conj = a.to_vec();
        for _ in 1..field.k() {
            conj = self.frobenius(field, &conj);
            acc = self.add(field, &acc, &conj)?;
        }
        debug_assert!(acc.iter().all(|c| field.in_prime_field(c)));
        Ok(acc.iter().map(|c| c.coeffs()[0]).collect())
    }

    /// The isomorphism `W_n(F_p) → Z/p^nZ`, `a ↦ Σ p^i τ(a_i)`.
    pub fn to_residue(&self, a: &[u32]) -> Result<u64> {
        self.check_len(a)?;
        let p = self.p as u64;
        let modulus = p.pow(self.n as u32);
        let mut acc = 0u64;
        let mut pi = 1u64;
        for &c in a {
            acc = (acc + pi * teichmuller_mod(c as u64 % p, p, modulus, self.n as u32)) % modulus;
            pi *= p;
        }
        Ok(acc)
    }
}

/// Teichmüller lift of `a ∈ F_p` modulo `modulus = p^n`, as `a^{p^{n-1}}`.
pub fn teichmuller_mod(a: u64, p: u64, modulus: u64, n: u32) -> u64 {
    let mut t = a % modulus;
    for _ in 1..n {
        t = pow_mod(t, p, modulus);
    }
    t
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128 % m as u128;
    let mut base = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    b = r as u64;
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exps(v: &[u32]) -> Vec<u32> {
        v.to_vec()
    }

    #[test]
    fn sum_polynomials_low_levels() {
        for p in [2, 3, 5] {
            let w = WittStructure::build(p, 1).unwrap();
            assert_eq!(w.sum_polys()[0], IntPoly::var(2, 0).add(&IntPoly::var(2, 1)));
        }
        // variables: x0, x1, y0, y1
        let w = WittStructure::build(2, 2).unwrap();
        let s1 = &w.sum_polys()[1];
        assert_eq!(s1.num_terms(), 3);
        assert_eq!(s1.coeff(&exps(&[0, 1, 0, 0])), BigInt::one());
        assert_eq!(s1.coeff(&exps(&[0, 0, 0, 1])), BigInt::one());
        assert_eq!(s1.coeff(&exps(&[1, 0, 1, 0])), BigInt::from(-1));

        let w = WittStructure::build(3, 2).unwrap();
        let s1 = &w.sum_polys()[1];
        assert_eq!(s1.num_terms(), 4);
        assert_eq!(s1.coeff(&exps(&[2, 0, 1, 0])), BigInt::from(-1));
        assert_eq!(s1.coeff(&exps(&[1, 0, 2, 0])), BigInt::from(-1));
    }

    #[test]
    fn identities_and_guards() {
        let w = WittStructure::get(3, 3).unwrap();
        let a = vec![BigInt::from(4), BigInt::from(-7), BigInt::from(2)];
        assert_eq!(w.add(&Integers, &a, &w.zero(&Integers)).unwrap(), a);
        assert_eq!(w.mul(&Integers, &w.one(&Integers), &a).unwrap(), a);
        assert!(WittStructure::build(3, 5).is_err());
        assert!(matches!(w.add(&Integers, &a, &a[..2]), Err(Error::StructureMismatch(_))));
    }

    #[test]
    fn residue_examples() {
        let w = WittStructure::get(3, 2).unwrap();
        assert_eq!(w.to_residue(&[1, 0]).unwrap(), 1);
        assert_eq!(w.to_residue(&[1, 1]).unwrap(), 4);
        assert_eq!(w.to_residue(&[0, 0]).unwrap(), 0);
        // τ(2) = 2^3 = 8 ≡ -1 mod 9
        assert_eq!(w.to_residue(&[2, 0]).unwrap(), 8);
    }

    #[test]
    fn trace_over_prime_field_is_identity() {
        let f = FieldParams::get(3, 1).unwrap();
        let w = WittStructure::get(3, 2).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let v = vec![f.from_int(a), f.from_int(b)];
                assert_eq!(w.trace(&f, &v).unwrap(), vec![a as u32, b as u32]);
            }
        }
    }
}
