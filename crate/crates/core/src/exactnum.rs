//! Exact arithmetic in `Z[ζ_{p^n}]` and exact rationals.
//!
//! A cyclotomic integer is stored in the power basis `1, ζ, …, ζ^{e-1}` with
//! `e = p^{n-1}(p-1)`, i.e. as a residue of `Z[x]` modulo `Φ_{p^n}(x)`. The
//! uniformizer of the unique prime above `p` is `π = ζ - 1`, and
//! [`CyclotomicInteger::pi_valuation`] divides by it exactly, using that
//! `Φ_{p^n}(1) = p`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for the rational `num/den`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A valuation value: a non-negative rational or `+∞` (for zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `a` with `q = p^a`, or `None` if `q` is not a positive power of `p`.
pub fn prime_power_exponent(q: u64, p: u64) -> Option<u32> {
    if p < 2 || q < p {
        return None;
    }
    let mut a = 0;
    let mut r = q;
    while r % p == 0 {
        r /= p;
        a += 1;
    }
    (r == 1).then_some(a)
}

/// `p`-adic valuation of a nonzero integer.
pub fn int_valuation(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

/// An element of `Z[ζ_{p^n}]` in the power basis modulo `Φ_{p^n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInteger {
    p: u32,
    n: u32,
    coeffs: Vec<BigInt>,
}

/// Degree `p^{n-1}(p-1)` of `Q(ζ_{p^n})`.
pub fn cyclotomic_degree(p: u32, n: u32) -> usize {
    (p as usize).pow(n - 1) * (p as usize - 1)
}

/// Coefficients of `Φ_{p^n}(x) = Σ_{i<p} x^{i p^{n-1}}`, low degree first.
fn cyclotomic_polynomial(p: u32, n: u32) -> Vec<BigInt> {
    let step = (p as usize).pow(n - 1);
    let mut phi = vec![BigInt::zero(); cyclotomic_degree(p, n) + 1];
    for i in 0..p as usize {
        phi[i * step] = BigInt::one();
    }
    phi
}

/// Reduces an integer polynomial of any degree modulo `Φ_{p^n}`.
fn reduce_mod_phi(p: u32, n: u32, mut v: Vec<BigInt>) -> Vec<BigInt> {
    let e = cyclotomic_degree(p, n);
    let step = (p as usize).pow(n - 1);
    // x^e = -Σ_{i<p-1} x^{i p^{n-1}}
    for k in (e..v.len()).rev() {
        if v[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut v[k]);
        for i in 0..(p as usize - 1) {
            v[k - e + i * step] -= &c;
        }
    }
    v.truncate(e);
    v.resize(e, BigInt::zero());
    v
}

impl CyclotomicInteger {
    pub fn zero(p: u32, n: u32) -> Self {
        assert!(is_prime(p as u64) && n >= 1, "invalid cyclotomic parameters p={p}, n={n}");
        Self { p, n, coeffs: vec![BigInt::zero(); cyclotomic_degree(p, n)] }
    }

    pub fn one(p: u32, n: u32) -> Self {
        Self::from_int(p, n, 1)
    }

    pub fn from_int(p: u32, n: u32, c: i64) -> Self {
        Self::from_bigint(p, n, BigInt::from(c))
    }

    pub fn from_bigint(p: u32, n: u32, c: BigInt) -> Self {
        let mut z = Self::zero(p, n);
        z.coeffs[0] = c;
        z
    }

    /// Builds an element from power-basis coefficients of any length; the
    /// polynomial is reduced modulo `Φ_{p^n}`.
    pub fn from_coeffs(p: u32, n: u32, coeffs: Vec<BigInt>) -> Self {
        let z = Self::zero(p, n);
        Self { coeffs: reduce_mod_phi(p, n, coeffs), ..z }
    }

    pub fn from_i64_coeffs(p: u32, n: u32, coeffs: &[i64]) -> Self {
        Self::from_coeffs(p, n, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `ζ^k` for any integer `k`.
    pub fn zeta_power(p: u32, n: u32, k: i64) -> Self {
        let m = (p as i64).pow(n);
        let mut v = vec![BigInt::zero(); m as usize];
        v[k.rem_euclid(m) as usize] = BigInt::one();
        Self::from_coeffs(p, n, v)
    }

    pub fn zeta(p: u32, n: u32) -> Self {
        Self::zeta_power(p, n, 1)
    }

    /// The uniformizer `π = ζ - 1`.
    pub fn pi(p: u32, n: u32) -> Self {
        Self::zeta(p, n) - Self::one(p, n)
    }

    /// `Σ_j counts[j] ζ^j` for a vector indexed by residues mod `p^n`.
    pub fn from_residue_counts(p: u32, n: u32, counts: &[u64]) -> Self {
        Self::from_coeffs(p, n, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| self.coeffs[0].clone())
    }

    fn check_same(&self, other: &Self) {
        assert!(
            self.p == other.p && self.n == other.n,
            "cyclotomic parameter mismatch: ({}, {}) vs ({}, {})",
            self.p,
            self.n,
            other.p,
            other.n
        );
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    /// Exact division by a rational integer, if it divides every coefficient.
    pub fn div_exact_int(&self, d: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(Self { coeffs: out, ..self.clone() })
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.p, self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Galois conjugate under `ζ ↦ ζ^a`, `a` prime to `p`.
    pub fn conjugate(&self, a: i64) -> Self {
        assert!(a.rem_euclid(self.p as i64) != 0, "Galois exponent must be prime to p");
        let m = (self.p as i64).pow(self.n);
        let mut v = vec![BigInt::zero(); m as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[(a * i as i64).rem_euclid(m) as usize] += c;
        }
        Self::from_coeffs(self.p, self.n, v)
    }

    /// Value at `x = 1`; reduced mod `p` this is the residue map `ζ ↦ 1`.
    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn residue(&self) -> u64 {
        self.eval_at_one().mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }

    /// Exact quotient by `π = ζ - 1`, if `π` divides this element.
    pub fn divide_by_pi(&self) -> Option<Self> {
        let p = BigInt::from(self.p);
        let (m, r) = self.eval_at_one().div_rem(&p);
        if !r.is_zero() {
            return None;
        }
        let e = self.coeffs.len();
        let mut poly: Vec<BigInt> = self.coeffs.clone();
        poly.push(BigInt::zero());
        for (a, f) in poly.iter_mut().zip(cyclotomic_polynomial(self.p, self.n)) {
            *a -= &m * f;
        }
        // synthetic division by (x - 1); the remainder poly(1) is zero
        let mut quot = vec![BigInt::zero(); e];
        quot[e - 1] = poly[e].clone();
        for k in (1..e).rev() {
            quot[k - 1] = &poly[k] + &quot[k];
        }
        debug_assert!((&poly[0] + &quot[0]).is_zero());
        Some(Self { coeffs: quot, ..self.clone() })
    }

    /// Largest `k` with `π^k | self`, normalized so that `v_π(π) = 1`.
    pub fn pi_valuation(&self) -> Valuation {
        match self.pi_valuation_u64() {
            Some(k) => Valuation::Finite(Rational::from_integer(BigInt::from(k))),
            None => Valuation::Infinite,
        }
    }

    pub fn pi_valuation_u64(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut k = 0;
        let mut c = self.clone();
        while let Some(next) = c.divide_by_pi() {
            c = next;
            k += 1;
        }
        Some(k)
    }

    /// Valuation normalized so that `v(q) = 1`.
    pub fn q_valuation(&self, q: u64) -> Result<Valuation> {
        let a = prime_power_exponent(q, self.p as u64)
            .ok_or(Error::NotPrimePower { q, p: self.p as u64 })?;
        let scale = (a as i64) * cyclotomic_degree(self.p, self.n) as i64;
        Ok(match self.pi_valuation() {
            Valuation::Finite(v) => Valuation::Finite(v / rat_int(scale)),
            Valuation::Infinite => Valuation::Infinite,
        })
    }
}

impl fmt::Debug for CyclotomicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CyclotomicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}z")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{mag}z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add<&CyclotomicInteger> for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn add(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
        self.check_same(rhs);
        CyclotomicInteger {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }
}

impl Sub<&CyclotomicInteger> for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn sub(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
        self.check_same(rhs);
        CyclotomicInteger {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }
}

impl Mul<&CyclotomicInteger> for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn mul(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
        self.check_same(rhs);
        let e = self.coeffs.len();
        let mut v = vec![BigInt::zero(); 2 * e - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        CyclotomicInteger::from_coeffs(self.p, self.n, v)
    }
}

impl Neg for &CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn neg(self) -> CyclotomicInteger {
        CyclotomicInteger { coeffs: self.coeffs.iter().map(|a| -a).collect(), ..self.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<CyclotomicInteger> for CyclotomicInteger {
            type Output = CyclotomicInteger;
            fn $f(self, rhs: CyclotomicInteger) -> CyclotomicInteger {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&CyclotomicInteger> for CyclotomicInteger {
            type Output = CyclotomicInteger;
            fn $f(self, rhs: &CyclotomicInteger) -> CyclotomicInteger {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CyclotomicInteger {
    type Output = CyclotomicInteger;
    fn neg(self) -> CyclotomicInteger {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(p: u32, n: u32, c: &[i64]) -> CyclotomicInteger {
        CyclotomicInteger::from_i64_coeffs(p, n, c)
    }

    #[test]
    fn pi_valuation_examples() {
        assert_eq!(ci(3, 1, &[3]).pi_valuation(), Valuation::Finite(rat_int(2)));
        assert_eq!(CyclotomicInteger::pi(3, 1).pi_valuation(), Valuation::Finite(rat_int(1)));
        assert_eq!(ci(3, 1, &[1, 2]).pi_valuation(), Valuation::Finite(rat_int(1)));
        assert_eq!(CyclotomicInteger::zero(3, 1).pi_valuation(), Valuation::Infinite);
        assert_eq!(ci(3, 2, &[3]).pi_valuation_u64(), Some(6));
        assert_eq!(ci(5, 1, &[25]).pi_valuation_u64(), Some(8));
    }

    #[test]
    fn one_plus_two_zeta_divides_twice_into_a_unit() {
        // N(1+2ζ) = Φ_3(-2) = 3, so exactly one factor of π
        let c = ci(3, 1, &[1, 2]);
        let q = c.divide_by_pi().unwrap();
        assert_eq!(&q * &CyclotomicInteger::pi(3, 1), c);
        assert!(q.divide_by_pi().is_none());
    }

    #[test]
    fn q_valuation_examples() {
        assert_eq!(ci(3, 1, &[3]).q_valuation(3).unwrap(), Valuation::Finite(rat_int(1)));
        assert_eq!(ci(3, 1, &[1, 2]).q_valuation(3).unwrap(), Valuation::Finite(rat(1, 2)));
        assert_eq!(ci(3, 2, &[3]).q_valuation(3).unwrap(), Valuation::Finite(rat_int(1)));
        assert_eq!(ci(3, 1, &[3]).q_valuation(9).unwrap(), Valuation::Finite(rat(1, 2)));
        assert!(matches!(ci(3, 1, &[3]).q_valuation(6), Err(Error::NotPrimePower { .. })));
    }

    #[test]
    fn full_character_sum_vanishes() {
        let s = CyclotomicInteger::from_residue_counts(3, 1, &[1, 1, 1]);
        assert!(s.is_zero());
        let s = CyclotomicInteger::from_residue_counts(3, 2, &[1; 9]);
        assert!(s.is_zero());
    }

    #[test]
    fn conjugation_permutes_roots() {
        let z = CyclotomicInteger::zeta(5, 1);
        assert_eq!(z.conjugate(2), CyclotomicInteger::zeta_power(5, 1, 2));
        let c = ci(3, 2, &[1, -2, 0, 4, 1, 7]);
        let d = ci(3, 2, &[0, 3, 1, 1, -1, 2]);
        assert_eq!((&c * &d).conjugate(4), &c.conjugate(4) * &d.conjugate(4));
        assert_eq!(c.conjugate(2).conjugate(5), c);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(ci(3, 1, &[1, 2]).to_string(), "1 + 2z");
        assert_eq!(ci(5, 1, &[0, -1, 0, 1]).to_string(), "-z + z^3");
        assert_eq!(CyclotomicInteger::zero(3, 1).to_string(), "0");
    }
}
