//! Square matrices over a discretely valued scalar ring, and their column
//! Hodge, Hodge and Newton polygons.
//!
//! Valuations are measured in the uniformizer of the scalar model. Models of
//! finite precision report a vanishing value as "at least the precision";
//! polygon computations that would depend on such a value fail with
//! [`Error::Precision`] instead of guessing.

use std::collections::HashMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::{rat_int, CyclotomicInteger, Rational};
use crate::polygon::{PolygonUnit, SlopePolygon};

/// Scalar model with exact ring operations and a discrete valuation.
pub trait ValuedScalar: Clone + PartialEq + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Valuation of a nonzero value, `None` for zero.
    fn valuation(&self) -> Option<u64>;
    /// Values are known modulo `π^precision`; `None` for exact models.
    fn precision(&self) -> Option<u64> {
        None
    }
    /// `self / d` when `v(d) ≤ v(self)`.
    fn divide_exact(&self, _d: &Self) -> Option<Self> {
        None
    }
    fn unit(&self) -> PolygonUnit {
        PolygonUnit::Abstract
    }

    fn val(&self) -> Val {
        match (self.valuation(), self.precision()) {
            (Some(v), _) => Val::Exact(v),
            (None, Some(c)) => Val::AtLeast(c),
            (None, None) => Val::Infinite,
        }
    }
}

/// Models carrying a Frobenius automorphism.
pub trait Frobenius: ValuedScalar {
    fn frobenius(&self) -> Self;
}

/// What is known about a valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    Exact(u64),
    /// The value vanishes to the working precision.
    AtLeast(u64),
    Infinite,
}

impl Val {
    pub fn min(self, o: Val) -> Val {
        use Val::*;
        match (self, o) {
            (Infinite, x) | (x, Infinite) => x,
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a <= b {
                    Exact(a)
                } else {
                    AtLeast(b)
                }
            }
        }
    }

    /// Whether the valuation is `< r`, if that is decided.
    pub fn below(self, r: &Rational) -> Result<bool> {
        match self {
            Val::Exact(v) => Ok(&rat_int(v as i64) < r),
            Val::Infinite => Ok(false),
            Val::AtLeast(c) if &rat_int(c as i64) >= r => Ok(false),
            Val::AtLeast(c) => Err(Error::Precision(format!("valuation known only to be >= {c}, compared with {r}"))),
        }
    }
}

/// `Z/p^N` as a model of `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZpInt {
    v: u64,
    p: u64,
    n: u32,
    m: u64,
}

impl ZpInt {
    pub fn new(v: i128, p: u64, n: u32) -> Self {
        let m = p.checked_pow(n).filter(|m| *m < (1 << 62)).expect("modulus p^N must fit in 62 bits");
        Self { v: v.rem_euclid(m as i128) as u64, p, n, m }
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    fn with(&self, v: u64) -> Self {
        Self { v, ..*self }
    }

    fn inv_unit(&self) -> Self {
        // Newton iteration for 1/u mod p^N
        let mut x = self.with(mod_inverse(self.v % self.p, self.p));
        let two = self.with(2 % self.m);
        for _ in 0..7 {
            x = x.mul(&two.sub(&self.mul(&x)));
        }
        debug_assert_eq!(self.mul(&x).v, 1 % self.m);
        x
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, m as i128, a as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(m as i128) as u64
}

impl ValuedScalar for ZpInt {
    fn zero_like(&self) -> Self {
        self.with(0)
    }
    fn one_like(&self) -> Self {
        self.with(1 % self.m)
    }
    fn add(&self, o: &Self) -> Self {
        self.with((self.v + o.v) % self.m)
    }
    fn sub(&self, o: &Self) -> Self {
        self.with((self.v + self.m - o.v) % self.m)
    }
    fn mul(&self, o: &Self) -> Self {
        self.with(((self.v as u128 * o.v as u128) % self.m as u128) as u64)
    }
    fn neg(&self) -> Self {
        self.with((self.m - self.v) % self.m)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn valuation(&self) -> Option<u64> {
        if self.v == 0 {
            return None;
        }
        let mut x = self.v;
        let mut k = 0;
        while x % self.p == 0 {
            x /= self.p;
            k += 1;
        }
        Some(k)
    }
    fn precision(&self) -> Option<u64> {
        Some(self.n as u64)
    }
    fn divide_exact(&self, d: &Self) -> Option<Self> {
        let vd = d.valuation()?;
        if self.is_zero() {
            return Some(self.with(0));
        }
        if self.valuation()? < vd {
            return None;
        }
        let pk = self.p.pow(vd as u32);
        Some(self.with(self.v / pk).mul(&d.with(d.v / pk).inv_unit()))
    }
}

impl Frobenius for ZpInt {
    fn frobenius(&self) -> Self {
        *self
    }
}

/// `Z_p[t]/(t² - ν)` modulo `p^N` with `ν` a non-square mod `p`: a model of
/// the unramified quadratic extension, with Frobenius `t ↦ -t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zq2 {
    a: ZpInt,
    b: ZpInt,
    nu: u64,
}

impl Zq2 {
    pub fn new(a: i128, b: i128, p: u64, n: u32) -> Self {
        assert!(p % 2 == 1, "the quadratic model needs an odd prime");
        let nu = (2..p).find(|&c| pow_mod(c, (p - 1) / 2, p) == p - 1).unwrap();
        Self { a: ZpInt::new(a, p, n), b: ZpInt::new(b, p, n), nu }
    }

    pub fn parts(&self) -> (ZpInt, ZpInt) {
        (self.a, self.b)
    }

    /// `t² = ν`.
    pub fn nu(&self) -> u64 {
        self.nu
    }

    fn with(&self, a: ZpInt, b: ZpInt) -> Self {
        Self { a, b, nu: self.nu }
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut r, mut b) = (1u128, b as u128 % m as u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    r as u64
}

impl ValuedScalar for Zq2 {
    fn zero_like(&self) -> Self {
        self.with(self.a.zero_like(), self.a.zero_like())
    }
    fn one_like(&self) -> Self {
        self.with(self.a.one_like(), self.a.zero_like())
    }
    fn add(&self, o: &Self) -> Self {
        self.with(self.a.add(&o.a), self.b.add(&o.b))
    }
    fn sub(&self, o: &Self) -> Self {
        self.with(self.a.sub(&o.a), self.b.sub(&o.b))
    }
    fn mul(&self, o: &Self) -> Self {
        let nu = self.a.with(self.nu % self.a.m);
        let a = self.a.mul(&o.a).add(&nu.mul(&self.b.mul(&o.b)));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a));
        self.with(a, b)
    }
    fn neg(&self) -> Self {
        self.with(self.a.neg(), self.b.neg())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn valuation(&self) -> Option<u64> {
        match (self.a.valuation(), self.b.valuation()) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }
    fn precision(&self) -> Option<u64> {
        self.a.precision()
    }
    fn divide_exact(&self, d: &Self) -> Option<Self> {
        // 1/d = conj(d) / N(d)
        let conj = d.frobenius();
        let nu = self.a.with(self.nu % self.a.m);
        let norm = d.a.mul(&d.a).sub(&nu.mul(&d.b.mul(&d.b)));
        let num = self.mul(&conj);
        Some(self.with(num.a.divide_exact(&norm)?, num.b.divide_exact(&norm)?))
    }
}

impl Frobenius for Zq2 {
    fn frobenius(&self) -> Self {
        self.with(self.a, self.b.neg())
    }
}

impl ValuedScalar for CyclotomicInteger {
    fn zero_like(&self) -> Self {
        CyclotomicInteger::zero(self.p(), self.n())
    }
    fn one_like(&self) -> Self {
        CyclotomicInteger::one(self.p(), self.n())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        CyclotomicInteger::is_zero(self)
    }
    fn valuation(&self) -> Option<u64> {
        self.pi_valuation_u64()
    }
    fn unit(&self) -> PolygonUnit {
        PolygonUnit::PiAdic { p: self.p(), n: self.n() }
    }
}

/// Square matrix, row-major. Column `j` is the image of the basis vector `e_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuedMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: ValuedScalar> ValuedMatrix<T> {
    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        let mut f = f;
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        Ok(Self { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.n + j] = v;
    }

    fn sample(&self) -> Option<&T> {
        self.entries.first()
    }

    fn unit(&self) -> PolygonUnit {
        self.sample().map(|s| s.unit()).unwrap_or(PolygonUnit::Abstract)
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(f).collect() }
    }

    fn check_shape(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::ShapeMismatch(self.n, o.n));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        Ok(Self { n: self.n, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        Ok(Self { n: self.n, entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check_shape(o)?;
        let n = self.n;
        Ok(Self::from_fn(n, |i, j| {
            let mut acc = self.get(i, 0).zero_like();
            for k in 0..n {
                acc = acc.add(&self.get(i, k).mul(o.get(k, j)));
            }
            acc
        }))
    }

    /// Principal submatrix on `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    pub fn column_vals(&self) -> Vec<Val> {
        (0..self.n)
            .map(|j| (0..self.n).fold(Val::Infinite, |acc, i| acc.min(self.get(i, j).val())))
            .collect()
    }

    /// Slopes `v_π(Ψ e_j)`; zero columns are counted as infinite slopes.
    pub fn column_hodge(&self) -> Result<SlopePolygon> {
        let mut slopes = Vec::new();
        let mut inf = 0;
        for v in self.column_vals() {
            match v {
                Val::Exact(v) => slopes.push(rat_int(v as i64)),
                Val::Infinite => inf += 1,
                Val::AtLeast(c) => return Err(Error::Precision(format!("column vanishes modulo π^{c}"))),
            }
        }
        Ok(SlopePolygon::from_slopes(slopes, self.unit()).with_infinite(inf))
    }

    /// Column Hodge polygon truncated below `r`.
    pub fn column_hodge_below(&self, r: &Rational) -> Result<SlopePolygon> {
        let mut slopes = Vec::new();
        for v in self.column_vals() {
            if v.below(r)? {
                let Val::Exact(v) = v else { unreachable!() };
                slopes.push(rat_int(v as i64));
            }
        }
        Ok(SlopePolygon::from_slopes(slopes, self.unit()))
    }

    /// All `k×k` minors for `k ≤ kmax`, keyed by (row mask, column mask).
    fn minors(&self, kmax: usize) -> Vec<HashMap<(u32, u32), T>> {
        let n = self.n;
        assert!(n <= 16, "minor enumeration is limited to small matrices");
        let one = self.sample().map(|s| s.one_like());
        let mut levels: Vec<HashMap<(u32, u32), T>> = Vec::with_capacity(kmax + 1);
        if let Some(one) = one {
            levels.push(HashMap::from([((0, 0), one)]));
        } else {
            return levels;
        }
        let subsets: Vec<Vec<u32>> = (0..=kmax)
            .map(|k| (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).collect())
            .collect();
        for k in 1..=kmax.min(n) {
            let prev = &levels[k - 1];
            let mut cur = HashMap::with_capacity(subsets[k].len() * subsets[k].len());
            for &rm in &subsets[k] {
                let r = 31 - rm.leading_zeros() as usize;
                let rest = rm & !(1 << r);
                for &cm in &subsets[k] {
                    let mut acc = self.get(0, 0).zero_like();
                    let mut pos = 0;
                    for c in 0..n {
                        if cm & (1 << c) == 0 {
                            continue;
                        }
                        let term = self.get(r, c).mul(&prev[&(rest, cm & !(1 << c))]);
                        acc = if (k - 1 + pos) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                        pos += 1;
                    }
                    cur.insert((rm, cm), acc);
                }
            }
            levels.push(cur);
        }
        levels
    }

    /// `v(∧^k Ψ)` for `k = 0..=n`, the minimum valuation of the `k×k` minors.
    pub fn exterior_power_vals(&self) -> Result<Vec<Val>> {
        if self.n == 0 {
            return Ok(vec![Val::Exact(0)]);
        }
        if self.n <= 8 {
            let levels = self.minors(self.n);
            return Ok(levels
                .iter()
                .map(|lv| lv.values().fold(Val::Infinite, |acc, m| acc.min(m.val())))
                .collect());
        }
        self.elementary_divisor_vals()
    }

    /// Invariant-factor valuations by pivoting on an entry of least valuation.
    fn elementary_divisor_vals(&self) -> Result<Vec<Val>> {
        let mut m: Vec<Vec<T>> = (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut out = vec![Val::Exact(0)];
        let mut total = 0u64;
        while !m.is_empty() {
            let mut best: Option<(usize, usize, u64)> = None;
            let mut cap: Option<u64> = None;
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    match x.val() {
                        Val::Exact(v) if best.is_none_or(|b| v < b.2) => best = Some((i, j, v)),
                        Val::AtLeast(c) => cap = Some(cap.map_or(c, |d: u64| d.min(c))),
                        _ => {}
                    }
                }
            }
            let Some((pi, pj, v)) = best else {
                let rest = m.len();
                for _ in 0..rest {
                    out.push(match cap {
                        Some(c) => Val::AtLeast(total + c),
                        None => Val::Infinite,
                    });
                }
                break;
            };
            if cap.is_some_and(|c| c <= v) {
                return Err(Error::Precision("pivot valuation reaches the working precision".into()));
            }
            let pivot_row = m.remove(pi);
            let pivot = pivot_row[pj].clone();
            for row in m.iter_mut() {
                let factor = row[pj].divide_exact(&pivot).ok_or_else(|| {
                    Error::Unsupported("scalar model lacks exact division for elimination".into())
                })?;
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = x.sub(&factor.mul(y));
                }
                row.remove(pj);
            }
            total += v;
            out.push(Val::Exact(total));
        }
        Ok(out)
    }

    pub fn hodge_polygon(&self) -> Result<SlopePolygon> {
        polygon_from_vals(&self.exterior_power_vals()?, self.unit(), None)
    }

    pub fn hodge_polygon_below(&self, r: &Rational) -> Result<SlopePolygon> {
        polygon_from_vals(&self.exterior_power_vals()?, self.unit(), Some(r))
    }

    /// Coefficients `c_0, …, c_K` of `det(I - sΨ)`, by minor sums for small
    /// sizes and by division-free Berkowitz recursion otherwise.
    pub fn fredholm_coefficients(&self, max_degree: Option<usize>) -> Vec<T> {
        if self.n <= 8 && max_degree.is_none_or(|k| k >= self.n) {
            self.fredholm_by_minors()
        } else {
            self.fredholm_by_berkowitz(max_degree)
        }
    }

    /// `c_k = (-1)^k Σ_{|J|=k} det Ψ_J`.
    pub fn fredholm_by_minors(&self) -> Vec<T> {
        let levels = self.minors(self.n);
        levels
            .iter()
            .enumerate()
            .map(|(k, lv)| {
                let mut acc = self.get(0, 0).one_like().sub(&self.get(0, 0).one_like());
                for ((r, c), v) in lv {
                    if r == c {
                        acc = acc.add(v);
                    }
                }
                if k % 2 == 1 {
                    acc.neg()
                } else {
                    acc
                }
            })
            .collect()
    }

    /// Berkowitz recursion, keeping only the first `max_degree + 1` coefficients.
    pub fn fredholm_by_berkowitz(&self, max_degree: Option<usize>) -> Vec<T> {
        let n = self.n;
        let kmax = max_degree.unwrap_or(n).min(n);
        let Some(s0) = self.sample() else {
            return Vec::new();
        };
        let zero = s0.zero_like();
        // coefficients of det(xI - A_i), highest power first
        let mut c: Vec<T> = vec![s0.one_like()];
        for i in 0..n {
            // Toeplitz column t_0 = 1, t_1 = -a_ii, t_j = -R A_i^{j-2} S
            let mut t = vec![s0.one_like(), self.get(i, i).neg()];
            let mut v: Vec<T> = (0..i).map(|r| self.get(r, i).clone()).collect();
            for _ in 2..=kmax.min(i + 1) {
                let rs = (0..i).fold(zero.clone(), |acc, k| acc.add(&self.get(i, k).mul(&v[k])));
                t.push(rs.neg());
                v = (0..i)
                    .map(|r| (0..i).fold(zero.clone(), |acc, k| acc.add(&self.get(r, k).mul(&v[k]))))
                    .collect();
            }
            let len = (c.len() + 1).min(kmax + 1);
            let next = (0..len)
                .map(|k| {
                    let mut acc = zero.clone();
                    for j in 0..=k {
                        if let (Some(tj), Some(cj)) = (t.get(j), c.get(k - j)) {
                            acc = acc.add(&tj.mul(cj));
                        }
                    }
                    acc
                })
                .collect();
            c = next;
        }
        c
    }

    /// Newton polygon of `det(I - sΨ)`.
    pub fn newton_polygon(&self) -> Result<SlopePolygon> {
        let vals: Vec<Val> = self.fredholm_coefficients(None).iter().map(|c| c.val()).collect();
        polygon_from_vals(&vals, self.unit(), None)
    }

    pub fn newton_polygon_below(&self, r: &Rational) -> Result<SlopePolygon> {
        let vals: Vec<Val> = self.fredholm_coefficients(None).iter().map(|c| c.val()).collect();
        polygon_from_vals(&vals, self.unit(), Some(r))
    }

    /// `I^{<r}(Ψ)` and the principal submatrix on it.
    pub fn slice_below(&self, r: &Rational) -> Result<(Vec<usize>, Self)> {
        let mut idx = Vec::new();
        for (j, v) in self.column_vals().into_iter().enumerate() {
            if v.below(r)? {
                idx.push(j);
            }
        }
        let sub = self.principal_submatrix(&idx);
        Ok((idx, sub))
    }

    /// Whether `other - self` is an `r`-perturbation of `self`.
    pub fn is_r_perturbation(&self, other: &Self, r: &Rational) -> Result<bool> {
        let eps = other.sub(self)?;
        let eps_vals = eps.column_vals();
        for (j, v) in self.column_vals().into_iter().enumerate() {
            let e = eps_vals[j];
            let ok = if v.below(r)? {
                let Val::Exact(v) = v else { unreachable!() };
                // v(ε e_j) > v(Ψ e_j)
                !e.below(&rat_int(v as i64 + 1))?
            } else {
                !e.below(r)?
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `NP^{<r}` and `cHP^{<r}` have the same terminal point.
    pub fn touching(&self, r: &Rational) -> Result<bool> {
        let np = self.newton_polygon_below(r)?;
        let chp = self.column_hodge_below(r)?;
        np.shares_terminal_point(&chp)
    }
}

impl<T: Frobenius> ValuedMatrix<T> {
    pub fn frobenius(&self) -> Self {
        self.map(|x| x.frobenius())
    }

    /// `F^{v-1}(Ψ) ⋯ F(Ψ) Ψ`.
    pub fn semilinear_iterate(&self, v: usize) -> Result<Self> {
        if v == 0 {
            return Err(Error::InvalidParameter("power count must be positive".into()));
        }
        let mut acc = self.clone();
        let mut conj = self.clone();
        for _ in 1..v {
            conj = conj.frobenius();
            acc = conj.mul(&acc)?;
        }
        Ok(acc)
    }
}

/// Lower hull of `(k, vals[k])`, or its part with slopes `< r`. A value known
/// only to be `≥ c` is accepted when `c` already lies on or above the
/// returned polygon (extended by slope `r` past its end).
pub fn polygon_from_vals(vals: &[Val], unit: PolygonUnit, r: Option<&Rational>) -> Result<SlopePolygon> {
    let finite: Vec<crate::exactnum::Valuation> = vals
        .iter()
        .map(|v| match v {
            Val::Exact(x) => crate::exactnum::Valuation::Finite(rat_int(*x as i64)),
            _ => crate::exactnum::Valuation::Infinite,
        })
        .collect();
    if vals.is_empty() {
        return Ok(SlopePolygon::empty(unit));
    }
    let full = SlopePolygon::from_valuations(&finite, unit)?;
    let trunc = match r {
        Some(r) => full.truncate_below(r),
        None => full,
    };
    let (x0, y0) = trunc.terminal_point();
    for (x, v) in vals.iter().enumerate() {
        if let Val::AtLeast(c) = v {
            let bound = match (x <= x0, r) {
                (true, _) => trunc.value_at(x).unwrap(),
                (false, Some(r)) => &y0 + r * rat_int((x - x0) as i64),
                (false, None) => {
                    return Err(Error::Precision(format!("coefficient {x} vanishes to the working precision")));
                }
            };
            if rat_int(*c as i64) < bound {
                return Err(Error::Precision(format!(
                    "coefficient {x} is known only to valuation {c}, below the certified bound {bound}"
                )));
            }
        }
    }
    Ok(trunc)
}

// --- seeded random instances and property suites ---

/// Geometric valuation `P(v = k) = 2^{-(k+1)}`, capped.
fn geometric(rng: &mut ChaCha8Rng, cap: u64) -> u64 {
    let mut k = 0;
    while k < cap && rng.random_bool(0.5) {
        k += 1;
    }
    k
}

fn random_unit(rng: &mut ChaCha8Rng, p: u64, m: u64) -> u64 {
    loop {
        let u = rng.random_range(1..m);
        if u % p != 0 {
            return u;
        }
    }
}

fn random_zp(rng: &mut ChaCha8Rng, p: u64, prec: u32, min_val: u64, cap: u64) -> ZpInt {
    let m = p.pow(prec);
    if rng.random_bool(0.1) {
        return ZpInt::new(0, p, prec);
    }
    let v = (min_val + geometric(rng, cap)).min(prec as u64 - 1);
    let u = random_unit(rng, p, m) as u128;
    ZpInt::new((u * p.pow(v as u32) as u128 % m as u128) as i128, p, prec)
}

/// Random integral matrix over `Z_p`. Half of the instances are built
/// column-dominant (each diagonal entry attains its column minimum) so that
/// touching occurs often.
pub fn random_zp_matrix(rng: &mut ChaCha8Rng, n: usize, p: u64, prec: u32) -> ValuedMatrix<ZpInt> {
    if rng.random_bool(0.5) {
        let cols: Vec<u64> = (0..n).map(|_| geometric(rng, 4)).collect();
        ValuedMatrix::from_fn(n, |i, j| {
            if i == j {
                let m = p.pow(prec);
                let u = random_unit(rng, p, m) as i128;
                ZpInt::new(u * p.pow(cols[j] as u32) as i128, p, prec)
            } else {
                let extra = rng.random_range(0..2);
                random_zp(rng, p, prec, cols[j] + extra, 3)
            }
        })
    } else {
        ValuedMatrix::from_fn(n, |_, _| random_zp(rng, p, prec, 0, 4))
    }
}

/// A random `r`-perturbation of `psi`.
pub fn random_r_perturbation(
    rng: &mut ChaCha8Rng,
    psi: &ValuedMatrix<ZpInt>,
    r: &Rational,
) -> Result<ValuedMatrix<ZpInt>> {
    let n = psi.size();
    let s = *psi.get(0, 0);
    let (p, prec) = (s.p, s.n);
    let vals = psi.column_vals();
    let ceil_r = r.ceil().to_integer().to_u64().unwrap_or(0);
    let mins = vals
        .iter()
        .map(|v| {
            Ok(if v.below(r)? {
                let Val::Exact(v) = v else { unreachable!() };
                v + 1
            } else {
                ceil_r
            })
        })
        .collect::<Result<Vec<u64>>>()?;
    let eps = ValuedMatrix::from_fn(n, |_, j| {
        if mins[j] >= prec as u64 || rng.random_bool(0.2) {
            ZpInt::new(0, p, prec)
        } else {
            random_zp(rng, p, prec, mins[j], 3)
        }
    });
    psi.add(&eps)
}

/// Outcome of a seeded property suite.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    /// Trials where the hypothesis of the tested implication held.
    pub nonvacuous: usize,
    /// Instances redrawn because a valuation hit the working precision.
    pub redrawn: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials && self.failures.is_empty()
    }
}

enum Trial {
    Pass { nonvacuous: bool },
    Fail(String),
}

fn run_suite(
    name: &str,
    trials: usize,
    seed: u64,
    trial: impl Fn(&mut ChaCha8Rng) -> Result<Trial> + Sync,
) -> SuiteReport {
    let results: Vec<(Trial, usize)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64));
            let mut redrawn = 0;
            loop {
                match trial(&mut rng) {
                    Ok(res) => return (res, redrawn),
                    Err(Error::Precision(_)) if redrawn < 100 => redrawn += 1,
                    Err(e) => return (Trial::Fail(format!("trial {t}: {e}")), redrawn),
                }
            }
        })
        .collect();
    let mut rep = SuiteReport { name: name.into(), trials, ..Default::default() };
    for (res, redrawn) in results {
        rep.redrawn += redrawn;
        match res {
            Trial::Pass { nonvacuous } => {
                rep.passed += 1;
                rep.nonvacuous += nonvacuous as usize;
            }
            Trial::Fail(msg) => rep.failures.push(msg),
        }
    }
    rep
}

/// Random truncation bound: an integer or half-integer in `(0, 5]`.
fn random_r(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(BigInt::from(rng.random_range(1..=10)), BigInt::from(2))
}

/// Touching below `r` survives `r`-perturbation, and so does the terminal
/// point of `NP^{<r}`.
pub fn perturbation_suite(trials: usize, seed: u64, n: usize, p: u64, prec: u32) -> SuiteReport {
    run_suite("perturbation", trials, seed, |rng| {
        let psi = random_zp_matrix(rng, n, p, prec);
        let r = random_r(rng);
        let psi2 = random_r_perturbation(rng, &psi, &r)?;
        if !psi.is_r_perturbation(&psi2, &r)? {
            return Ok(Trial::Fail("constructed matrix is not an r-perturbation".into()));
        }
        if !psi.touching(&r)? {
            return Ok(Trial::Pass { nonvacuous: false });
        }
        let np = psi.newton_polygon_below(&r)?;
        let np2 = psi2.newton_polygon_below(&r)?;
        if !psi2.touching(&r)? {
            return Ok(Trial::Fail(format!("touching lost at r={r}: {psi:?} -> {psi2:?}")));
        }
        if !np.shares_terminal_point(&np2)? {
            return Ok(Trial::Fail(format!("NP^<{r} terminal points differ: {np} vs {np2}")));
        }
        Ok(Trial::Pass { nonvacuous: true })
    })
}

fn slopes_dominate(hi: &SlopePolygon, lo: &SlopePolygon) -> bool {
    hi.slopes().iter().zip(lo.slopes()).all(|(a, b)| a >= b) && hi.len() <= lo.len()
}

/// Hodge slopes dominate column slopes; contact of the two polygons forces
/// agreement before it; the four polygons coincide under touching; and
/// `NP ⪰ HP` with equal endpoints for full-rank instances.
pub fn hodge_suite(trials: usize, seed: u64, p: u64, prec: u32) -> SuiteReport {
    run_suite("hodge", trials, seed, |rng| {
        let n = rng.random_range(1..=6);
        let psi = random_zp_matrix(rng, n, p, prec);
        let chp = psi.column_hodge()?;
        let hp = psi.hodge_polygon()?;
        // Infinite column slopes sit after all finite ones.
        if !slopes_dominate(&hp, &chp) {
            return Ok(Trial::Fail(format!("HP {hp} has a slope below cHP {chp}")));
        }
        for (x, y) in hp.vertices().into_iter().skip(1) {
            if chp.value_at(x) == Some(y) {
                if (0..=x).any(|k| hp.value_at(k) != chp.value_at(k)) {
                    return Ok(Trial::Fail(format!("HP {hp} meets cHP {chp} at x={x} without agreeing before")));
                }
            }
        }
        let r = random_r(rng);
        let mut nonvacuous = false;
        if psi.touching(&r)? {
            nonvacuous = true;
            let (_, sub) = psi.slice_below(&r)?;
            let four = [sub.hodge_polygon()?, sub.column_hodge()?, psi.hodge_polygon_below(&r)?, psi.column_hodge_below(&r)?];
            if four.iter().any(|q| q.slopes() != four[0].slopes()) {
                return Ok(Trial::Fail(format!("polygons differ under touching at r={r}: {four:?}")));
            }
        }
        if hp.len() == n {
            let np = psi.newton_polygon()?;
            if !np.lies_on_or_above(&hp)? || !np.shares_terminal_point(&hp)? {
                return Ok(Trial::Fail(format!("NP {np} not above HP {hp}")));
            }
        }
        Ok(Trial::Pass { nonvacuous })
    })
}

/// Restriction of scalars of `x ↦ F(Ψ x)` to `Z_p` in the basis `{e_i, t e_i}`.
pub fn associated_block_matrix(psi: &ValuedMatrix<Zq2>) -> ValuedMatrix<ZpInt> {
    let n = psi.size();
    ValuedMatrix::from_fn(2 * n, |i, j| {
        let (a, b) = psi.get(i / 2, j / 2).parts();
        let nu = a.with(psi.get(0, 0).nu() % a.modulus());
        // (α + βt)(x + yt) = (αx + βν y) + (βx + αy) t, then t ↦ -t
        let v = match (i % 2, j % 2) {
            (0, 0) => a,
            (0, 1) => b.mul(&nu),
            (1, 0) => b,
            _ => a,
        };
        if i % 2 == 1 {
            v.neg()
        } else {
            v
        }
    })
}

/// `NP(Ψ_q)` with slopes halved and doubled in multiplicity equals the NP of
/// the `Z_p`-linear block matrix of the semilinear map.
pub fn root_suite(trials: usize, seed: u64, p: u64, prec: u32) -> SuiteReport {
    run_suite("root", trials, seed, |rng| {
        let n = 3;
        let psi = ValuedMatrix::from_fn(n, |_, _| {
            let a = random_zp(rng, p, prec, 0, 3);
            let b = random_zp(rng, p, prec, 0, 3);
            Zq2::new(a.value() as i128, b.value() as i128, p, prec)
        });
        let iterate = psi.semilinear_iterate(2)?;
        let np_q = iterate.newton_polygon()?;
        let block = associated_block_matrix(&psi);
        let np = block.newton_polygon()?;
        let half = Rational::new(1.into(), 2.into());
        let halved = np_q.scale(&half, PolygonUnit::Abstract)?;
        let doubled = halved.concat(&halved)?;
        if doubled.slopes() != np.slopes() {
            return Ok(Trial::Fail(format!("NP(block) {np} vs doubled iterate {doubled}")));
        }
        Ok(Trial::Pass { nonvacuous: true })
    })
}

/// Shorthand for [`ZpInt::new`].
pub fn zp(v: i128, p: u64, prec: u32) -> ZpInt {
    ZpInt::new(v, p, prec)
}
