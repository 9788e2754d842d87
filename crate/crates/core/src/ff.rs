//! Dense finite fields `F_{p^k}` for small `p` and `k`.
//!
//! Elements are coefficient vectors in the basis `1, g, …, g^{k-1}` where `g`
//! is the class of `x` modulo the field's modulus. The modulus is the first
//! monic irreducible polynomial of degree `k` when monic polynomials are
//! ordered by the integer `Σ c_i p^i` of their lower coefficients. The same
//! integer encoding orders elements for enumeration and root searches, so every
//! choice made here is reproducible.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::exactnum::is_prime;

/// Largest field size accepted for exhaustive root searches.
const MAX_SEARCH: u64 = 1 << 24;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FFElem(Vec<u32>);

impl FFElem {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct FieldParams {
    p: u32,
    k: u32,
    /// Monic modulus, low degree first, length `k + 1`.
    modulus: Vec<u32>,
    size: u64,
}

fn field_cache() -> &'static Mutex<HashMap<(u32, u32), Arc<FieldParams>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<FieldParams>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl FieldParams {
    /// The field `F_{p^k}` with its canonical (smallest) modulus.
    pub fn new(p: u32, k: u32) -> Result<Self> {
        if !is_prime(p as u64) || p > 1 << 15 {
            return Err(Error::InvalidParameter(format!("field characteristic {p} must be a small prime")));
        }
        if k == 0 || k > 24 {
            return Err(Error::InvalidParameter(format!("field degree {k} out of range")));
        }
        let size = (p as u64).checked_pow(k).filter(|&s| s <= 1 << 40).ok_or_else(|| {
            Error::InvalidParameter(format!("field F_{p}^{k} too large"))
        })?;
        let count = (p as u64).pow(k);
        for code in 0..count {
            let mut modulus = digits(code, p, k as usize);
            modulus.push(1);
            if is_irreducible(&modulus, p) {
                return Ok(Self { p, k, modulus, size });
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    /// Shared, cached instance of [`FieldParams::new`].
    pub fn get(p: u32, k: u32) -> Result<Arc<Self>> {
        if let Some(f) = field_cache().lock().unwrap().get(&(p, k)) {
            return Ok(f.clone());
        }
        let f = Arc::new(Self::new(p, k)?);
        field_cache().lock().unwrap().insert((p, k), f.clone());
        Ok(f)
    }

    /// A field with a caller-supplied monic modulus, checked for irreducibility.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        let k = modulus.len().saturating_sub(1) as u32;
        if !is_prime(p as u64) || k == 0 || modulus[k as usize] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidParameter("modulus must be monic with reduced coefficients".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidParameter(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        Ok(Self { p, k, size: (p as u64).pow(k), modulus })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FFElem {
        FFElem(vec![0; self.k as usize])
    }

    pub fn one(&self) -> FFElem {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> FFElem {
        let mut v = vec![0; self.k as usize];
        v[0] = c.rem_euclid(self.p as i64) as u32;
        FFElem(v)
    }

    /// The class of `x`, a root of the modulus.
    pub fn generator(&self) -> FFElem {
        if self.k == 1 {
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut v = vec![0; self.k as usize];
        v[1] = 1;
        FFElem(v)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FFElem {
        assert_eq!(coeffs.len(), self.k as usize, "coefficient vector has wrong length");
        FFElem(coeffs.iter().map(|&c| c % self.p).collect())
    }

    pub fn element_at(&self, index: u64) -> FFElem {
        debug_assert!(index < self.size);
        FFElem(digits(index, self.p, self.k as usize))
    }

    pub fn index_of(&self, x: &FFElem) -> u64 {
        x.0.iter().rev().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn is_zero(&self, x: &FFElem) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    /// Every element exactly once, in index order.
    pub fn elements(&self) -> impl Iterator<Item = FFElem> + '_ {
        (0..self.size).map(move |i| self.element_at(i))
    }

    /// Splits the index range into at most `parts` disjoint contiguous chunks.
    pub fn chunks(&self, parts: usize) -> Vec<Range<u64>> {
        let parts = parts.max(1) as u64;
        let step = self.size.div_ceil(parts).max(1);
        (0..self.size).step_by(step as usize).map(|s| s..(s + step).min(self.size)).collect()
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FFElem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + y) % self.p).collect())
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FFElem(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + self.p - y) % self.p).collect())
    }

    pub fn neg(&self, a: &FFElem) -> FFElem {
        FFElem(a.0.iter().map(|&x| (self.p - x) % self.p).collect())
    }

    pub fn scale(&self, a: &FFElem, c: u32) -> FFElem {
        FFElem(a.0.iter().map(|&x| ((x as u64 * c as u64) % self.p as u64) as u32).collect())
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let k = self.k as usize;
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        for c in prod.iter_mut() {
            *c %= p;
        }
        for d in (k..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for (i, &m) in self.modulus[..k].iter().enumerate() {
                prod[d - k + i] = (prod[d - k + i] + (p - c) * m as u64) % p;
            }
        }
        FFElem(prod[..k].iter().map(|&c| c as u32).collect())
    }

    pub fn pow(&self, a: &FFElem, mut e: u64) -> FFElem {
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

    pub fn inv(&self, a: &FFElem) -> Option<FFElem> {
        (!self.is_zero(a)).then(|| self.pow(a, self.size - 2))
    }

    /// The absolute Frobenius `x ↦ x^p`.
    pub fn frobenius(&self, a: &FFElem) -> FFElem {
        self.pow(a, self.p as u64)
    }

    /// `x ↦ x^{1/p}`, the inverse of [`FieldParams::frobenius`].
    pub fn frobenius_inverse(&self, a: &FFElem) -> FFElem {
        self.pow(a, self.size / self.p as u64)
    }

    pub fn in_prime_field(&self, a: &FFElem) -> bool {
        a.0[1..].iter().all(|&c| c == 0)
    }

    /// `Tr_{F_{p^k}/F_p}(x) = x + x^p + … + x^{p^{k-1}}`.
    pub fn absolute_trace(&self, a: &FFElem) -> u32 {
        let mut acc = self.zero();
        let mut conj = a.clone();
        for _ in 0..self.k {
            acc = self.add(&acc, &conj);
            conj = self.frobenius(&conj);
        }
        debug_assert!(self.in_prime_field(&acc));
        acc.0[0]
    }

    /// Evaluates a polynomial with coefficients in this field (low degree first).
    pub fn eval_poly(&self, coeffs: &[FFElem], x: &FFElem) -> FFElem {
        coeffs.iter().rev().fold(self.zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }
}

/// The embedding `F_{p^a} ↪ F_{p^{ab}}` sending the generator of the source to
/// the smallest-index root of its modulus in the target.
#[derive(Debug, Clone)]
pub struct Embedding {
    source: Arc<FieldParams>,
    target: Arc<FieldParams>,
    /// Images of `1, g, …, g^{a-1}`.
    powers: Vec<FFElem>,
}

impl Embedding {
    pub fn new(source: Arc<FieldParams>, target: Arc<FieldParams>) -> Result<Self> {
        if source.p != target.p || target.k % source.k != 0 {
            return Err(Error::DegreeNotDivisible { from: source.k, to: target.k });
        }
        let poly: Vec<FFElem> = source.modulus.iter().map(|&c| target.from_int(c as i64)).collect();
        let root = if source.k == 1 {
            target.from_int(-(source.modulus[0] as i64))
        } else {
            if target.size > MAX_SEARCH {
                return Err(Error::InvalidParameter(format!(
                    "root search in a field of size {} is too large",
                    target.size
                )));
            }
            target
                .elements()
                .find(|x| target.is_zero(&target.eval_poly(&poly, x)))
                .expect("the modulus of a subfield splits in the extension")
        };
        let mut powers = Vec::with_capacity(source.k as usize);
        let mut acc = target.one();
        for _ in 0..source.k {
            powers.push(acc.clone());
            acc = target.mul(&acc, &root);
        }
        Ok(Self { source, target, powers })
    }

    pub fn source(&self) -> &Arc<FieldParams> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FieldParams> {
        &self.target
    }

    pub fn apply(&self, x: &FFElem) -> FFElem {
        let t = &self.target;
        x.0.iter()
            .zip(&self.powers)
            .fold(t.zero(), |acc, (&c, g)| t.add(&acc, &t.scale(g, c)))
    }
}

/// One-shot form of [`Embedding::apply`].
pub fn embed(x: &FFElem, source: &Arc<FieldParams>, target: &Arc<FieldParams>) -> Result<FFElem> {
    Ok(Embedding::new(source.clone(), target.clone())?.apply(x))
}

fn digits(mut code: u64, p: u32, len: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push((code % p as u64) as u32);
        code /= p as u64;
    }
    v
}

// --- polynomials over F_p, low degree first ---

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p) as u64;
    while a.len() > dm {
        let top = a.len() - 1;
        let c = a[top] as u64 * lead_inv % p as u64;
        for i in 0..=dm {
            let sub = c * m[i] as u64 % p as u64;
            a[top - dm + i] = ((a[top - dm + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        a = trim(a);
    }
    a
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    poly_rem(&prod.into_iter().map(|c| c as u32).collect::<Vec<_>>(), m, p)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^{p^j} mod m`.
fn frobenius_power_of_x(m: &[u32], p: u32, j: u32) -> Vec<u32> {
    let mut cur = poly_rem(&[0, 1], m, p);
    for _ in 0..j {
        let base = cur.clone();
        let mut acc = vec![1];
        let mut e = p;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &b, m, p);
            }
            b = poly_mulmod(&b, &b, m, p);
            e >>= 1;
        }
        cur = acc;
    }
    cur
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `x^{p^k} ≡ x` and `gcd(x^{p^{k/r}} - x, m) = 1` for primes `r | k`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = m.len() as u32 - 1;
    if k == 1 {
        return true;
    }
    let x = poly_rem(&[0, 1], m, p);
    let sub_x = |f: Vec<u32>| {
        let mut f = f;
        f.resize(f.len().max(2), 0);
        f[1] = (f[1] + p - 1) % p;
        trim(f)
    };
    if trim(frobenius_power_of_x(m, p, k)) != trim(x) {
        return false;
    }
    for r in prime_factors(k) {
        let g = poly_gcd(&sub_x(frobenius_power_of_x(m, p, k / r)), m, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}
