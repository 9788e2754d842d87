//! Dwork's operator for order-`p` characters on `A¹` over `F_p`, used as an
//! independent oracle for local Newton polygons.
//!
//! For `f = Σ a_j u^j` the Frobenius structure is `E(u) = ∏ θ(τ(a_j) u^j)`
//! with `θ(t) = exp(π_D (t - t^p))` and `π_D^{p-1} = -p`. The operator
//! `Θ = U_p ∘ E` has Fredholm determinant `C(s)` with
//! `C(s) = (1 - s) L(s) C(ps)`, so the slopes of `C` below `v_π(p)` are a
//! single `0` followed by the slopes of `L`.
//!
//! Truncating `Θ` to `M'` basis vectors and the scalars to `π^N` is made
//! rigorous with Dwork's estimate `ord_p θ_i ≥ i(p-1)/p²`: every coefficient
//! that is not determined by the truncation is replaced by its a priori bound,
//! and polygons are reported only when those bounds cannot change them.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::character::{AswCharacter, Place};
use crate::error::{Error, Result};
use crate::exactnum::{rat_int, CyclotomicInteger, Rational};
use crate::polygon::{PolygonUnit, SlopePolygon};
use crate::valmat::{polygon_from_vals, Val, ValuedMatrix, ValuedScalar};

const MAX_P: u32 = 7;
const LIMB: u128 = 1 << 63;

/// Arithmetic modulo `p^K`, split as `B · top` with `B = p^{⌈K/2⌉} < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicCtx {
    p: u32,
    k: u32,
    b: u64,
    top: u64,
    m: u128,
}

impl PadicCtx {
    /// Context with `π`-adic precision at least `n`.
    pub fn new(p: u32, n: u64) -> Result<Self> {
        if !crate::exactnum::is_prime(p as u64) || p == 2 || p > MAX_P {
            return Err(Error::Unsupported(format!("p-adic scalars are implemented for odd p <= {MAX_P}, got {p}")));
        }
        let k = n.div_ceil(p as u64 - 1).max(1) as u32;
        let k1 = k.div_ceil(2);
        let b = (p as u128).checked_pow(k1).filter(|&b| b < LIMB).ok_or_else(|| {
            Error::Precision(format!("precision π^{n} exceeds the representable range for p={p}"))
        })?;
        let top = (p as u128).pow(k - k1);
        Ok(Self { p, k, b: b as u64, top: top as u64, m: b * top })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `p`-adic precision `K`.
    pub fn p_precision(&self) -> u32 {
        self.k
    }

    /// `π`-adic precision `K(p-1)`.
    pub fn precision(&self) -> u64 {
        self.k as u64 * (self.p as u64 - 1)
    }

    pub fn modulus(&self) -> u128 {
        self.m
    }

    /// Largest `π`-adic precision available for `p`.
    pub fn max_precision(p: u32) -> u64 {
        let mut k1 = 0u32;
        while (p as u128).pow(k1 + 1) < LIMB {
            k1 += 1;
        }
        2 * k1 as u64 * (p as u64 - 1)
    }

    fn reduce(&self, x: i128) -> u128 {
        x.rem_euclid(self.m as i128) as u128
    }

    fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        if self.m < LIMB {
            return a * b % self.m;
        }
        // B² ≡ 0 mod p^K
        let bb = self.b as u128;
        let (a1, a0) = (a / bb, a % bb);
        let (b1, b0) = (b / bb, b % bb);
        let lo = a0 * b0;
        let mid = (lo / bb + a0 * b1 + a1 * b0) % self.top as u128;
        lo % bb + bb * mid
    }

    fn pow(&self, a: u128, mut e: u64) -> u128 {
        let mut acc = 1 % self.m;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of an integer prime to `p`.
    fn inv(&self, u: u128) -> u128 {
        let p = self.p as u128;
        debug_assert!(u % p != 0);
        let mut x = (1..p).find(|c| c * (u % p) % p == 1).unwrap();
        for _ in 0..8 {
            x = self.mul(x, self.sub(2 % self.m, self.mul(u, x)));
        }
        debug_assert_eq!(self.mul(u, x), 1);
        x
    }

    fn v_p(&self, mut x: u128) -> Option<u32> {
        if x == 0 {
            return None;
        }
        let mut k = 0;
        while x % self.p as u128 == 0 {
            x /= self.p as u128;
            k += 1;
        }
        Some(k)
    }

    /// Teichmüller lift of `a ∈ F_p`.
    pub fn teichmuller(&self, a: u64) -> u128 {
        let mut t = a as u128 % self.p as u128;
        for _ in 0..self.k {
            t = self.pow(t, self.p as u64);
        }
        t
    }
}

/// Element of `Z_p[ζ_p]` modulo `p^K`, in the power basis `1, ζ, …, ζ^{p-2}`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PadicScalar {
    c: [u128; (MAX_P - 1) as usize],
    ctx: PadicCtx,
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (mod {}^{})", self.coeffs(), self.ctx.p, self.ctx.k)
    }
}

impl PadicScalar {
    fn len(&self) -> usize {
        self.ctx.p as usize - 1
    }

    pub fn from_int(ctx: PadicCtx, x: i128) -> Self {
        let mut c = [0; (MAX_P - 1) as usize];
        c[0] = ctx.reduce(x);
        Self { c, ctx }
    }

    /// `ζ_p`.
    pub fn zeta(ctx: PadicCtx) -> Self {
        let mut z = Self::from_int(ctx, 0);
        z.c[1] = 1;
        z
    }

    pub fn from_cyclotomic(ctx: PadicCtx, x: &CyclotomicInteger) -> Result<Self> {
        if x.p() != ctx.p || x.n() != 1 {
            return Err(Error::StructureMismatch("cyclotomic level differs from the p-adic model".into()));
        }
        let m = BigInt::from(ctx.m);
        let mut out = Self::from_int(ctx, 0);
        for (i, b) in x.coeffs().iter().enumerate() {
            out.c[i] = b.mod_floor(&m).to_u128().unwrap();
        }
        Ok(out)
    }

    /// Lift with coefficients in `(-p^K/2, p^K/2]`.
    pub fn to_cyclotomic(&self) -> CyclotomicInteger {
        let m = self.ctx.m;
        let lift = |c: u128| if c > m / 2 { -BigInt::from(m - c) } else { BigInt::from(c) };
        CyclotomicInteger::from_coeffs(self.ctx.p, 1, self.coeffs().iter().map(|&c| lift(c)).collect())
    }

    pub fn coeffs(&self) -> &[u128] {
        &self.c[..self.len()]
    }

    pub fn ctx(&self) -> PadicCtx {
        self.ctx
    }

    pub fn scale_int(&self, k: u128) -> Self {
        let mut out = *self;
        for i in 0..self.len() {
            out.c[i] = self.ctx.mul(self.c[i], k % self.ctx.m);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.one_like();
        let mut base = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit, by Newton iteration from its residue.
    pub fn inverse_unit(&self) -> Result<Self> {
        let p = self.ctx.p as u128;
        let r = self.coeffs().iter().fold(0u128, |a, &c| (a + c % p) % p);
        if r == 0 {
            return Err(Error::InvalidParameter("element is not a unit".into()));
        }
        let mut y = Self::from_int(self.ctx, (1..p).find(|c| c * r % p == 1).unwrap() as i128);
        let two = Self::from_int(self.ctx, 2);
        let mut prec = 1;
        while prec < self.ctx.precision() {
            y = y.mul(&two.sub(&self.mul(&y)));
            prec *= 2;
        }
        y = y.mul(&two.sub(&self.mul(&y)));
        debug_assert!(self.mul(&y) == self.one_like());
        Ok(y)
    }
}

impl ValuedScalar for PadicScalar {
    fn zero_like(&self) -> Self {
        Self::from_int(self.ctx, 0)
    }
    fn one_like(&self) -> Self {
        Self::from_int(self.ctx, 1)
    }
    fn add(&self, o: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.len() {
            out.c[i] = self.ctx.add(self.c[i], o.c[i]);
        }
        out
    }
    fn sub(&self, o: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.len() {
            out.c[i] = self.ctx.sub(self.c[i], o.c[i]);
        }
        out
    }
    fn mul(&self, o: &Self) -> Self {
        let ctx = &self.ctx;
        let p = ctx.p as usize;
        let l = p - 1;
        // product modulo ζ^p - 1, then ζ^{p-1} = -(1 + … + ζ^{p-2})
        let mut w = [0u128; MAX_P as usize];
        for i in 0..l {
            if self.c[i] == 0 {
                continue;
            }
            for j in 0..l {
                let k = (i + j) % p;
                w[k] = ctx.add(w[k], ctx.mul(self.c[i], o.c[j]));
            }
        }
        let mut out = *self;
        for i in 0..l {
            out.c[i] = ctx.sub(w[i], w[l]);
        }
        out
    }
    fn neg(&self) -> Self {
        self.zero_like().sub(self)
    }
    fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|&c| c == 0)
    }
    fn valuation(&self) -> Option<u64> {
        // coordinates in the basis (ζ - 1)^j
        let ctx = &self.ctx;
        let l = self.len();
        let mut best: Option<u64> = None;
        for j in 0..l {
            let mut b = 0u128;
            let mut binom = 1u128;
            for i in j..l {
                if i > j {
                    binom = binom * i as u128 / (i - j) as u128;
                }
                b = ctx.add(b, ctx.mul(binom % ctx.m, self.c[i]));
            }
            if let Some(v) = ctx.v_p(b) {
                let val = v as u64 * l as u64 + j as u64;
                best = Some(best.map_or(val, |x| x.min(val)));
            }
        }
        best
    }
    fn precision(&self) -> Option<u64> {
        Some(self.ctx.precision())
    }
    fn unit(&self) -> PolygonUnit {
        PolygonUnit::PiAdic { p: self.ctx.p, n: 1 }
    }
}

/// `π_D` with `π_D^{p-1} = -p` and `π_D ≡ ζ - 1 mod π²`.
#[derive(Clone, Copy, Debug)]
pub struct DworkPi {
    pub pi: PadicScalar,
}

/// Writes `π_D = (ζ - 1) w` where `w^{p-1} = -p/(ζ-1)^{p-1} = -∏_{a<p} [a]_ζ`
/// is a unit `≡ 1 mod π`, and extracts the root by Newton iteration.
pub fn dwork_pi(p: u32, n: u64) -> Result<DworkPi> {
    if n < 3 {
        return Err(Error::InvalidParameter("precision must be at least 3".into()));
    }
    let ctx = PadicCtx::new(p, n)?;
    let zeta = PadicScalar::zeta(ctx);
    let one = zeta.one_like();
    let mut u0 = one;
    let mut qa = one;
    for _ in 1..p - 1 {
        // qa runs through [a]_ζ = 1 + ζ + … + ζ^{a-1} for a = 2..p-1
        qa = qa.add(&zeta.pow(qa_len(&qa, &one, &zeta)));
        u0 = u0.mul(&qa);
    }
    let u0 = u0.neg();
    let e = p as u64 - 1;
    let mut w = one;
    let mut converged = false;
    for _ in 0..64 {
        let residual = w.pow(e).sub(&u0);
        if residual.is_zero() {
            converged = true;
            break;
        }
        let deriv = w.pow(e - 1).scale_int(e as u128);
        w = w.sub(&residual.mul(&deriv.inverse_unit()?));
    }
    if !converged {
        return Err(Error::Precision("Newton iteration for the Dwork constant did not converge".into()));
    }
    let pi = zeta.sub(&one).mul(&w);
    debug_assert!(pi.pow(e).add(&PadicScalar::from_int(ctx, p as i128)).is_zero());
    Ok(DworkPi { pi })
}

// exponent of the next power of ζ to append to [a]_ζ
fn qa_len(qa: &PadicScalar, one: &PadicScalar, zeta: &PadicScalar) -> u64 {
    let mut k = 0;
    let mut acc = *one;
    let mut pw = *one;
    while acc != *qa {
        pw = pw.mul(zeta);
        acc = acc.add(&pw);
        k += 1;
    }
    k + 1
}

/// Growth certificate `v_π(c_k) ≥ (k - b)/m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Growth {
    pub m: Rational,
    pub b: Rational,
}

impl Growth {
    pub fn bound(&self, k: usize) -> Rational {
        (rat_int(k as i64) - &self.b) / &self.m
    }

    /// Certificate of a product: offsets add, the larger `m` wins.
    pub fn compose(&self, o: &Growth) -> Growth {
        Growth { m: self.m.clone().max(o.m.clone()), b: &self.b + &o.b }
    }
}

/// Power series in `u` truncated after degree `len - 1`.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    pub coeffs: Vec<PadicScalar>,
    pub growth: Option<Growth>,
}

impl TruncatedSeries {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Option<&PadicScalar> {
        self.coeffs.get(k)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let len = self.coeffs.len().min(o.coeffs.len());
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        let growth = match (&self.growth, &o.growth) {
            (Some(a), Some(b)) => Some(a.compose(b)),
            _ => None,
        };
        Self { coeffs: out, growth }
    }

    /// Whether every coefficient known exactly satisfies the certificate.
    pub fn satisfies(&self, g: &Growth) -> bool {
        self.coeffs.iter().enumerate().all(|(k, c)| {
            let bound = g.bound(k);
            match c.val() {
                Val::Exact(v) => rat_int(v as i64) >= bound,
                Val::AtLeast(_) | Val::Infinite => true,
            }
        })
    }
}

/// Dwork's estimate `v_π(θ_i) ≥ i (p-1)²/p²` as a certificate.
pub fn theta_growth(p: u32) -> Growth {
    let p = p as i64;
    Growth { m: Rational::new((p * p).into(), ((p - 1) * (p - 1)).into()), b: Rational::zero() }
}

fn v_p_u64(mut x: u64, p: u64) -> u64 {
    let mut k = 0;
    while x > 0 && x % p == 0 {
        x /= p;
        k += 1;
    }
    k
}

/// `θ(u) = exp(π_D u - π_D u^p)` through degree `m`, from
/// `θ_k = Σ_{i+pj=k} (-1)^j π_D^{i+j} / (i! j!)`. Each term is reduced to
/// `(±p^e / unit) · π_D^r` using `π_D^{p-1} = -p`.
pub fn splitting_function(pi: &DworkPi, m: usize) -> Result<TruncatedSeries> {
    let ctx = pi.pi.ctx();
    let p = ctx.p as u64;
    let l = p - 1;
    // valuation and inverse unit part of i!
    let mut fact_v = vec![0u64; m + 1];
    let mut fact_unit = vec![1u128; m + 1];
    for i in 1..=m {
        let v = v_p_u64(i as u64, p);
        fact_v[i] = fact_v[i - 1] + v;
        fact_unit[i] = ctx.mul(fact_unit[i - 1], (i as u128 / (p as u128).pow(v as u32)) % ctx.m);
    }
    let fact_inv: Vec<u128> = fact_unit.iter().map(|&u| ctx.inv(u)).collect();
    let pi_pows: Vec<PadicScalar> = (0..l).map(|r| pi.pi.pow(r)).collect();
    let mut coeffs = Vec::with_capacity(m + 1);
    for k in 0..=m {
        // collect the rational coefficient of each π_D^r
        let mut by_r = vec![0u128; l as usize];
        for j in 0..=(k as u64 / p) {
            let i = k as u64 - p * j;
            let e = i + j;
            let (t, r) = (e / l, e % l);
            let vden = fact_v[i as usize] + fact_v[j as usize];
            if t < vden {
                return Err(Error::Integrality(format!("term (i={i}, j={j}) of θ_{k} is not p-integral")));
            }
            let shift = t - vden;
            if shift >= ctx.k as u64 {
                continue;
            }
            let mut c = ctx.mul(fact_inv[i as usize], fact_inv[j as usize]);
            c = ctx.mul(c, (p as u128).pow(shift as u32));
            // (-1)^j from the series, (-1)^t from (-p)^t
            if (j + t) % 2 == 1 {
                c = ctx.sub(0, c);
            }
            by_r[r as usize] = ctx.add(by_r[r as usize], c);
        }
        let mut acc = pi.pi.zero_like();
        for (r, &c) in by_r.iter().enumerate() {
            if c != 0 {
                acc = acc.add(&pi_pows[r].scale_int(c));
            }
        }
        coeffs.push(acc);
    }
    Ok(TruncatedSeries { coeffs, growth: Some(theta_growth(ctx.p)) })
}

/// Extracts `f` as `[(j, a_j)]` from a character on `A¹` over `F_p` of order `p`.
pub fn polynomial_terms(f: &AswCharacter) -> Result<Vec<(usize, u64)>> {
    if f.n() != 1 || f.q() != f.p() as u64 {
        return Err(Error::Unsupported("the Dwork oracle handles order-p characters over F_p".into()));
    }
    if f.places() != [Place::Infinity] {
        return Err(Error::Unsupported("the Dwork oracle needs a character ramified only at infinity".into()));
    }
    let c = &f.coords()[0];
    if c.denominator().len() != 1 {
        return Err(Error::Unsupported("f must be a polynomial".into()));
    }
    let field = f.field();
    let num = c.numerator();
    if num.first().is_some_and(|a| !field.is_zero(a)) {
        return Err(Error::InvalidParameter("f must have no constant term".into()));
    }
    let mut terms = Vec::new();
    for (j, a) in num.iter().enumerate().skip(1) {
        if field.is_zero(a) {
            continue;
        }
        if j % f.p() as usize == 0 {
            return Err(Error::InvalidParameter(format!("exponent {j} of f is divisible by p")));
        }
        terms.push((j, a.coeffs()[0] as u64));
    }
    Ok(terms)
}

/// `E(u) = ∏_j θ(τ(a_j) u^j)` through degree `m`.
pub fn frobenius_structure(terms: &[(usize, u64)], pi: &DworkPi, m: usize) -> Result<TruncatedSeries> {
    let ctx = pi.pi.ctx();
    let p = ctx.p as usize;
    if let Some((j, _)) = terms.iter().find(|(j, _)| j % p == 0 || *j == 0) {
        return Err(Error::InvalidParameter(format!("exponent {j} is zero or divisible by p")));
    }
    let one = pi.pi.one_like();
    let mut e = TruncatedSeries {
        coeffs: std::iter::once(one).chain(std::iter::repeat_n(pi.pi.zero_like(), m)).collect(),
        growth: Some(Growth { m: rat_int(1), b: Rational::zero() }),
    };
    if terms.is_empty() {
        return Ok(e);
    }
    let theta = splitting_function(pi, m)?;
    let tg = theta_growth(ctx.p);
    for &(j, a) in terms {
        let tau = ctx.teichmuller(a);
        let mut factor = vec![pi.pi.zero_like(); m + 1];
        let mut tpow = 1u128;
        for i in 0..=m / j {
            factor[i * j] = theta.coeffs[i].scale_int(tpow);
            tpow = ctx.mul(tpow, tau);
        }
        let growth = Growth { m: &tg.m * rat_int(j as i64), b: Rational::zero() };
        e = e.mul(&TruncatedSeries { coeffs: factor, growth: Some(growth) });
    }
    Ok(e)
}

/// Matrix of `u^k ↦ U_p(E u^k)` on `u^0, …, u^{size-1}`: entry `(m, k)` is `E_{pm-k}`.
pub fn theta_matrix(e: &TruncatedSeries, size: usize) -> Result<ValuedMatrix<PadicScalar>> {
    let p = e.coeffs[0].ctx().p as usize;
    if size > 0 && e.degree() < p * (size - 1) {
        return Err(Error::InvalidParameter(format!(
            "series of degree {} is too short for a {size}x{size} matrix",
            e.degree()
        )));
    }
    let zero = e.coeffs[0].zero_like();
    Ok(ValuedMatrix::from_fn(size, |m, k| if p * m >= k { e.coeffs[p * m - k] } else { zero }))
}

/// Truncation sizes: `M'` basis vectors and `π`-adic precision `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleParams {
    pub m_prime: usize,
    pub precision: u64,
}

impl OracleParams {
    /// `M' = max(40, 10d)`, `N = max(60, 4(p-1)d)`.
    pub fn defaults(p: u32, d: usize) -> Self {
        Self { m_prime: 40.max(10 * d), precision: 60.max(4 * (p as u64 - 1) * d as u64) }
    }
}

/// Per-index growth `g` of `E` in `π`-adic units: `(p-1)²/(p² d)`.
fn index_growth(p: u32, d: usize) -> Rational {
    let p = p as i64;
    Rational::new(((p - 1) * (p - 1)).into(), (p * p * d as i64).into())
}

fn ceil_u64(r: &Rational) -> u64 {
    r.ceil().to_integer().to_u64().unwrap_or(0)
}

/// Fredholm coefficients of `Θ` restricted to the indices `offset..offset+n`
/// with certified valuations: exact when below both the working precision
/// and the truncation error, otherwise the best available lower bound.
fn certified_fredholm_vals(
    theta: &ValuedMatrix<PadicScalar>,
    offset: usize,
    g: &Rational,
    p: u32,
    rv: &Rational,
) -> Result<Vec<Val>> {
    let n = theta.size();
    let step = g * rat_int(p as i64 - 1);
    // smallest index sum of a j-subset of {offset, offset+1, …}, and of one
    // that leaves the truncation
    let min_sum = |j: usize| rat_int((j * offset + j * j.saturating_sub(1) / 2) as i64);
    let min_sum_outside = |j: usize| {
        if j == 0 {
            return None;
        }
        Some(rat_int(((offset + n) + (j - 1) * offset + (j - 1) * j.saturating_sub(2) / 2) as i64))
    };
    // beyond kdeg the a priori bound exceeds rv·j, hence any line of slope rv
    // through a point of a polygon with slopes < rv
    let mut kdeg = 1usize;
    while &step * &min_sum(kdeg + 1) < rv * rat_int(kdeg as i64 + 1)
        || &step * &min_sum(kdeg + 2) < rv * rat_int(kdeg as i64 + 2)
    {
        kdeg += 1;
    }
    let tail_ok = (kdeg + 1..kdeg + 4 * n + 64).all(|j| &step * &min_sum(j) >= rv * rat_int(j as i64));
    if !tail_ok {
        return Err(Error::Precision("a priori bounds do not certify the tail".into()));
    }
    let coeffs = theta.fredholm_coefficients(Some(kdeg));
    let prec = theta.get(0, 0).ctx().precision();
    let mut vals = Vec::with_capacity(kdeg + 1);
    for j in 0..=kdeg {
        let apriori = ceil_u64(&(&step * &min_sum(j)));
        let known = match min_sum_outside(j) {
            Some(s) => prec.min(ceil_u64(&(&step * &s))),
            None => prec,
        };
        let v = match coeffs.get(j).map(|c| c.val()) {
            Some(Val::Exact(v)) if v < known => Val::Exact(v),
            _ => Val::AtLeast(known.max(apriori)),
        };
        vals.push(v);
    }
    Ok(vals)
}

/// Result of one certified oracle run.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub params: OracleParams,
    /// `π`-adic Newton polygon of `C(s)` below `r·v_π(p)`.
    pub c_polygon: SlopePolygon,
    /// The local `L` slopes in `q`-adic units.
    pub np: SlopePolygon,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub run: OracleRun,
    pub rerun: OracleRun,
    pub stabilized: bool,
}

impl OracleReport {
    pub fn np(&self) -> &SlopePolygon {
        &self.run.np
    }
}

struct Setup {
    p: u32,
    d: usize,
    theta: ValuedMatrix<PadicScalar>,
}

fn setup(f: &AswCharacter, params: OracleParams) -> Result<Setup> {
    let terms = polynomial_terms(f)?;
    let d = terms.iter().map(|t| t.0).max().ok_or_else(|| Error::InvalidParameter("f is constant".into()))?;
    let p = f.p();
    let pi = dwork_pi(p, params.precision)?;
    let size = params.m_prime + 1;
    let e = frobenius_structure(&terms, &pi, p as usize * (size - 1))?;
    let theta = theta_matrix(&e, size)?;
    Ok(Setup { p, d, theta })
}

fn oracle_run(f: &AswCharacter, r: &Rational, params: OracleParams) -> Result<OracleRun> {
    let s = setup(f, params)?;
    let p = s.p;
    let rv = r * rat_int(p as i64 - 1);
    let vals = certified_fredholm_vals(&s.theta, 0, &index_growth(p, s.d), p, &rv)?;
    let c_polygon = polygon_from_vals(&vals, PolygonUnit::PiAdic { p, n: 1 }, Some(&rv))?;
    let mut slopes = c_polygon.slopes().to_vec();
    if slopes.first() != Some(&Rational::zero()) {
        return Err(Error::Stabilization(format!("C(s) has no slope-0 segment: {c_polygon}")));
    }
    slopes.remove(0);
    let local = SlopePolygon::from_slopes(slopes, PolygonUnit::PiAdic { p, n: 1 });
    let np = local.to_q_adic(p as u64)?;
    Ok(OracleRun { params, c_polygon, np })
}

/// Local Newton polygon below `r` (q-adic units) of a character on `A¹`,
/// computed from Dwork's operator and confirmed with `(2M', N+20)`. On a
/// mismatch or a precision shortfall the sizes are doubled, up to three times.
pub fn local_np_oracle(f: &AswCharacter, r: &Rational, params: OracleParams) -> Result<OracleReport> {
    if r > &rat_int(1) {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds 1")));
    }
    let max_prec = PadicCtx::max_precision(f.p());
    let mut params = params;
    let mut last = String::new();
    for _ in 0..3 {
        let bigger = OracleParams { m_prime: 2 * params.m_prime, precision: params.precision + 20 };
        let attempt = oracle_run(f, r, params).and_then(|run| Ok((run, oracle_run(f, r, bigger)?)));
        match attempt {
            Ok((run, rerun)) if run.np == rerun.np => return Ok(OracleReport { run, rerun, stabilized: true }),
            Ok((run, rerun)) => {
                last = format!("NP changed from {} to {} at M'={}, N={}", run.np, rerun.np, bigger.m_prime, bigger.precision)
            }
            Err(Error::Precision(msg)) => last = msg,
            Err(e) => return Err(e),
        }
        if params.precision + 20 > max_prec {
            break;
        }
        params = OracleParams { m_prime: 2 * params.m_prime, precision: (2 * params.precision).min(max_prec - 20) };
    }
    Err(Error::Stabilization(format!("{last}; larger M' and N are required")))
}

/// A comparison between the Newton polygon of `C_tr(s) = C(s)/(1-s)` and
/// `HP(δ) = {k(p-1)/d}`, both `π`-adic.
#[derive(Clone, Debug)]
pub struct PolygonCheck {
    pub passed: bool,
    pub np: SlopePolygon,
    pub hp: SlopePolygon,
    pub params: OracleParams,
    pub detail: String,
}

fn hp_delta(p: u32, d: usize, rv: &Rational) -> SlopePolygon {
    let slopes = (1..)
        .map(|k| Rational::new(((p as i64 - 1) * k).into(), (d as i64).into()))
        .take_while(|s| s < rv)
        .collect();
    SlopePolygon::from_slopes(slopes, PolygonUnit::PiAdic { p, n: 1 })
}

/// `NP^{<rv}` of `C_tr`, enlarging the truncation until it is certified.
fn c_tr_polygon(f: &AswCharacter, rv: &Rational, params: OracleParams) -> Result<(SlopePolygon, usize, OracleParams)> {
    let mut params = params;
    let max_prec = PadicCtx::max_precision(f.p());
    loop {
        let attempt = (|| {
            let s = setup(f, params)?;
            let idx: Vec<usize> = (1..s.theta.size()).collect();
            let tr = s.theta.principal_submatrix(&idx);
            let vals = certified_fredholm_vals(&tr, 1, &index_growth(s.p, s.d), s.p, rv)?;
            Ok((polygon_from_vals(&vals, PolygonUnit::PiAdic { p: s.p, n: 1 }, Some(rv))?, s.d))
        })();
        match attempt {
            Ok((np, d)) => return Ok((np, d, params)),
            Err(Error::Precision(msg)) => {
                if params.precision >= max_prec {
                    return Err(Error::Precision(format!("{msg} (at the maximal precision {max_prec})")));
                }
                params = OracleParams {
                    m_prime: params.m_prime + params.m_prime / 2,
                    precision: (2 * params.precision).min(max_prec),
                };
            }
            Err(e) => return Err(e),
        }
    }
}

/// `NP(C_tr) ⪰ HP(δ)` below `r·v_π(p)`.
pub fn hodge_bound_check(f: &AswCharacter, r: &Rational, params: OracleParams) -> Result<PolygonCheck> {
    let rv = r * rat_int(f.p() as i64 - 1);
    let (np, d, params) = c_tr_polygon(f, &rv, params)?;
    let hp = hp_delta(f.p(), d, &rv);
    let passed = np.lies_on_or_above(&hp)?;
    let detail = format!("NP^<{rv} = {np}, HP(δ={d}) = {hp}");
    Ok(PolygonCheck { passed, np, hp, params, detail })
}

/// `NP(C_tr)` and `HP(δ)` agree at `x = nd-1` and `x = nd` for `n = 1..=blocks`.
pub fn block_periodicity_check(f: &AswCharacter, blocks: usize, params: OracleParams) -> Result<PolygonCheck> {
    let p = f.p();
    let d = polynomial_terms(f)?.iter().map(|t| t.0).max().unwrap_or(0);
    if d == 0 || blocks == 0 {
        return Err(Error::InvalidParameter("need a nonconstant f and at least one block".into()));
    }
    // just above the slope ending block `blocks` of HP(δ)
    let rv = rat_int((blocks as i64) * (p as i64 - 1)) + Rational::new((p as i64 - 1).into(), (2 * d as i64).into());
    let (np, _, params) = c_tr_polygon(f, &rv, params)?;
    let hp = hp_delta(p, d, &rv);
    let mut passed = true;
    let mut detail = String::new();
    for n in 1..=blocks {
        for x in [n * d - 1, n * d] {
            let (a, b) = (np.value_at(x), hp.value_at(x));
            if a.is_none() || a != b {
                passed = false;
            }
            detail.push_str(&format!(
                "x={x}: NP={} HP={}; ",
                a.map_or("?".into(), |v| v.to_string()),
                b.map_or("?".into(), |v| v.to_string())
            ));
        }
    }
    Ok(PolygonCheck { passed, np, hp, params, detail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_limb_arithmetic_matches_bigint() {
        let ctx = PadicCtx::new(3, 150).unwrap();
        assert!(ctx.modulus() > LIMB);
        let m = BigInt::from(ctx.modulus());
        let mut x: u128 = 123456789123456789;
        for _ in 0..200 {
            let y = ctx.mul(x, x) ^ 0x5555;
            let y = y % ctx.modulus();
            let want = (BigInt::from(x) * BigInt::from(y)).mod_floor(&m);
            assert_eq!(BigInt::from(ctx.mul(x, y)), want);
            x = ctx.add(y, 977);
        }
        assert_eq!(ctx.mul(ctx.inv(5), 5), 1);
    }

    #[test]
    fn dwork_constant() {
        for (p, n) in [(3, 20), (5, 40), (7, 30)] {
            let d = dwork_pi(p, n).unwrap();
            let ctx = d.pi.ctx();
            assert!(d.pi.pow(p as u64 - 1).add(&PadicScalar::from_int(ctx, p as i128)).is_zero());
            assert_eq!(d.pi.valuation(), Some(1));
            let diff = d.pi.sub(&PadicScalar::zeta(ctx).sub(&d.pi.one_like()));
            assert!(diff.valuation().is_none_or(|v| v >= 2));
        }
    }

    #[test]
    fn splitting_function_examples() {
        let d = dwork_pi(3, 40).unwrap();
        let th = splitting_function(&d, 40).unwrap();
        assert_eq!(th.coeffs[0], d.pi.one_like());
        assert_eq!(th.coeffs[1], d.pi);
        // θ_2 = π²/2
        assert_eq!(th.coeffs[2].scale_int(2), d.pi.pow(2));
        let claimed = Growth { m: Rational::new(9.into(), 2.into()), b: Rational::zero() };
        assert!(th.satisfies(&claimed));
        assert!(th.satisfies(&theta_growth(3)));
    }

    #[test]
    fn frobenius_structure_examples() {
        let d = dwork_pi(3, 30).unwrap();
        let e = frobenius_structure(&[], &d, 10).unwrap();
        assert!(e.coeffs[1..].iter().all(|c| c.is_zero()));
        let th = splitting_function(&d, 10).unwrap();
        let e = frobenius_structure(&[(1, 1)], &d, 10).unwrap();
        assert_eq!(e.coeffs, th.coeffs);
        assert!(frobenius_structure(&[(3, 1)], &d, 10).is_err());
    }

    #[test]
    fn theta_matrix_examples() {
        let d = dwork_pi(3, 30).unwrap();
        let one = TruncatedSeries {
            coeffs: std::iter::once(d.pi.one_like()).chain(std::iter::repeat_n(d.pi.zero_like(), 12)).collect(),
            growth: None,
        };
        let t = theta_matrix(&one, 4).unwrap();
        for m in 0..4 {
            for k in 0..4 {
                assert_eq!(t.get(m, k).is_zero(), 3 * m != k);
            }
        }
        let th = frobenius_structure(&[(1, 1)], &d, 12).unwrap();
        let t = theta_matrix(&th, 4).unwrap();
        assert_eq!(*t.get(0, 0), d.pi.one_like());
        assert_eq!(t.get(1, 1).scale_int(2), d.pi.pow(2));
        assert!(theta_matrix(&th, 6).is_err());
    }

    #[test]
    fn fredholm_agrees_with_minor_sums() {
        let d = dwork_pi(5, 40).unwrap();
        let e = frobenius_structure(&[(2, 1), (3, 4)], &d, 30).unwrap();
        for size in 1..=5 {
            let t = theta_matrix(&e, size).unwrap();
            assert_eq!(t.fredholm_by_berkowitz(None), t.fredholm_by_minors());
        }
    }

    #[test]
    fn padic_matches_cyclotomic_valuation() {
        let ctx = PadicCtx::new(5, 40).unwrap();
        for coeffs in [[1i64, 2, 0, 0], [5, 0, 0, 0], [0, 1, 0, 0], [1, 1, 1, 1], [3, -1, 7, 25]] {
            let c = CyclotomicInteger::from_i64_coeffs(5, 1, &coeffs);
            let x = PadicScalar::from_cyclotomic(ctx, &c).unwrap();
            assert_eq!(x.valuation(), c.pi_valuation_u64());
            assert_eq!(x.to_cyclotomic(), c);
        }
    }
}
