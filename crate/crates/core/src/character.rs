//! Artin–Schreier–Witt characters on open subsets of `P¹` over `F_q`.
//!
//! A character of order `p^n` is given by a Witt vector `(f_0, …, f_{n-1})`
//! of rational functions. Its value at a point `x ∈ X(F_{q^k})` is
//! `ζ^c` with `c` the image of the Witt trace of `(f_0(x), …)` in `Z/p^n`.
//!
//! Character specifications are TOML documents:
//!
//! ```toml
//! p = 5
//! n = 1          # optional, default 1
//! q = 5          # optional, default p
//! witt = ["x^2 + x^-2"]
//! ```
//!
//! Each Witt coordinate is an expression in `x` built from integers, `x`,
//! `a` (the generator of `F_q`, only when `q > p`), `+ - * / ^` and
//! parentheses. Exponents are integers and may be negative (`x^-2`,
//! `(x-1)^(-3)`); juxtaposition multiplies (`3x^2`, `a(x+1)`). The ramified
//! set is the set of poles of the coordinates.

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exactnum::{is_prime, prime_power_exponent, rat_int, Rational};
use crate::ff::{Embedding, FFElem, FieldParams};
use crate::polygon::{PolygonUnit, SlopePolygon};

// --- polynomials over F_q, low degree first, no trailing zeros ---

type Poly = Vec<FFElem>;

fn trim(f: &FieldParams, mut a: Poly) -> Poly {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
    a
}

fn padd(f: &FieldParams, a: &[FFElem], b: &[FFElem]) -> Poly {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n).map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    trim(f, out)
}

fn pneg(f: &FieldParams, a: &[FFElem]) -> Poly {
    a.iter().map(|c| f.neg(c)).collect()
}

fn pmul(f: &FieldParams, a: &[FFElem], b: &[FFElem]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

fn pdivrem(f: &FieldParams, a: &[FFElem], b: &[FFElem]) -> (Poly, Poly) {
    let mut r = trim(f, a.to_vec());
    let db = b.len() - 1;
    let inv = f.inv(&b[db]).expect("nonzero leading coefficient");
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = f.mul(r.last().unwrap(), &inv);
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = f.sub(&r[shift + i], &f.mul(&c, bc));
        }
        q[shift] = c;
        r = trim(f, r);
    }
    (trim(f, q), r)
}

fn pgcd(f: &FieldParams, a: &[FFElem], b: &[FFElem]) -> Poly {
    let (mut a, mut b) = (trim(f, a.to_vec()), trim(f, b.to_vec()));
    while !b.is_empty() {
        let r = pdivrem(f, &a, &b).1;
        a = b;
        b = r;
    }
    monic(f, &a)
}

fn monic(f: &FieldParams, a: &[FFElem]) -> Poly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = f.inv(l).unwrap();
            a.iter().map(|c| f.mul(c, &inv)).collect()
        }
    }
}

/// `a(x + s)`.
fn pshift(f: &FieldParams, a: &[FFElem], s: &FFElem) -> Poly {
    let lin = vec![s.clone(), f.one()];
    let mut out: Poly = Vec::new();
    for c in a.iter().rev() {
        out = padd(f, &pmul(f, &out, &lin), std::slice::from_ref(c));
    }
    out
}

fn fmt_elem(f: &FieldParams, c: &FFElem) -> String {
    let terms: Vec<String> = c
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| match (i, v) {
            (0, v) => v.to_string(),
            (1, 1) => "a".into(),
            (1, v) => format!("{v}a"),
            (i, 1) => format!("a^{i}"),
            (i, v) => format!("{v}a^{i}"),
        })
        .collect();
    if terms.is_empty() {
        return "0".into();
    }
    if terms.len() > 1 && f.k() > 1 {
        format!("({})", terms.join(" + "))
    } else {
        terms.join(" + ")
    }
}

fn fmt_poly(f: &FieldParams, a: &[FFElem], var: &str) -> String {
    let terms: Vec<String> = a
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !f.is_zero(c))
        .map(|(i, c)| {
            let coef = if i > 0 && *c == f.one() { String::new() } else { fmt_elem(f, c) };
            match i {
                0 => coef,
                1 => format!("{coef}{var}"),
                _ => format!("{coef}{var}^{i}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// A rational function `num/den` over `F_q` in lowest terms with monic denominator.
#[derive(Clone)]
pub struct RationalFunction {
    field: Arc<FieldParams>,
    num: Poly,
    den: Poly,
}

impl PartialEq for RationalFunction {
    fn eq(&self, o: &Self) -> bool {
        self.num == o.num && self.den == o.den
    }
}

impl Eq for RationalFunction {}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = fmt_poly(&self.field, &self.num, "x");
        if self.den.len() == 1 {
            write!(f, "{n}")
        } else {
            write!(f, "({n})/({})", fmt_poly(&self.field, &self.den, "x"))
        }
    }
}

impl RationalFunction {
    pub fn new(field: Arc<FieldParams>, num: Poly, den: Poly) -> Result<Self> {
        let f = &field;
        let num = trim(f, num);
        let den = trim(f, den);
        if den.is_empty() {
            return Err(Error::InvalidParameter("division by zero".into()));
        }
        let g = pgcd(f, &num, &den);
        let num = pdivrem(f, &num, &g).0;
        let den = pdivrem(f, &den, &g).0;
        let lead = f.inv(den.last().unwrap()).unwrap();
        let num = num.iter().map(|c| f.mul(c, &lead)).collect();
        let den = den.iter().map(|c| f.mul(c, &lead)).collect();
        Ok(Self { field, num, den })
    }

    pub fn polynomial(field: Arc<FieldParams>, coeffs: Poly) -> Self {
        let one = vec![field.one()];
        Self::new(field, coeffs, one).unwrap()
    }

    pub fn constant(field: Arc<FieldParams>, c: FFElem) -> Self {
        Self::polynomial(field, vec![c])
    }

    pub fn zero(field: Arc<FieldParams>) -> Self {
        Self::polynomial(field, Vec::new())
    }

    pub fn x(field: Arc<FieldParams>) -> Self {
        let v = vec![field.zero(), field.one()];
        Self::polynomial(field, v)
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    pub fn numerator(&self) -> &[FFElem] {
        &self.num
    }

    pub fn denominator(&self) -> &[FFElem] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let f = &self.field;
        let num = padd(f, &pmul(f, &self.num, &o.den), &pmul(f, &o.num, &self.den));
        Self::new(self.field.clone(), num, pmul(f, &self.den, &o.den)).unwrap()
    }

    pub fn neg(&self) -> Self {
        Self { field: self.field.clone(), num: pneg(&self.field, &self.num), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let f = &self.field;
        Self::new(self.field.clone(), pmul(f, &self.num, &o.num), pmul(f, &self.den, &o.den)).unwrap()
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        let f = &self.field;
        Self::new(self.field.clone(), pmul(f, &self.num, &o.den), pmul(f, &self.den, &o.num))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 {
            Self::constant(self.field.clone(), self.field.one()).div(self)?
        } else {
            self.clone()
        };
        let mut acc = Self::constant(self.field.clone(), self.field.one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Order of the pole at `place` (0 if regular there).
    pub fn pole_order(&self, place: &Place) -> u64 {
        match place {
            Place::Infinity => self.num.len().saturating_sub(self.den.len()) as u64,
            Place::Finite(a) => {
                let f = &self.field;
                let mut d = self.den.clone();
                let lin = vec![f.neg(a), f.one()];
                let mut k = 0;
                loop {
                    let (q, r) = pdivrem(f, &d, &lin);
                    if !r.is_empty() {
                        return k;
                    }
                    d = q;
                    k += 1;
                }
            }
        }
    }

    /// The poles of this function, all of which must be `F_q`-rational.
    pub fn poles(&self) -> Result<Vec<Place>> {
        let f = &self.field;
        let mut out = Vec::new();
        if self.num.len() > self.den.len() {
            out.push(Place::Infinity);
        }
        let mut degree = 0;
        for a in f.elements() {
            let pl = Place::Finite(a);
            let k = self.pole_order(&pl);
            if k > 0 {
                degree += k as usize;
                out.push(pl);
            }
        }
        if degree != self.den.len() - 1 {
            return Err(Error::NonRationalPlace(format!("denominator of {self} has an irrational factor")));
        }
        Ok(out)
    }

    /// Polar part at `place` as a polynomial in the local coordinate
    /// `u = x` (at infinity) or `u = 1/(x-a)`, without constant term.
    pub fn polar_part(&self, place: &Place) -> Poly {
        let f = &self.field;
        match place {
            Place::Infinity => {
                let mut q = pdivrem(f, &self.num, &self.den).0;
                if !q.is_empty() {
                    q[0] = f.zero();
                }
                trim(f, q)
            }
            Place::Finite(a) => {
                let m = self.pole_order(place) as usize;
                if m == 0 {
                    return Vec::new();
                }
                // f(t + a) = N(t) / (t^m D(t)), D(0) != 0
                let n = pshift(f, &self.num, a);
                let mut d = pshift(f, &self.den, a);
                d.drain(..m);
                let d0inv = f.inv(&d[0]).unwrap();
                let z = f.zero();
                let mut b: Vec<FFElem> = Vec::with_capacity(m);
                for j in 0..m {
                    let mut s = n.get(j).cloned().unwrap_or(z.clone());
                    for i in 1..=j {
                        if let Some(di) = d.get(i) {
                            s = f.sub(&s, &f.mul(di, &b[j - i]));
                        }
                    }
                    b.push(f.mul(&s, &d0inv));
                }
                // Σ b_j t^{j-m} = Σ b_j u^{m-j}
                let mut u = vec![f.zero(); m + 1];
                for (j, bj) in b.into_iter().enumerate() {
                    u[m - j] = bj;
                }
                trim(f, u)
            }
        }
    }

    /// Value at the point `∞` when regular there.
    pub fn value_at_infinity(&self) -> Option<FFElem> {
        let f = &self.field;
        match self.num.len().cmp(&self.den.len()) {
            std::cmp::Ordering::Greater => None,
            std::cmp::Ordering::Less => Some(f.zero()),
            std::cmp::Ordering::Equal => Some(f.mul(self.num.last().unwrap(), &f.inv(self.den.last().unwrap()).unwrap())),
        }
    }

    /// Rebuilds `c + Σ_P polar_P` from its pieces.
    pub fn from_polar_parts(field: Arc<FieldParams>, constant: FFElem, parts: &[(Place, Poly)]) -> Self {
        let mut acc = Self::constant(field.clone(), constant);
        for (pl, u) in parts {
            let term = match pl {
                Place::Infinity => Self::polynomial(field.clone(), u.clone()),
                Place::Finite(a) => {
                    let m = u.len().saturating_sub(1);
                    let f = &field;
                    // Σ c_k (x-a)^{-k} = Σ c_k (x-a)^{m-k} / (x-a)^m
                    let lin = vec![f.neg(a), f.one()];
                    let mut num: Poly = Vec::new();
                    let mut pw = vec![f.one()];
                    for k in (0..=m).rev() {
                        if k < u.len() && k > 0 {
                            num = padd(f, &num, &pmul(f, &pw, &[u[k].clone()]));
                        }
                        pw = pmul(f, &pw, &lin);
                    }
                    let mut den = vec![f.one()];
                    for _ in 0..m {
                        den = pmul(f, &den, &lin);
                    }
                    Self::new(field.clone(), num, den).unwrap()
                }
            };
            acc = acc.add(&term);
        }
        acc
    }
}

/// A degree-one place of `P¹` over `F_q`: `∞` or the zero of `x - a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Finite(FFElem),
}

impl Place {
    pub fn label(&self, field: &FieldParams) -> String {
        match self {
            Place::Infinity => "inf".into(),
            Place::Finite(a) if field.is_zero(a) => "x".into(),
            Place::Finite(a) => format!("x-{}", fmt_elem(field, a)),
        }
    }
}

/// Parsed form of a character specification document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub n: u32,
    pub q: Option<u64>,
    pub witt: Vec<String>,
}

fn one() -> u32 {
    1
}

impl CharacterSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<AswCharacter> {
        let q = self.q.unwrap_or(self.p as u64);
        let field = field_for(self.p, q)?;
        let coords = self
            .witt
            .iter()
            .map(|s| parse_rational_function(&field, s))
            .collect::<Result<Vec<_>>>()?;
        AswCharacter::new(self.p, self.n, q, coords)
    }
}

fn field_for(p: u32, q: u64) -> Result<Arc<FieldParams>> {
    if !is_prime(p as u64) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let m = prime_power_exponent(q, p as u64).ok_or(Error::NotPrimePower { q, p: p as u64 })?;
    FieldParams::get(p, m)
}

/// A character `ρ` of order `p^n` on `P¹ \ S` given by Witt coordinates.
#[derive(Clone, Debug)]
pub struct AswCharacter {
    p: u32,
    n: u32,
    q: u64,
    field: Arc<FieldParams>,
    coords: Vec<RationalFunction>,
    places: Vec<Place>,
}

impl AswCharacter {
    pub fn new(p: u32, n: u32, q: u64, coords: Vec<RationalFunction>) -> Result<Self> {
        let field = field_for(p, q)?;
        if n == 0 || n > 4 {
            return Err(Error::InvalidParameter(format!("order exponent n={n} outside 1..=4")));
        }
        if coords.len() != n as usize {
            return Err(Error::InvalidParameter(format!("{} Witt coordinates given for n={n}", coords.len())));
        }
        if coords.iter().any(|c| c.field.modulus() != field.modulus()) {
            return Err(Error::StructureMismatch("coordinates defined over a different field".into()));
        }
        let mut places: Vec<Place> = Vec::new();
        for c in &coords {
            for pl in c.poles()? {
                if !places.contains(&pl) {
                    places.push(pl);
                }
            }
        }
        places.sort_by_key(|pl| match pl {
            Place::Infinity => 0,
            Place::Finite(a) => 1 + field.index_of(a),
        });
        Ok(Self { p, n, q, field, coords, places })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        CharacterSpec::from_toml(text)?.build()
    }

    /// Order-`p` character given by a single polynomial or Laurent expression.
    pub fn parse(p: u32, q: u64, expr: &str) -> Result<Self> {
        let field = field_for(p, q)?;
        Self::new(p, 1, q, vec![parse_rational_function(&field, expr)?])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    pub fn coords(&self) -> &[RationalFunction] {
        &self.coords
    }

    /// The ramified set `S`.
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn place_labels(&self) -> Vec<String> {
        self.places.iter().map(|pl| pl.label(&self.field)).collect()
    }

    /// Whether no coordinate has a polar term of exponent divisible by `p`.
    pub fn is_reduced(&self) -> bool {
        self.coords.iter().all(|c| {
            self.places
                .iter()
                .all(|pl| c.polar_part(pl).iter().enumerate().all(|(k, a)| k % self.p as usize != 0 || self.field.is_zero(a)))
        })
    }

    /// Artin–Schreier reduction applied to each coordinate: polar terms
    /// `c u^{pj}` are replaced by `c^{1/p} u^j` until none remain.
    pub fn reduce(&self) -> Self {
        let f = &self.field;
        let p = self.p as usize;
        let coords = self
            .coords
            .iter()
            .map(|c| {
                let mut parts = Vec::new();
                let mut regular = c.clone();
                for pl in &self.places {
                    let mut u = c.polar_part(pl);
                    regular = regular.sub(&RationalFunction::from_polar_parts(f.clone(), f.zero(), &[(pl.clone(), u.clone())]));
                    while let Some(k) = (1..u.len()).rev().find(|&k| k % p == 0 && !f.is_zero(&u[k])) {
                        let root = f.frobenius_inverse(&u[k]);
                        u[k] = f.zero();
                        u[k / p] = f.add(&u[k / p], &root);
                        u = trim(f, u);
                    }
                    parts.push((pl.clone(), u));
                }
                let constant = regular.value_at_infinity().expect("regular remainder is constant");
                debug_assert!(regular.num.len() <= 1 && regular.den.len() == 1);
                RationalFunction::from_polar_parts(f.clone(), constant, &parts)
            })
            .collect();
        Self { coords, ..self.clone() }
    }

    /// The polar parts of all coordinates at `place`, as polynomials in `u`.
    pub fn polar_parts(&self, place: &Place) -> Result<Vec<Poly>> {
        if !self.places.contains(place) {
            return Err(Error::NotRamified(place.label(&self.field)));
        }
        Ok(self.coords.iter().map(|c| c.polar_part(place)).collect())
    }

    /// Character on `A¹` whose coordinates are the polar parts at `place`
    /// rewritten in `u = 1/t_P`; it is ramified only at `∞`.
    pub fn localize(&self, place: &Place) -> Result<Self> {
        let coords = self
            .polar_parts(place)?
            .into_iter()
            .map(|u| RationalFunction::polynomial(self.field.clone(), u))
            .collect();
        Self::new(self.p, self.n, self.q, coords)
    }

    /// Checks the guard for total ramification: `f_0` has a pole at every place of `S`.
    pub fn check_totally_ramified(&self) -> Result<()> {
        if self.places.is_empty() {
            return Err(Error::NotTotallyRamified("the character is unramified".into()));
        }
        for pl in &self.places {
            if self.coords[0].pole_order(pl) == 0 {
                return Err(Error::NotTotallyRamified(format!("f_0 is regular at {}", pl.label(&self.field))));
            }
        }
        Ok(())
    }

    pub fn swan_conductors(&self) -> Result<SwanData> {
        if !self.is_reduced() {
            return Err(Error::Ramification("character is not reduced".into()));
        }
        self.check_totally_ramified()?;
        let p = self.p as u64;
        let mut entries = Vec::new();
        for pl in &self.places {
            let ords: Vec<u64> = self.coords.iter().map(|c| c.pole_order(pl)).collect();
            let breaks: Vec<u64> = (1..=self.n as usize)
                .map(|i| (0..i).map(|j| p.pow((i - 1 - j) as u32) * ords[j]).max().unwrap())
                .collect();
            for w in breaks.windows(2) {
                if w[1] < p * w[0] {
                    return Err(Error::Ramification(format!("breaks {breaks:?} violate d_(i+1) >= p d_i")));
                }
            }
            let d = *breaks.last().unwrap();
            if d < p.pow(self.n - 1) {
                return Err(Error::Ramification(format!("Swan conductor {d} below p^(n-1)")));
            }
            entries.push(LocalSwan {
                place: pl.clone(),
                label: pl.label(&self.field),
                breaks,
                d,
                delta: Rational::new(d.into(), p.pow(self.n - 1).into()),
            });
        }
        Ok(SwanData { p: self.p, n: self.n, q: self.q, entries })
    }

    /// Values of the coordinates at the points of `F_{q^k}`.
    pub fn evaluator(&self, k: u32) -> Result<Evaluator> {
        let target = FieldParams::get(self.p, self.field.k() * k)?;
        let emb = Embedding::new(self.field.clone(), target.clone())?;
        let coords = self
            .coords
            .iter()
            .map(|c| (c.num.iter().map(|x| emb.apply(x)).collect(), c.den.iter().map(|x| emb.apply(x)).collect()))
            .collect();
        let excluded = self
            .places
            .iter()
            .filter_map(|pl| match pl {
                Place::Finite(a) => Some(emb.apply(a)),
                Place::Infinity => None,
            })
            .collect();
        let at_infinity = if self.places.contains(&Place::Infinity) {
            None
        } else {
            Some(self.coords.iter().map(|c| emb.apply(&c.value_at_infinity().unwrap())).collect())
        };
        Ok(Evaluator { field: target, coords, excluded, at_infinity })
    }
}

/// Coordinate evaluation over a fixed extension `F_{q^k}`.
pub struct Evaluator {
    field: Arc<FieldParams>,
    coords: Vec<(Poly, Poly)>,
    excluded: Vec<FFElem>,
    at_infinity: Option<Vec<FFElem>>,
}

impl Evaluator {
    pub fn field(&self) -> &Arc<FieldParams> {
        &self.field
    }

    /// Coordinates at the affine point `x`, or `None` if `x ∈ S`.
    pub fn eval(&self, x: &FFElem) -> Option<Vec<FFElem>> {
        if self.excluded.contains(x) {
            return None;
        }
        let f = &self.field;
        Some(
            self.coords
                .iter()
                .map(|(n, d)| {
                    let dv = f.eval_poly(d, x);
                    let inv = f.inv(&dv).expect("pole outside the ramified set");
                    f.mul(&f.eval_poly(n, x), &inv)
                })
                .collect(),
        )
    }

    /// Coordinates at `∞` when `∞ ∉ S`.
    pub fn at_infinity(&self) -> Option<&[FFElem]> {
        self.at_infinity.as_deref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSwan {
    pub place: Place,
    pub label: String,
    /// `d_{P,1} ≤ … ≤ d_{P,n}`.
    pub breaks: Vec<u64>,
    pub d: u64,
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwanData {
    pub p: u32,
    pub n: u32,
    pub q: u64,
    pub entries: Vec<LocalSwan>,
}

impl SwanData {
    pub fn get(&self, place: &Place) -> Option<&LocalSwan> {
        self.entries.iter().find(|e| &e.place == place)
    }

    /// `2g - 2 + Σ (d_P + 1)`.
    pub fn degree(&self, g: u64) -> Result<u64> {
        let total = 2 * g as i64 - 2 + self.entries.iter().map(|e| e.d as i64 + 1).sum::<i64>();
        u64::try_from(total).map_err(|_| Error::Degree(format!("negative L-function degree {total}")))
    }
}

/// `{1/d, 2/d, …, (d-1)/d}` in `q`-adic units.
pub fn local_hodge_polygon(d: u64, q: u64) -> SlopePolygon {
    let slopes = (1..d).map(|k| Rational::new(k.into(), d.into())).collect();
    SlopePolygon::from_slopes(slopes, PolygonUnit::QAdic { q })
}

/// Local polygons concatenated with `g-1+|S|` slopes 0 and as many slopes 1.
pub fn global_hodge_polygon(swan: &SwanData, g: u64) -> Result<SlopePolygon> {
    let extra = g as i64 - 1 + swan.entries.len() as i64;
    if extra < 0 {
        return Err(Error::InvalidParameter(format!("g - 1 + |S| = {extra} is negative")));
    }
    let mut slopes = vec![rat_int(0); extra as usize];
    slopes.extend(vec![rat_int(1); extra as usize]);
    let mut hp = SlopePolygon::from_slopes(slopes, PolygonUnit::QAdic { q: swan.q });
    for e in &swan.entries {
        hp = hp.concat(&local_hodge_polygon(e.d, swan.q))?;
    }
    Ok(hp)
}

/// Ordinarity, `δ_P ∈ Z`, and `p ≡ 1 mod δ_P` for every `P ∈ S`.
pub fn check_equality_conditions(swan: &SwanData, ordinary: bool) -> bool {
    ordinary
        && swan.entries.iter().all(|e| {
            e.delta.is_integer() && {
                let delta = e.delta.to_integer();
                (num_bigint::BigInt::from(swan.p) - 1u32) % delta == num_bigint::BigInt::from(0)
            }
        })
}

// --- expression parser ---

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    field: &'a Arc<FieldParams>,
}

pub fn parse_rational_function(field: &Arc<FieldParams>, text: &str) -> Result<RationalFunction> {
    let mut p = Parser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, field };
    if p.chars.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let r = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected character"));
    }
    Ok(r)
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().collect();
        Error::Parse(format!("{what} at position {} (near '{rest}')", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    acc = acc.div(&d).map_err(|_| self.error("division by zero"))?;
                }
                Some(c) if c.is_ascii_digit() || c == 'x' || c == 'a' || c == '(' => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let paren = self.peek() == Some('(');
        if paren {
            self.pos += 1;
        }
        let neg = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let e = self.integer()?;
        if paren {
            if self.peek() != Some(')') {
                return Err(self.error("expected ')'"));
            }
            self.pos += 1;
        }
        let e = i64::try_from(e).map_err(|_| self.error("exponent too large"))?;
        base.pow(if neg { -e } else { e }).map_err(|_| self.error("zero raised to a negative power"))
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.error("integer too large"))
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        let f = self.field.clone();
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(RationalFunction::x(f))
            }
            Some('a') => {
                if f.k() == 1 {
                    return Err(self.error("'a' is only available when q > p"));
                }
                self.pos += 1;
                let g = f.generator();
                Ok(RationalFunction::constant(f, g))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()? % f.p() as u64;
                let c = f.from_int(v as i64);
                Ok(RationalFunction::constant(f, c))
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn chr(p: u32, q: u64, e: &str) -> AswCharacter {
        AswCharacter::parse(p, q, e).unwrap()
    }

    fn same_function(a: &AswCharacter, e: &str) -> bool {
        let f = a.field().clone();
        a.coords()[0] == parse_rational_function(&f, e).unwrap()
    }

    #[test]
    fn parser_examples() {
        let f = FieldParams::get(5, 1).unwrap();
        let a = parse_rational_function(&f, "x^2 + x^-2").unwrap();
        let b = parse_rational_function(&f, "(x^4 + 1)/x^2").unwrap();
        assert_eq!(a, b);
        let c = parse_rational_function(&f, "3x(x+1) - 2*x^(2)").unwrap();
        assert_eq!(c, parse_rational_function(&f, "x^2 + 3x").unwrap());
        assert_eq!(parse_rational_function(&f, "7").unwrap(), parse_rational_function(&f, "2").unwrap());
        assert!(parse_rational_function(&f, "1/(x-x)").is_err());
        assert!(parse_rational_function(&f, "x +").is_err());
        assert!(parse_rational_function(&f, "a").is_err());
        let f9 = FieldParams::get(3, 2).unwrap();
        let g = parse_rational_function(&f9, "a^2 + 1").unwrap();
        assert!(g.is_zero() || g.numerator().len() == 1);
    }

    #[test]
    fn toml_spec() {
        let c = AswCharacter::from_toml("p = 5\nwitt = [\"x^2 + x^-2\"]\n").unwrap();
        assert_eq!(c.q(), 5);
        assert_eq!(c.place_labels(), vec!["inf", "x"]);
        let c = AswCharacter::from_toml("p = 3\nn = 2\nq = 3\nwitt = [\"x\", \"0\"]\n").unwrap();
        assert_eq!(c.n(), 2);
        assert!(AswCharacter::from_toml("p = 3\nwitt = [\"x\"]\nbogus = 1\n").is_err());
        assert!(AswCharacter::from_toml("p = 3\nq = 4\nwitt = [\"x\"]\n").is_err());
    }

    #[test]
    fn non_rational_poles_are_rejected() {
        assert!(matches!(AswCharacter::parse(3, 3, "1/(x^2+1)"), Err(Error::NonRationalPlace(_))));
        assert!(AswCharacter::parse(3, 9, "1/(x^2+1)").is_ok());
    }

    #[test]
    fn reduction_examples() {
        let c = chr(3, 3, "x^3").reduce();
        assert!(same_function(&c, "x"));
        assert_eq!(c.swan_conductors().unwrap().entries[0].d, 1);
        let c = chr(3, 3, "x^2");
        assert!(c.is_reduced());
        assert!(same_function(&c.reduce(), "x^2"));
        assert!(same_function(&chr(5, 5, "x^10 + x").reduce(), "x^2 + x"));
        let c = chr(3, 3, "2 + x^-3 + x").reduce();
        assert!(same_function(&c, "2 + x^-1 + x"));
        let c = chr(3, 3, "(x-1)^-6").reduce();
        assert!(same_function(&c, "(x-1)^-2"));
        assert!(!chr(3, 3, "x^6").is_reduced());
        assert!(chr(3, 3, "x^6").swan_conductors().is_err());
    }

    #[test]
    fn swan_examples() {
        let s = chr(5, 5, "x^4").swan_conductors().unwrap();
        assert_eq!((s.entries[0].d, s.entries[0].delta.clone()), (4, rat_int(4)));
        let c = AswCharacter::from_toml("p = 3\nn = 2\nwitt = [\"x\", \"0\"]").unwrap();
        let s = c.swan_conductors().unwrap();
        assert_eq!(s.entries[0].breaks, vec![1, 3]);
        assert_eq!(s.entries[0].delta, rat_int(1));
        let c = chr(5, 5, "x^2 + (x-1)^-2");
        let s = c.swan_conductors().unwrap();
        assert_eq!(s.entries.iter().map(|e| e.d).collect::<Vec<_>>(), vec![2, 2]);
        assert_eq!(s.degree(0).unwrap(), 4);
    }

    #[test]
    fn totally_ramified_guard() {
        let c = AswCharacter::from_toml("p = 3\nn = 2\nwitt = [\"x\", \"1/x\"]").unwrap();
        assert!(matches!(c.swan_conductors(), Err(Error::NotTotallyRamified(_))));
    }

    #[test]
    fn hodge_polygon_examples() {
        let q = 5;
        let s = |k: i64, d: i64| rat(k, d);
        assert_eq!(local_hodge_polygon(4, q).slopes(), &[s(1, 4), s(1, 2), s(3, 4)]);
        assert!(local_hodge_polygon(1, q).is_empty());
        assert_eq!(local_hodge_polygon(2, q).slopes(), &[s(1, 2)]);
        let swan = chr(5, 5, "x^2 + x^-2").swan_conductors().unwrap();
        let hp = global_hodge_polygon(&swan, 0).unwrap();
        assert_eq!(hp.slopes(), &[s(0, 1), s(1, 2), s(1, 2), s(1, 1)]);
        assert_eq!(hp.len() as u64, swan.degree(0).unwrap());
        let swan = chr(5, 5, "x^4").swan_conductors().unwrap();
        assert_eq!(global_hodge_polygon(&swan, 0).unwrap().slopes(), &[s(1, 4), s(1, 2), s(3, 4)]);
        let swan = chr(5, 5, "x^2").swan_conductors().unwrap();
        assert_eq!(global_hodge_polygon(&swan, 1).unwrap().slopes(), &[s(0, 1), s(1, 2), s(1, 1)]);
    }

    #[test]
    fn equality_condition_examples() {
        assert!(check_equality_conditions(&chr(5, 5, "x^4").swan_conductors().unwrap(), true));
        assert!(!check_equality_conditions(&chr(3, 3, "x^5").swan_conductors().unwrap(), true));
        let c = AswCharacter::from_toml("p = 3\nn = 2\nwitt = [\"x\", \"0\"]").unwrap();
        assert!(check_equality_conditions(&c.swan_conductors().unwrap(), true));
        assert!(!check_equality_conditions(&chr(5, 5, "x^4").swan_conductors().unwrap(), false));
    }

    #[test]
    fn localization_takes_polar_parts() {
        let c = chr(5, 5, "x^2 + (x-1)^-2 + 3");
        let f = c.field().clone();
        let at_inf = c.localize(&Place::Infinity).unwrap();
        assert!(same_function(&at_inf, "x^2"));
        let at_one = c.localize(&Place::Finite(f.one())).unwrap();
        assert!(same_function(&at_one, "x^2"));
        let c = chr(5, 5, "x/(x-1)^2");
        // x/(x-1)^2 = 1/(x-1) + 1/(x-1)^2
        assert!(same_function(&c.localize(&Place::Finite(f.one())).unwrap(), "x^2 + x"));
        assert!(c.localize(&Place::Finite(f.zero())).is_err());
    }
}
