//! Newton and Hodge polygons stored as sorted slope multisets.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{CyclotomicInteger, Rational, Valuation};

/// Normalization of the valuation a polygon is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolygonUnit {
    /// `v_π` with `π` a uniformizer of `Z_p[ζ_{p^n}]`, so `v_π(p) = φ(p^n)`.
    PiAdic { p: u32, n: u32 },
    /// `v_q` with `v_q(q) = 1`.
    QAdic { q: u64 },
    Abstract,
}

impl fmt::Display for PolygonUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolygonUnit::PiAdic { p, n } => write!(f, "pi-adic(p={p}, n={n})"),
            PolygonUnit::QAdic { q } => write!(f, "q-adic(q={q})"),
            PolygonUnit::Abstract => write!(f, "abstract"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopePolygon {
    slopes: Vec<Rational>,
    infinite: usize,
    unit: PolygonUnit,
}

impl SlopePolygon {
    pub fn from_slopes(mut slopes: Vec<Rational>, unit: PolygonUnit) -> Self {
        slopes.sort();
        Self { slopes, infinite: 0, unit }
    }

    pub fn empty(unit: PolygonUnit) -> Self {
        Self { slopes: Vec::new(), infinite: 0, unit }
    }

    /// Same polygon with `count` infinite slopes recorded alongside.
    pub fn with_infinite(mut self, count: usize) -> Self {
        self.infinite = count;
        self
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn unit(&self) -> PolygonUnit {
        self.unit
    }

    /// Number of finite slopes.
    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn infinite_count(&self) -> usize {
        self.infinite
    }

    pub fn vertices(&self) -> Vec<(usize, Rational)> {
        let mut out = Vec::with_capacity(self.slopes.len() + 1);
        let mut y = Rational::zero();
        out.push((0, y.clone()));
        for (i, s) in self.slopes.iter().enumerate() {
            y += s;
            out.push((i + 1, y.clone()));
        }
        out
    }

    /// Height at integer abscissa `x`, if `x` is within range.
    pub fn value_at(&self, x: usize) -> Option<Rational> {
        if x > self.slopes.len() {
            return None;
        }
        Some(self.slopes[..x].iter().fold(Rational::zero(), |acc, s| acc + s))
    }

    pub fn terminal_point(&self) -> (usize, Rational) {
        (self.slopes.len(), self.value_at(self.slopes.len()).unwrap())
    }

    fn check_unit(&self, other: &Self) -> Result<()> {
        if self.unit != other.unit {
            return Err(Error::UnitMismatch(self.unit.to_string(), other.unit.to_string()));
        }
        Ok(())
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_unit(other)?;
        let mut slopes = self.slopes.clone();
        slopes.extend(other.slopes.iter().cloned());
        Ok(Self::from_slopes(slopes, self.unit).with_infinite(self.infinite + other.infinite))
    }

    /// Keeps exactly the slopes `< r`.
    pub fn truncate_below(&self, r: &Rational) -> Self {
        Self {
            slopes: self.slopes.iter().filter(|s| *s < r).cloned().collect(),
            infinite: 0,
            unit: self.unit,
        }
    }

    /// Whether `self` lies on or above `other` on their common x-range.
    pub fn lies_on_or_above(&self, other: &Self) -> Result<bool> {
        self.check_unit(other)?;
        let m = self.len().min(other.len());
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        for i in 0..m {
            a += &self.slopes[i];
            b += &other.slopes[i];
            if a < b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn shares_terminal_point(&self, other: &Self) -> Result<bool> {
        self.check_unit(other)?;
        Ok(self.terminal_point() == other.terminal_point())
    }

    /// Multiplies every slope by `factor` and relabels the unit.
    pub fn scale(&self, factor: &Rational, unit: PolygonUnit) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::InvalidParameter(format!("scale factor {factor} is not positive")));
        }
        Ok(Self {
            slopes: self.slopes.iter().map(|s| s * factor).collect(),
            infinite: self.infinite,
            unit,
        })
    }

    /// Converts a `π`-adic polygon over `Q_p(ζ_{p^n})` to `q`-adic units.
    pub fn to_q_adic(&self, q: u64) -> Result<Self> {
        let PolygonUnit::PiAdic { p, n } = self.unit else {
            return Err(Error::UnitMismatch(self.unit.to_string(), "pi-adic".into()));
        };
        let k = crate::exactnum::prime_power_exponent(q, p as u64)
            .ok_or(Error::NotPrimePower { q, p: p as u64 })?;
        let v_q = (p as i64 - 1) * (p as i64).pow(n - 1) * k as i64;
        self.scale(&Rational::new(BigInt::one(), BigInt::from(v_q)), PolygonUnit::QAdic { q })
    }

    /// Slope multiset of the lower convex hull of `(i, vals[i])`, ignoring
    /// infinite valuations. The first point must be finite.
    pub fn from_valuations(vals: &[Valuation], unit: PolygonUnit) -> Result<Self> {
        let pts: Vec<(i64, Rational)> = vals
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.finite().map(|r| (i as i64, r.clone())))
            .collect();
        if pts.first().map(|p| p.0) != Some(0) {
            return Err(Error::InvalidParameter("constant term has infinite valuation".into()));
        }
        Ok(Self::from_slopes(lower_hull_slopes(&pts), unit))
    }

    /// Newton polygon of `Σ c_i s^i` with `c_0 = 1`.
    pub fn np_of_polynomial(coeffs: &[CyclotomicInteger], unit: PolygonUnit) -> Result<Self> {
        match coeffs.first() {
            Some(c) if c.as_integer() == Some(BigInt::one()) => {}
            _ => return Err(Error::InvalidParameter("polynomial does not start with 1".into())),
        }
        let vals = coeffs
            .iter()
            .map(|c| match unit {
                PolygonUnit::PiAdic { .. } => Ok(c.pi_valuation()),
                PolygonUnit::QAdic { q } => c.q_valuation(q),
                PolygonUnit::Abstract => Err(Error::UnitMismatch("abstract".into(), "valued".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_valuations(&vals, unit)
    }

    /// CSV listing of the vertices.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,x,y_num,y_den\n");
        for (i, (x, y)) in self.vertices().iter().enumerate() {
            writeln!(s, "{i},{x},{},{}", y.numer(), y.denom()).unwrap();
        }
        s
    }

    pub fn slope_strings(&self) -> Vec<String> {
        self.slopes.iter().map(|s| s.to_string()).collect()
    }
}

impl fmt::Display for SlopePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.slope_strings().join(", "))?;
        if self.infinite > 0 {
            write!(f, " + {}×∞", self.infinite)?;
        }
        Ok(())
    }
}

fn cross(o: &(i64, Rational), a: &(i64, Rational), b: &(i64, Rational)) -> Rational {
    let ax = Rational::from_integer(BigInt::from(a.0 - o.0));
    let bx = Rational::from_integer(BigInt::from(b.0 - o.0));
    ax * (&b.1 - &o.1) - (&a.1 - &o.1) * bx
}

/// Lower hull of points sorted by strictly increasing x.
fn lower_hull_slopes(pts: &[(i64, Rational)]) -> Vec<Rational> {
    let mut hull: Vec<(i64, Rational)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= Rational::zero() {
            hull.pop();
        }
        hull.push(p.clone());
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let dx = w[1].0 - w[0].0;
        let s = (&w[1].1 - &w[0].1) / Rational::from_integer(BigInt::from(dx));
        for _ in 0..dx {
            slopes.push(s.clone());
        }
    }
    slopes
}

/// SVG drawing of several polygons on shared axes, with vertex labels.
pub fn render_svg(polys: &[(&str, &SlopePolygon)]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const M: f64 = 40.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let to_f = |r: &Rational| r.to_f64().unwrap_or(0.0);
    let max_x = polys.iter().map(|(_, p)| p.len()).max().unwrap_or(0).max(1) as f64;
    let max_y = polys
        .iter()
        .map(|(_, p)| to_f(&p.terminal_point().1))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let sx = |x: f64| M + x / max_x * (W - 2.0 * M);
    let sy = |y: f64| H - M - y / max_y * (H - 2.0 * M);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="monospace" font-size="10">"#).unwrap();
    writeln!(s, r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - M, W - M, H - M).unwrap();
    writeln!(s, r#"<line x1="{M}" y1="{}" x2="{M}" y2="{M}" stroke="black"/>"#, H - M).unwrap();
    for (k, (name, poly)) in polys.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let verts = poly.vertices();
        let pts: Vec<String> = verts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x as f64), sy(to_f(y))))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" ")).unwrap();
        for (x, y) in &verts {
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">({x},{y})</text>"#,
                sx(*x as f64) + 3.0,
                sy(to_f(y)) - 3.0 - 10.0 * k as f64
            )
            .unwrap();
        }
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="{color}">{name}</text>"#, W - M - 60.0, M + 12.0 * k as f64).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};

    const A: PolygonUnit = PolygonUnit::Abstract;

    fn poly(s: &[(i64, i64)]) -> SlopePolygon {
        SlopePolygon::from_slopes(s.iter().map(|&(a, b)| rat(a, b)).collect(), A)
    }

    #[test]
    fn construction_examples() {
        let p = poly(&[(1, 1), (0, 1), (1, 2)]);
        assert_eq!(
            p.vertices(),
            vec![(0, rat_int(0)), (1, rat_int(0)), (2, rat(1, 2)), (3, rat(3, 2))]
        );
        assert_eq!(poly(&[]).vertices(), vec![(0, rat_int(0))]);
        assert_eq!(poly(&[(1, 4), (1, 2), (3, 4)]).terminal_point(), (3, rat(3, 2)));
    }

    #[test]
    fn concat_and_truncate_examples() {
        assert_eq!(poly(&[(0, 1)]).concat(&poly(&[(1, 1)])).unwrap(), poly(&[(0, 1), (1, 1)]));
        let h = poly(&[(1, 2)]).concat(&poly(&[(1, 2)])).unwrap();
        assert_eq!(h.terminal_point(), (2, rat_int(1)));
        let s = poly(&[(0, 1), (1, 2), (1, 1)]);
        assert_eq!(s.truncate_below(&rat_int(1)), poly(&[(0, 1), (1, 2)]));
        assert!(s.truncate_below(&rat_int(0)).is_empty());
        assert_eq!(s.truncate_below(&rat_int(2)), s);
        let q = SlopePolygon::empty(PolygonUnit::QAdic { q: 3 });
        assert!(matches!(s.concat(&q), Err(Error::UnitMismatch(..))));
    }

    #[test]
    fn comparison_examples() {
        let a = poly(&[(1, 5), (2, 5), (3, 5), (4, 5)]);
        let b = poly(&[(1, 2), (1, 2), (1, 2), (1, 2)]);
        assert!(a.lies_on_or_above(&a).unwrap());
        assert!(b.lies_on_or_above(&a).unwrap());
        assert!(!a.lies_on_or_above(&b).unwrap());
        assert!(a.shares_terminal_point(&b).unwrap());
        assert_eq!(poly(&[(2, 1), (4, 1)]).scale(&rat(1, 2), A).unwrap(), poly(&[(1, 1), (2, 1)]));
    }

    #[test]
    fn np_of_polynomial_examples() {
        let p = 5;
        let u = PolygonUnit::PiAdic { p, n: 1 };
        let c = |k: i64| CyclotomicInteger::from_int(p, 1, k);
        let np = SlopePolygon::np_of_polynomial(&[c(1), c(1), c(p as i64)], u).unwrap();
        assert_eq!(np.slopes(), &[rat_int(0), rat_int(4)]);
        let np = SlopePolygon::np_of_polynomial(&[c(1), c(0), c(25)], PolygonUnit::QAdic { q: 5 }).unwrap();
        assert_eq!(np.slopes(), &[rat_int(1), rat_int(1)]);
        let one = CyclotomicInteger::one(3, 1);
        let lin = CyclotomicInteger::from_i64_coeffs(3, 1, &[1, 2]);
        let np = SlopePolygon::np_of_polynomial(&[one, lin], PolygonUnit::QAdic { q: 3 }).unwrap();
        assert_eq!(np.slopes(), &[rat(1, 2)]);
        assert!(SlopePolygon::np_of_polynomial(&[c(2)], u).is_err());
    }

    #[test]
    fn np_of_product_of_linear_factors() {
        // (1 - α s)(1 - β s)(1 - γ s) over Z[ζ_3] with α = 1, β = π, γ = 3
        let (p, n) = (3, 1);
        let one = CyclotomicInteger::one(p, n);
        let roots = [one.clone(), CyclotomicInteger::pi(p, n), CyclotomicInteger::from_int(p, n, 3)];
        let mut coeffs = vec![one];
        for a in &roots {
            let mut next = coeffs.clone();
            next.push(CyclotomicInteger::zero(p, n));
            for i in 0..coeffs.len() {
                next[i + 1] = &next[i + 1] - &(a * &coeffs[i]);
            }
            coeffs = next;
        }
        let np = SlopePolygon::np_of_polynomial(&coeffs, PolygonUnit::PiAdic { p, n }).unwrap();
        assert_eq!(np.slopes(), &[rat_int(0), rat_int(1), rat_int(2)]);
    }

    #[test]
    fn csv_and_svg() {
        let p = poly(&[(1, 4), (1, 2)]);
        assert_eq!(p.to_csv(), "index,x,y_num,y_den\n0,0,0,1\n1,1,1,4\n2,2,3,4\n");
        let svg = render_svg(&[("NP", &p), ("HP", &p)]);
        assert!(svg.starts_with("<svg") && svg.contains("(2,3/4)"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn slopes() -> impl Strategy<Value = Vec<(i64, i64)>> {
            prop::collection::vec((0i64..12, 1i64..5), 0..7)
        }

        proptest! {
            #[test]
            fn concat_commutes_with_truncation(a in slopes(), b in slopes(), r in (0i64..12, 1i64..5)) {
                let r = rat(r.0, r.1);
                let (a, b) = (poly(&a), poly(&b));
                let lhs = a.concat(&b).unwrap().truncate_below(&r);
                let rhs = a.truncate_below(&r).concat(&b.truncate_below(&r)).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn order_on_common_endpoint(a in slopes(), b in slopes(), c in slopes()) {
                // rescale the three to share length and terminal height
                let fit = |v: Vec<(i64, i64)>| -> SlopePolygon {
                    let mut v = v;
                    v.resize(4, (1, 1));
                    let p = poly(&v);
                    let t = p.terminal_point().1;
                    let shift = (rat_int(8) - t) / rat_int(4);
                    SlopePolygon::from_slopes(p.slopes().iter().map(|s| s + &shift).collect(), A)
                };
                let (a, b, c) = (fit(a), fit(b), fit(c));
                prop_assert!(a.lies_on_or_above(&a).unwrap());
                if a.lies_on_or_above(&b).unwrap() && b.lies_on_or_above(&a).unwrap() {
                    prop_assert_eq!(&a, &b);
                }
                if a.lies_on_or_above(&b).unwrap() && b.lies_on_or_above(&c).unwrap() {
                    prop_assert!(a.lies_on_or_above(&c).unwrap());
                }
            }
        }
    }
}
