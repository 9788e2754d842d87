//! Newton polygons as CSV and SVG.
use newton_hodge::exactnum::{rat_int, CyclotomicInteger};
use newton_hodge::polygon::{render_svg, PolygonUnit, SlopePolygon};

fn main() -> newton_hodge::Result<()> {
    let c = |v: i64| CyclotomicInteger::from_int(3, 1, v);
    // 1 + 3s + 9s^2 + 27s^4
    let coeffs = [c(1), c(3), c(9), c(0), c(27)];
    let np = SlopePolygon::np_of_polynomial(&coeffs, PolygonUnit::PiAdic { p: 3, n: 1 })?;
    println!("π-adic NP = {np}");
    let q = np.to_q_adic(3)?;
    println!("3-adic NP = {q}");
    print!("{}", q.to_csv());

    let hp = SlopePolygon::from_slopes([0, 1, 1, 1].map(rat_int).to_vec(), q.unit());
    let svg = render_svg(&[("NP", &q), ("HP", &hp)]);
    let path = std::env::temp_dir().join("newton_hodge_polygons.svg");
    std::fs::write(&path, svg).expect("write svg");
    println!("wrote {}", path.display());
    Ok(())
}
