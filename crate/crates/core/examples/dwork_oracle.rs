//! Local Newton polygons from Dwork's operator, next to the character-sum answer.
use newton_hodge::character::AswCharacter;
use newton_hodge::dwork::{block_periodicity_check, hodge_bound_check, local_np_oracle, OracleParams};
use newton_hodge::exactnum::rat_int;
use newton_hodge::lfunction::l_polynomial;

fn main() -> newton_hodge::Result<()> {
    for (p, expr, d) in [(5, "x^4", 4), (3, "x^5", 5), (7, "x^2 + x", 2)] {
        let f = AswCharacter::parse(p, p as u64, expr)?;
        let params = OracleParams::defaults(p, d);
        let rep = local_np_oracle(&f, &rat_int(1), params)?;
        let direct = l_polynomial(&f)?.newton_polygon()?;
        println!("p={p} f={expr}: oracle {} (stable: {}), character sums {}", rep.np(), rep.stabilized, direct);
        println!("  C(s) below v(p): {}", rep.run.c_polygon);
        let hb = hodge_bound_check(&f, &rat_int(1), params)?;
        println!("  Hodge bound: {} ({})", hb.passed, hb.detail);
    }
    let f = AswCharacter::parse(5, 5, "x^4")?;
    let rep = block_periodicity_check(&f, 2, OracleParams::defaults(5, 4))?;
    println!("block periodicity for x^4 over F_5: {} ({})", rep.passed, rep.detail);
    Ok(())
}
