//! Zeta function of y^p - y = f(x) as a product of L-functions.
use newton_hodge::character::AswCharacter;
use newton_hodge::lfunction::zeta_cover;

fn main() -> newton_hodge::Result<()> {
    for (p, expr) in [(3, "x^2"), (5, "x^3"), (3, "x^2 + x^-1")] {
        let f = AswCharacter::parse(p, p as u64, expr)?;
        let z = zeta_cover(&f)?;
        let prod: Vec<String> = z.product.iter().map(|c| c.to_string()).collect();
        println!("y^{p} - y = {expr}: ∏ L = [{}]", prod.join(", "));
        for (k, from_zeta, direct) in &z.point_counts {
            println!("  #X(F_{p}^{k}) = {from_zeta} (direct count {direct})");
        }
    }
    Ok(())
}
