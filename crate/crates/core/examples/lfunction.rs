//! L-polynomial of ψ(x^4) over F_5 and its Newton polygon.
use newton_hodge::character::AswCharacter;
use newton_hodge::lfunction::{character_sum, hodge_polygon, l_polynomial};

fn main() -> newton_hodge::Result<()> {
    let f = AswCharacter::parse(5, 5, "x^4")?;
    for k in 1..=3 {
        println!("S_{k} = {}", character_sum(&f, k)?);
    }
    let l = l_polynomial(&f)?;
    println!("L(s) = {}", l.display());
    println!("NP = {}", l.newton_polygon()?);
    println!("HP = {}", hodge_polygon(&f)?);
    Ok(())
}
