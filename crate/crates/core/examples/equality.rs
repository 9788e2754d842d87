//! When does NP equal HP?
use newton_hodge::character::AswCharacter;
use newton_hodge::lfunction::check_equality;

fn main() -> newton_hodge::Result<()> {
    let cases = [
        AswCharacter::parse(5, 5, "x^4")?,
        AswCharacter::parse(3, 3, "x^5")?,
        AswCharacter::parse(7, 7, "x^3")?,
        AswCharacter::from_toml("p = 3\nn = 2\nwitt = [\"x\", \"0\"]")?,
    ];
    for f in &cases {
        let rep = check_equality(f)?;
        println!(
            "p={} n={}: NP = {}, HP = {}, predicted {}, observed {}",
            f.p(),
            f.n(),
            rep.np,
            rep.hp,
            rep.predicted,
            rep.observed
        );
    }
    Ok(())
}
