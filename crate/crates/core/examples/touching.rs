//! Local and global touching at slope r.
use newton_hodge::character::AswCharacter;
use newton_hodge::exactnum::{rat, rat_int};
use newton_hodge::lfunction::check_touching;

fn main() -> newton_hodge::Result<()> {
    for (p, expr, r) in [(5, "x^2 + x^-2", rat_int(1)), (3, "x^5 + x^-2", rat(2, 5))] {
        let f = AswCharacter::parse(p, p as u64, expr)?;
        let rep = check_touching(&f, &r)?;
        println!("p={p}, f={expr}, r={r}");
        println!("  NP = {}\n  HP = {}", rep.np, rep.hp);
        for l in &rep.locals {
            println!("  at {}: NP = {}, HP = {}, touching = {}", l.place, l.np, l.hp, l.touching);
        }
        println!("  global touching = {}, consistent = {}", rep.global, rep.theorem_consistent);
    }
    Ok(())
}
