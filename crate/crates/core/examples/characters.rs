//! Loading characters and reading off Swan conductors and Hodge polygons.
use newton_hodge::character::{global_hodge_polygon, AswCharacter, CharacterSpec};

fn main() -> newton_hodge::Result<()> {
    let f = AswCharacter::parse(3, 3, "x^6 + x^4 + (x-1)^-3")?;
    println!("reduced: {}", f.is_reduced());
    let g = f.reduce();
    let swan = g.swan_conductors()?;
    for e in &swan.entries {
        println!("  {}: breaks {:?}, d = {}, δ = {}", e.label, e.breaks, e.d, e.delta);
    }
    println!("HP = {}", global_hodge_polygon(&swan, 0)?);

    let spec = CharacterSpec::from_toml(include_str!("../specs/witt_order9.toml"))?;
    let h = spec.build()?;
    let swan = h.swan_conductors()?;
    println!("order 9: breaks {:?}, HP = {}", swan.entries[0].breaks, global_hodge_polygon(&swan, 0)?);
    Ok(())
}
