//! Hodge, column-Hodge and Newton polygons of a matrix over Z_3.
use newton_hodge::exactnum::rat_int;
use newton_hodge::valmat::{hodge_suite, perturbation_suite, root_suite, zp, ValuedMatrix};

fn main() -> newton_hodge::Result<()> {
    let m = ValuedMatrix::from_rows(vec![
        vec![zp(1, 3, 20), zp(3, 3, 20), zp(0, 3, 20)],
        vec![zp(3, 3, 20), zp(9, 3, 20), zp(1, 3, 20)],
        vec![zp(0, 3, 20), zp(27, 3, 20), zp(9, 3, 20)],
    ])?;
    println!("column Hodge = {}", m.column_hodge()?);
    println!("Hodge        = {}", m.hodge_polygon()?);
    println!("Newton       = {}", m.newton_polygon()?);
    println!("touching at 1: {}", m.touching(&rat_int(1))?);

    for rep in [perturbation_suite(50, 7, 5, 3, 20), hodge_suite(200, 7, 3, 20), root_suite(20, 7, 3, 20)] {
        println!("{}: {}/{} passed, {} nonvacuous", rep.name, rep.passed, rep.trials, rep.nonvacuous);
    }
    Ok(())
}
