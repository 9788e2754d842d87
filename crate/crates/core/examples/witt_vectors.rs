//! Witt vector addition and the trace to Z/p^nZ.
use newton_hodge::ff::FieldParams;
use newton_hodge::witt::{Integers, WittStructure};
use num_bigint::BigInt;

fn main() -> newton_hodge::Result<()> {
    let w = WittStructure::get(3, 2)?;
    let a = [BigInt::from(1), BigInt::from(0)];
    let sum = w.add(&Integers, &a, &a)?;
    println!("(1, 0) + (1, 0) = {:?} in W_2(Z)", sum);
    let three = w.add(&Integers, &sum, &a)?;
    println!("(1, 0) + (1, 0) + (1, 0) = {:?}", three);

    let f = FieldParams::get(3, 2)?;
    for i in 0..f.size() {
        let x = f.element_at(i);
        let v = [x.clone(), f.zero()];
        let t = w.trace(&f, &v)?;
        println!("Tr({:?}, 0) = {:?} -> {}", x.coeffs(), t, w.to_residue(&t)?);
    }
    Ok(())
}
