//! Finite field and cyclotomic arithmetic.
use newton_hodge::exactnum::CyclotomicInteger;
use newton_hodge::ff::FieldParams;

fn main() -> newton_hodge::Result<()> {
    let f = FieldParams::get(3, 2)?;
    let g = f.generator();
    println!("F_9 = F_3[t]/({:?}), generator {:?}", f.modulus(), g.coeffs());
    for k in 0..4 {
        let x = f.pow(&g, k);
        println!("  g^{k} = {:?}  Tr = {}", x.coeffs(), f.absolute_trace(&x));
    }

    let pi = CyclotomicInteger::pi(5, 1);
    let five = CyclotomicInteger::from_int(5, 1, 5);
    println!("v_π(ζ_5 - 1) = {:?}, v_π(5) = {:?}", pi.pi_valuation_u64(), five.pi_valuation_u64());
    println!("(ζ_5 - 1)^4 = {}", pi.pow(4));
    Ok(())
}
