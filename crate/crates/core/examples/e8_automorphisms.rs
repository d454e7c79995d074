//! The Weyl group of E8 as the isometry group of the lattice.

use k3lat::enumerate::{automorphism_group, vectors_of_norm};
use k3lat::lattice::e8;
use num_bigint::BigInt;

fn main() -> k3lat::Result<()> {
    let l = e8();
    let roots = vectors_of_norm(&l, &BigInt::from(2))?;
    let g = automorphism_group(&l)?;
    println!("roots: {}", roots.len());
    println!("|O(E8)| = {}", g.order());
    println!("{} generators", g.generators().len());
    Ok(())
}
