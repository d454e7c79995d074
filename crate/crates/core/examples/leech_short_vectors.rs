//! Counts short vectors of the Leech lattice.

use k3lat::enumerate::vectors_of_norm;
use k3lat::lattice::{construct, LatticeKind};
use num_bigint::BigInt;

fn main() -> k3lat::Result<()> {
    let leech = construct(&LatticeKind::Leech)?;
    println!("rank {}, det {}", leech.rank(), leech.det());
    for n in [2, 4] {
        println!("norm {n}: {}", vectors_of_norm(&leech, &BigInt::from(n))?.len());
    }
    Ok(())
}
