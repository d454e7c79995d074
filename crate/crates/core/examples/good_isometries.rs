//! Good isometries of an invariant lattice, with the polarization and
//! transcendental lattice each one determines.

use k3lat::classify::{char_poly_3, good_isometries, gram_to_inline, polarization_and_transcendental};
use k3lat::lattice::Lattice;

fn main() -> k3lat::Result<()> {
    let n = Lattice::from_i64(&[vec![6, 3, 3], vec![3, 6, 3], vec![3, 3, 6]])?;
    println!("N = {}", gram_to_inline(n.gram()));
    for f in good_isometries(&n)? {
        let p = polarization_and_transcendental(&n, &f)?;
        let (c2, det) = char_poly_3(f.matrix())?;
        println!(
            "order {:?}, c2 {c2}, det {det}, h = {:?}, h² = {}, T = {}",
            f.order(12),
            p.h.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            p.h_sq,
            gram_to_inline(&p.t_gram)
        );
    }
    Ok(())
}
