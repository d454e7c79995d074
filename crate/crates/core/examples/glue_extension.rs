//! Glues ⟨2⟩³ to D4(−1) along every anti-embedding of discriminant forms and
//! checks which coordinate permutations extend, in both modes.

use k3lat::enumerate::{automorphism_group, Isometry};
use k3lat::exact::IntMatrix;
use k3lat::fqm::{anti_embeddings, AutGroup, DEFAULT_GROUP_BOUND};
use k3lat::glue::{check_extendable, overlattice, GlueMap};
use k3lat::lattice::Lattice;

fn main() -> k3lat::Result<()> {
    let n = Lattice::from_i64(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]])?;
    let m = Lattice::from_i64(&[vec![-2, 1, 0, 0], vec![1, -2, 1, 1], vec![0, 1, -2, 0], vec![0, 1, 0, -2]])?;
    let dm = m.discriminant()?;
    let obar: Vec<_> = automorphism_group(&m)?.generators().iter().map(|g| dm.induced_map(g)).collect::<k3lat::Result<_>>()?;
    let obar = AutGroup::generated(dm.form(), &obar, DEFAULT_GROUP_BOUND)?;
    let swap = Isometry::new(&n, IntMatrix::from_i64(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]))?;
    for gamma in anti_embeddings(dm.form(), n.discriminant()?.form())? {
        let glue = GlueMap::with_lattice(&n, &m, gamma)?;
        let over = overlattice(&glue)?;
        let permissive = check_extendable(&glue, &swap, None)?;
        let exact = check_extendable(&glue, &swap, Some(&obar))?;
        println!(
            "image order {}, overlattice det {}, signature {:?}: permissive {}, exact {}",
            glue.image().order(),
            over.lattice().det(),
            over.lattice().signature(),
            permissive.extendable,
            exact.extendable
        );
    }
    Ok(())
}
