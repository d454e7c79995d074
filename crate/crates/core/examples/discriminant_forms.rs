//! Discriminant forms of a few standard lattices.

use k3lat::lattice::{a2, e8, hyperbolic_plane, k3_square, rank_one};

fn main() -> k3lat::Result<()> {
    let named = [
        ("U", hyperbolic_plane()),
        ("A2", a2()),
        ("E8", e8()),
        ("<-2>", rank_one(-2)?),
        ("K3^[2]", k3_square()),
    ];
    for (name, l) in named {
        let d = l.discriminant()?;
        println!("{name}: rank {}, signature {:?}, det {}, D = {}", l.rank(), l.signature(), l.det(), d.form());
    }
    Ok(())
}
