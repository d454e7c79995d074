//! Derives the coinvariant discriminant form of each built-in group from its
//! invariant lattices.

use k3lat::dataset::{derive_coinvariant_form, Dataset};

fn main() -> k3lat::Result<()> {
    for g in &Dataset::builtin().groups {
        match derive_coinvariant_form(&g.invariant_lattices()?) {
            Ok(f) => println!("{}: {f}", g.name),
            Err(e) => println!("{}: {e}", g.name),
        }
    }
    Ok(())
}
