//! Lists the lattice-theoretic obstructions to ampleness of h − ξ on a
//! Hilbert square of a K3 surface of degree h².

use k3lat::classify::gram_to_inline;
use k3lat::hilb2::{minus10_obstruction_grams_bounded, obstruction_report};

fn main() -> k3lat::Result<()> {
    for h_sq in [4, 6, 8, 10] {
        let r = obstruction_report(h_sq)?;
        println!("h² = {h_sq}");
        for g in &r.minus10_grams {
            println!("  -10: {}", gram_to_inline(g));
        }
        for w in r.walls.all() {
            println!("  -2: t = {}, k = {}, l = {}, {}", w.t, w.k, w.l, gram_to_inline(&w.gram));
        }
        println!("  excluded on a surface without lines: {}", r.line_class_needed);
    }
    let truncated = minus10_obstruction_grams_bounded(2, 10)?;
    println!("h² = 2 is unbounded; |l| ≤ 10 gives {} Gram matrices", truncated.len());
    Ok(())
}
