//! The Leech lattice, built from the extended binary Golay code.

use num_bigint::BigInt;

use crate::exact::{hermite_row_basis, IntMatrix};
use crate::lattice::Lattice;

/// Generator polynomial `1 + x² + x⁴ + x⁵ + x⁶ + x¹⁰ + x¹¹` of the cyclic
/// `[23, 12, 7]` Golay code.
const GOLAY_GENERATOR: [usize; 7] = [0, 2, 4, 5, 6, 10, 11];

/// Twelve basis words of the extended Golay code (length 24, parity last).
pub fn golay_basis() -> Vec<[u8; 24]> {
    (0..12)
        .map(|shift| {
            let mut w = [0u8; 24];
            for &e in &GOLAY_GENERATOR {
                w[e + shift] = 1;
            }
            w[23] = (w[..23].iter().map(|&b| b as u32).sum::<u32>() % 2) as u8;
            w
        })
        .collect()
}

/// All 4096 codewords of the extended Golay code.
pub fn golay_codewords() -> Vec<[u8; 24]> {
    let basis = golay_basis();
    (0u32..4096)
        .map(|mask| {
            let mut w = [0u8; 24];
            for (i, b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (x, y) in w.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
            w
        })
        .collect()
}

/// Gram matrix of the Leech lattice in a Hermite basis of `√8·Λ ⊂ Z^24`.
pub fn leech() -> Lattice {
    let mut gens: Vec<Vec<i64>> = Vec::new();
    for w in golay_basis() {
        gens.push(w.iter().map(|&b| 2 * b as i64).collect());
    }
    let mut eight = vec![0i64; 24];
    eight[0] = 8;
    gens.push(eight);
    for j in 1..24 {
        let mut v = vec![0i64; 24];
        v[0] = 4;
        v[j] = 4;
        gens.push(v);
    }
    let mut odd = vec![1i64; 24];
    odd[0] = -3;
    gens.push(odd);
    let basis = hermite_row_basis(&IntMatrix::from_i64(&gens));
    let g = basis.transpose().congruence(&IntMatrix::identity(24)).expect("square");
    let eight = BigInt::from(8);
    let entries: Vec<BigInt> = g.entries().iter().map(|x| x / &eight).collect();
    Lattice::new(IntMatrix::new(24, 24, entries).expect("24x24")).expect("nondegenerate")
}
