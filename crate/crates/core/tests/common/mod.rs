//! Independent oracles and random generators shared by integration tests.
#![allow(dead_code)]

use k3lat::exact::IntMatrix;
use k3lat::lattice::{Lattice, SublatticeBasis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rows(g: &IntMatrix) -> Vec<Vec<i64>> {
    g.to_i64_rows().expect("small entries")
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut total = 0;
    for j in 0..n {
        let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| *x).collect()).collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][j] * det_i128(&minor);
    }
    total
}

/// Positive definiteness by leading principal minors.
pub fn is_pd(g: &[Vec<i64>]) -> bool {
    (1..=g.len()).all(|k| {
        let m: Vec<Vec<i128>> = g[..k].iter().map(|r| r[..k].iter().map(|&x| x as i128).collect()).collect();
        det_i128(&m) > 0
    })
}

fn norm(g: &[Vec<i64>], v: &[i64]) -> i64 {
    let n = v.len();
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            s += v[i] * g[i][j] * v[j];
        }
    }
    s
}

/// All vectors of norm exactly `target`, by enumerating the box
/// `|v_i|² ≤ target · (G⁻¹)_ii`.
pub fn box_vectors(g: &[Vec<i64>], target: i64) -> Vec<Vec<i64>> {
    let n = g.len();
    let gi: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let det = det_i128(&gi);
    let bounds: Vec<i64> = (0..n)
        .map(|i| {
            let minor: Vec<Vec<i128>> = gi
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != i)
                .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != i).map(|(_, x)| *x).collect())
                .collect();
            let adj = det_i128(&minor);
            let cap = target as i128 * adj / det;
            let mut b = 0i64;
            while ((b + 1) as i128) * ((b + 1) as i128) <= cap {
                b += 1;
            }
            b
        })
        .collect();
    let mut out = Vec::new();
    let mut v: Vec<i64> = bounds.iter().map(|b| -b).collect();
    loop {
        if norm(g, &v) == target {
            out.push(v.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if v[i] < bounds[i] {
                v[i] += 1;
                break;
            }
            v[i] = -bounds[i];
            i += 1;
        }
    }
}

/// All isometries of a positive definite lattice as column matrices, by box
/// enumeration of candidate images of each basis vector.
pub fn brute_force_isometries(g: &[Vec<i64>]) -> Vec<Vec<Vec<i64>>> {
    let n = g.len();
    let cands: Vec<Vec<Vec<i64>>> = (0..n).map(|j| box_vectors(g, g[j][j])).collect();
    let mut out = Vec::new();
    let mut cols: Vec<Vec<i64>> = Vec::new();
    fn rec(g: &[Vec<i64>], cands: &[Vec<Vec<i64>>], cols: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
        let j = cols.len();
        if j == g.len() {
            let n = g.len();
            out.push((0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect());
            return;
        }
        for v in &cands[j] {
            let ok = (0..j).all(|i| {
                let mut s = 0;
                for a in 0..g.len() {
                    for b in 0..g.len() {
                        s += cols[i][a] * g[a][b] * v[b];
                    }
                }
                s == g[i][j]
            });
            if ok {
                cols.push(v.clone());
                rec(g, cands, cols, out);
                cols.pop();
            }
        }
    }
    rec(g, &cands, &mut cols, &mut out);
    out
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

pub fn trace(a: &[Vec<i64>]) -> i64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn order(a: &[Vec<i64>], bound: u64) -> Option<u64> {
    let n = a.len();
    let id: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut p = a.to_vec();
    for k in 1..=bound {
        if p == id {
            return Some(k);
        }
        p = mat_mul(&p, a);
    }
    None
}

/// Random symmetric matrix with even diagonal in `[2, diag_max]` and
/// off-diagonal entries in `[-off_max, off_max]`, retried until positive definite.
pub fn random_even_pd(rng: &mut ChaCha8Rng, n: usize, diag_max: i64, off_max: i64) -> Vec<Vec<i64>> {
    loop {
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            g[i][i] = 2 * rng.gen_range(1..=diag_max / 2);
            for j in 0..i {
                let x = rng.gen_range(-off_max..=off_max);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        if is_pd(&g) {
            return g;
        }
    }
}

/// Random positive definite matrix with all entries in `[-max, max]`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, max: i64) -> Vec<Vec<i64>> {
    loop {
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            g[i][i] = rng.gen_range(1..=max);
            for j in 0..i {
                let x = rng.gen_range(-max..=max);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        if is_pd(&g) {
            return g;
        }
    }
}

/// A random primitive sublattice of rank `k`.
pub fn random_primitive(rng: &mut ChaCha8Rng, l: &Lattice, k: usize) -> SublatticeBasis {
    loop {
        let vs: Vec<Vec<BigInt>> = (0..k).map(|_| (0..l.rank()).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect()).collect();
        if let Ok(s) = SublatticeBasis::from_vectors(l, &vs) {
            return s.saturated();
        }
    }
}

/// Whether the rational map given in the basis `b` (rows) by the block
/// matrix `blk` (columns are images) preserves the integer lattice spanned
/// by the standard basis, and its matrix in that basis when it does.
pub fn map_in_ambient(b: &[Vec<i64>], blk: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = b.len();
    let bm: Vec<Vec<BigRational>> = b.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let inv = rat_inverse(&bm)?;
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        // e_i = c · B with c = row i of B⁻¹
        let c = &inv[i];
        let c2: Vec<BigRational> =
            (0..n).map(|r| (0..n).fold(BigRational::zero(), |acc, s| acc + BigRational::from_integer(blk[r][s].into()) * &c[s])).collect();
        let img: Vec<BigRational> = (0..n).map(|col| (0..n).fold(BigRational::zero(), |acc, r| acc + &c2[r] * &bm[r][col])).collect();
        if !img.iter().all(|x| x.is_integer()) {
            return None;
        }
        cols.push(img.iter().map(|x| x.to_integer().to_i64().expect("small")).collect::<Vec<i64>>());
    }
    Some((0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect())
}

pub fn rat_inverse(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x = &*x / &piv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let pr = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(pr) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn block_diag(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let (p, q) = (a.len(), b.len());
    let mut out = vec![vec![0i64; p + q]; p + q];
    for i in 0..p {
        out[i][..p].copy_from_slice(&a[i]);
    }
    for i in 0..q {
        out[p + i][p..].copy_from_slice(&b[i]);
    }
    out
}

pub fn preserves(g: &[Vec<i64>], q: &[Vec<i64>]) -> bool {
    let qt: Vec<Vec<i64>> = (0..q.len()).map(|i| (0..q.len()).map(|j| q[j][i]).collect()).collect();
    mat_mul(&mat_mul(&qt, g), q) == g
}

/// [`brute_force_isometries`] run in an LLL-reduced basis and conjugated back,
/// which keeps the enumeration box small for skewed bases.
pub fn brute_force_isometries_reduced(g: &IntMatrix) -> Vec<Vec<Vec<i64>>> {
    let t = k3lat::exact::lll_gram(g).expect("positive definite");
    let t_inv = t.inverse_unimodular().expect("unimodular");
    let reduced = rows(&t.congruence(g).expect("square"));
    let (t, t_inv) = (rows(&t), rows(&t_inv));
    brute_force_isometries(&reduced).iter().map(|q| mat_mul(&mat_mul(&t, q), &t_inv)).collect()
}

pub fn cartan_a(n: usize) -> Vec<Vec<i64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 2 } else if i.abs_diff(j) == 1 { -1 } else { 0 }).collect()).collect()
}

pub fn cartan_d(n: usize) -> Vec<Vec<i64>> {
    let mut g = cartan_a(n);
    g[n - 1][n - 2] = 0;
    g[n - 2][n - 1] = 0;
    g[n - 1][n - 3] = -1;
    g[n - 3][n - 1] = -1;
    g
}

pub fn cartan_e6() -> Vec<Vec<i64>> {
    let mut g = cartan_a(5);
    for r in g.iter_mut() {
        r.push(0);
    }
    g.push(vec![0; 6]);
    g[5][5] = 2;
    g[2][5] = -1;
    g[5][2] = -1;
    g
}

/// A random orthogonal sum of root lattices of total rank in `2..=max_rank`.
pub fn random_root_sum(rng: &mut ChaCha8Rng, max_rank: usize) -> Vec<Vec<i64>> {
    let target = rng.gen_range(2..=max_rank);
    let mut g: Vec<Vec<i64>> = Vec::new();
    while g.len() < target {
        let room = target - g.len();
        let block = match rng.gen_range(0..3) {
            1 if room >= 4 => cartan_d(rng.gen_range(4..=room)),
            2 if room >= 6 => cartan_e6(),
            _ => cartan_a(rng.gen_range(1..=room)),
        };
        g = block_diag(&g, &block);
    }
    g
}

/// A random unimodular matrix built from a few elementary operations.
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    if n < 2 {
        if rng.gen_bool(0.5) {
            p[0][0] = -1;
        }
        return p;
    }
    for _ in 0..3 * n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a == b {
            for r in p.iter_mut() {
                r[a] = -r[a];
            }
            continue;
        }
        let k = rng.gen_range(-1..=1);
        for r in p.iter_mut() {
            r[a] += k * r[b];
        }
    }
    p
}

/// A random even symmetric nondegenerate matrix of any signature.
pub fn random_even_form(rng: &mut ChaCha8Rng, n: usize, max: i64) -> Vec<Vec<i64>> {
    loop {
        let mut g = vec![vec![0i64; n]; n];
        for i in 0..n {
            g[i][i] = 2 * rng.gen_range(-max / 2..=max / 2);
            for j in 0..i {
                let x = rng.gen_range(-max..=max);
                g[i][j] = x;
                g[j][i] = x;
            }
        }
        let gi: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        if det_i128(&gi) != 0 {
            return g;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
