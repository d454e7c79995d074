//! Obstructions to ampleness of `h − ξ` on birational models of the Hilbert
//! square of a polarized K3 surface `(S, h)`.
//!
//! Classes on `S^[2]` are written `a·x + b·ξ` with `x` in the K3 lattice and
//! `ξ² = −2`. Only the pair `(x², h·x)` enters, so every obstruction is
//! recorded as the Gram matrix `[[x², h·x], [h·x, h²]]` of `span(x, h)`.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::IntMatrix;

fn check_degree(h_sq: i64) -> Result<()> {
    if h_sq <= 0 || h_sq % 2 != 0 {
        return Err(Error::InvalidArgument(format!("h² must be positive and even, got {h_sq}")));
    }
    Ok(())
}

fn gram(x_sq: i64, h_x: i64, h_sq: i64) -> IntMatrix {
    IntMatrix::from_i64(&[vec![x_sq, h_x], vec![h_x, h_sq]])
}

/// Largest odd `|2l + 1|` allowed by the Hodge index bound `(h² − 2)s² < 5h²`.
fn minus10_odd_bound(h_sq: i64) -> Option<i64> {
    if h_sq == 2 {
        return None;
    }
    let mut s = 1;
    while (h_sq - 2) * (s + 2) * (s + 2) < 5 * h_sq {
        s += 2;
    }
    Some(s)
}

/// Grams of `span(x, h)` for `−10`-classes `y = 2kx + (2l+1)ξ` of divisibility
/// 2 orthogonal to `h − ξ`, with `h·x ≥ 0`.
///
/// Fails with [`Error::Unbounded`] for `h² = 2`, where the Hodge index bound
/// leaves `l` unconstrained; see [`minus10_obstruction_grams_bounded`].
pub fn minus10_obstruction_grams(h_sq: i64) -> Result<Vec<IntMatrix>> {
    check_degree(h_sq)?;
    let s_max = minus10_odd_bound(h_sq).ok_or_else(|| {
        Error::Unbounded("for h² = 2 the −10 obstruction system has infinitely many solutions".into())
    })?;
    Ok(minus10_scan(h_sq, (s_max + 1) / 2))
}

/// Same enumeration restricted to `|2l + 1| ≤ 2·l_bound + 1`.
pub fn minus10_obstruction_grams_bounded(h_sq: i64, l_bound: i64) -> Result<Vec<IntMatrix>> {
    check_degree(h_sq)?;
    Ok(minus10_scan(h_sq, l_bound))
}

fn minus10_scan(h_sq: i64, l_bound: i64) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for l in -l_bound - 1..=l_bound {
        let s = 2 * l + 1;
        if s.abs() > 2 * l_bound + 1 {
            continue;
        }
        let num = 2 * (l * l + l - 1);
        for k in 1..=s.abs() {
            if s % k != 0 || num % (k * k) != 0 {
                continue;
            }
            let x_sq = num / (k * k);
            let h_x = (s / k).abs();
            if x_sq % 2 != 0 || h_sq * x_sq >= h_x * h_x {
                continue;
            }
            let g = gram(x_sq, h_x, h_sq);
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out.sort();
    out
}

/// A `−2`-class `y = kx + lξ` orthogonal to `h − tξ`, normalized to `k, l > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallSolution {
    pub t: BigRational,
    pub k: i64,
    pub l: i64,
    pub x_sq: i64,
    pub h_dot_x: i64,
    pub gram: IntMatrix,
}

/// Walls crossing the segment from `h` to `h − ξ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallScan {
    /// Solutions with `0 < t < 1`.
    pub interior: Vec<WallSolution>,
    /// Solutions with `t = 1`, a wall through `h − ξ` itself.
    pub endpoint: Vec<WallSolution>,
}

impl WallScan {
    pub fn all(&self) -> impl Iterator<Item = &WallSolution> {
        self.interior.iter().chain(&self.endpoint)
    }
}

/// Scans `x² = 2(l² − 1)/k²`, `h·x = 2tl/k` for `t ∈ (0, 1]` under the Hodge
/// index bound `h²·x² < (h·x)²`.
///
/// Fails with [`Error::Unbounded`] for `h² = 2`.
pub fn minus2_wall_scan(h_sq: i64) -> Result<WallScan> {
    check_degree(h_sq)?;
    if h_sq == 2 {
        return Err(Error::Unbounded("for h² = 2 the −2 wall system has infinitely many solutions".into()));
    }
    // (h² − 2)l² < h² forces l = 1 once h² ≥ 4
    let mut l_max = 1;
    while (h_sq - 2) * (l_max + 1) * (l_max + 1) < h_sq {
        l_max += 1;
    }
    Ok(minus2_scan(h_sq, l_max))
}

/// Same scan restricted to `1 ≤ l ≤ l_bound`.
pub fn minus2_wall_scan_bounded(h_sq: i64, l_bound: i64) -> Result<WallScan> {
    check_degree(h_sq)?;
    Ok(minus2_scan(h_sq, l_bound))
}

fn minus2_scan(h_sq: i64, l_bound: i64) -> WallScan {
    let mut scan = WallScan { interior: Vec::new(), endpoint: Vec::new() };
    for l in 1..=l_bound {
        let num = 2 * (l * l - 1);
        // t = n·k/(2l) ≤ 1 with n = h·x ≥ 1 bounds k by 2l
        for k in 1..=2 * l {
            if num % (k * k) != 0 {
                continue;
            }
            let x_sq = num / (k * k);
            if x_sq % 2 != 0 {
                continue;
            }
            for n in 1..=2 * l / k {
                if h_sq * x_sq >= n * n {
                    continue;
                }
                let t = BigRational::new(BigInt::from(n * k), BigInt::from(2 * l));
                let sol = WallSolution { t: t.clone(), k, l, x_sq, h_dot_x: n, gram: gram(x_sq, n, h_sq) };
                if t == BigRational::from_integer(1.into()) {
                    scan.endpoint.push(sol);
                } else {
                    scan.interior.push(sol);
                }
            }
        }
    }
    scan
}

/// `−2`-classes `kx + lξ` with `k, l ≠ 0` orthogonal to `h` itself, for
/// `|l| ≤ l_bound`. Ampleness of `h` on `S` rules out `l = 0`.
pub fn minus2_orthogonal_to_h(h_sq: i64, l_bound: i64) -> Result<Vec<(i64, i64)>> {
    check_degree(h_sq)?;
    let mut out = Vec::new();
    for l in 1..=l_bound {
        let num = 2 * (l * l - 1);
        for k in 1..=num.max(1) {
            if num % (k * k) == 0 && h_sq * (num / (k * k)) < 0 {
                out.push((k, l));
            }
        }
    }
    Ok(out)
}

/// Whether the lattice with Gram `[[a, b], [b, h²]]` (second basis vector `h`)
/// contains `v` with `v² = norm` and `v·h = degree`.
pub fn contains_class(g: &IntMatrix, norm: i64, degree: i64) -> Result<bool> {
    let e = g.to_i64_rows().ok_or_else(|| Error::TooLarge { what: "Gram entry", size: 0, bound: i64::MAX as u128 })?;
    if e.len() != 2 || e[0].len() != 2 {
        return Err(Error::Dimension("2x2 Gram expected".into()));
    }
    let (a, b, c) = (e[0][0] as i128, e[0][1] as i128, e[1][1] as i128);
    if a * c - b * b >= 0 {
        return Err(Error::InvalidArgument("obstruction Gram must be hyperbolic".into()));
    }
    // v = p·x + q·h with p·b + q·c = degree
    let ext = b.extended_gcd(&c);
    let g0 = ext.gcd;
    let d = degree as i128;
    if d % g0 != 0 {
        return Ok(false);
    }
    let (p0, q0) = (ext.x * (d / g0), ext.y * (d / g0));
    let (dp, dq) = (c / g0, -b / g0);
    // v(n)² = A n² + B n + C along (p0 + n·dp, q0 + n·dq)
    let sq = |p: i128, q: i128| a * p * p + 2 * b * p * q + c * q * q;
    let big_a = sq(dp, dq);
    let big_b = 2 * (a * p0 * dp + b * (p0 * dq + q0 * dp) + c * q0 * dq);
    let big_c = sq(p0, q0) - norm as i128;
    if big_a == 0 {
        return Ok(if big_b == 0 { big_c == 0 } else { big_c % big_b == 0 });
    }
    let disc = big_b * big_b - 4 * big_a * big_c;
    if disc < 0 {
        return Ok(false);
    }
    let r = disc.sqrt();
    if r * r != disc {
        return Ok(false);
    }
    Ok([-big_b + r, -big_b - r].iter().any(|num| num % (2 * big_a) == 0))
}

/// Exclusion available when `S` contains no lines: a `−2`-class of `h`-degree
/// 1 would be a line, and an isotropic class of `h`-degree 1 or 2 would give
/// an elliptic pencil of degree at most 2.
pub fn line_free_excludes(g: &IntMatrix) -> Result<bool> {
    Ok(contains_class(g, -2, 1)? || contains_class(g, 0, 1)? || contains_class(g, 0, 2)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub h_sq: i64,
    pub minus10_grams: Vec<IntMatrix>,
    pub walls: WallScan,
    /// Every obstruction is ruled out as soon as `S` has no lines.
    pub line_class_needed: bool,
}

impl ObstructionReport {
    pub fn grams(&self) -> Vec<IntMatrix> {
        let mut out: Vec<IntMatrix> = self.minus10_grams.clone();
        for w in self.walls.all() {
            if !out.contains(&w.gram) {
                out.push(w.gram.clone());
            }
        }
        out
    }
}

pub fn obstruction_report(h_sq: i64) -> Result<ObstructionReport> {
    let minus10_grams = minus10_obstruction_grams(h_sq)?;
    let walls = minus2_wall_scan(h_sq)?;
    let mut report = ObstructionReport { h_sq, minus10_grams, walls, line_class_needed: true };
    for g in report.grams() {
        if !line_free_excludes(&g)? {
            report.line_class_needed = false;
        }
    }
    Ok(report)
}

/// Whether some birational model makes `h − ξ` ample, given a test deciding
/// which obstruction Grams cannot embed in `Pic(S)`.
pub fn ample_model_verdict(h_sq: i64, no_lines: bool, picard_excludes: &dyn Fn(&IntMatrix) -> bool) -> Result<bool> {
    let report = obstruction_report(h_sq)?;
    for g in report.grams() {
        if picard_excludes(&g) {
            continue;
        }
        if no_lines && line_free_excludes(&g)? {
            continue;
        }
        return Ok(false);
    }
    Ok(true)
}
