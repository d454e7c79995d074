//! Enumeration on definite lattices: short vectors, automorphism groups,
//! isometry testing and wall-divisor scans.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{dot, gram_schmidt, int, lll_gram, rat_floor, IntMatrix};
use crate::fqm::Subgroup;
use crate::lattice::{Lattice, Vector};

/// Largest group stored element by element.
pub const ELEMENT_STORE_BOUND: usize = 1_000_000;

/// An isometry of a lattice, acting on column coordinate vectors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Isometry {
    matrix: IntMatrix,
}

impl Isometry {
    /// Checks `Qᵀ·G·Q = G`.
    pub fn new(l: &Lattice, matrix: IntMatrix) -> Result<Self> {
        let iso = Isometry { matrix };
        iso.check_preserves(l)?;
        Ok(iso)
    }

    pub fn identity(n: usize) -> Self {
        Isometry { matrix: IntMatrix::identity(n) }
    }

    pub fn negation(n: usize) -> Self {
        Isometry { matrix: IntMatrix::identity(n).neg() }
    }

    pub fn check_preserves(&self, l: &Lattice) -> Result<()> {
        let q = &self.matrix;
        if q.rows() != l.rank() || q.cols() != l.rank() {
            return Err(Error::Dimension(format!("{}x{} matrix on a rank {} lattice", q.rows(), q.cols(), l.rank())));
        }
        if &q.congruence(l.gram())? != l.gram() {
            return Err(Error::NotIsometry);
        }
        Ok(())
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[BigInt]) -> Vector {
        self.matrix.mul_vec(v).expect("dimension")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { matrix: self.matrix.mul(&other.matrix).expect("dimension") }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { matrix: self.matrix.inverse_unimodular().expect("isometries are unimodular") }
    }

    pub fn pow(&self, k: u64) -> Isometry {
        let mut acc = Isometry::identity(self.dim());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn trace(&self) -> BigInt {
        self.matrix.trace()
    }

    pub fn det(&self) -> BigInt {
        self.matrix.det().expect("square")
    }

    /// Multiplicative order, or `None` if it exceeds `bound`.
    pub fn order(&self, bound: u64) -> Option<u64> {
        let mut p = self.clone();
        for k in 1..=bound {
            if p.is_identity() {
                return Some(k);
            }
            p = p.compose(self);
        }
        None
    }
}

impl fmt::Debug for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry{}", self.matrix)
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

/// Gram matrix made positive definite by a global sign, with that sign.
fn positive_gram(l: &Lattice) -> Result<(IntMatrix, i64)> {
    if l.is_positive_definite() {
        Ok((l.gram().clone(), 1))
    } else if l.is_negative_definite() {
        Ok((l.gram().neg(), -1))
    } else {
        Err(Error::NotDefinite)
    }
}

/// Visits every nonzero `x` with `xᵀ·g·x ≤ bound` (`g` positive definite),
/// passing the vector and its norm.
fn fincke_pohst(g: &IntMatrix, bound: &BigInt, visit: &mut dyn FnMut(Vector, BigInt)) -> Result<()> {
    let n = g.rows();
    if n == 0 || bound.is_negative() {
        return Ok(());
    }
    let t = lll_gram(g)?;
    let gr = t.congruence(g)?;
    let gs = gram_schmidt(&gr);
    if gs.b.iter().any(|x| !x.is_positive()) {
        return Err(Error::NotDefinite);
    }
    let mut y = vec![BigInt::zero(); n];
    let total = BigRational::from_integer(bound.clone());
    fn level(
        j: usize,
        rest: BigRational,
        y: &mut Vec<BigInt>,
        gs: &crate::exact::GramSchmidt,
        t: &IntMatrix,
        gr: &IntMatrix,
        visit: &mut dyn FnMut(Vector, BigInt),
    ) {
        let n = y.len();
        let mut c = BigRational::zero();
        for i in j + 1..n {
            if !y[i].is_zero() {
                c -= &gs.mu[i][j] * BigRational::from_integer(y[i].clone());
            }
        }
        let bj = &gs.b[j];
        let fits = |v: &BigInt| -> Option<BigRational> {
            let d = BigRational::from_integer(v.clone()) - &c;
            let used = &d * &d * bj;
            (used <= rest).then(|| &rest - used)
        };
        let start = rat_floor(&c);
        let mut cands: Vec<(BigInt, BigRational)> = Vec::new();
        let mut v = start.clone();
        while let Some(r) = fits(&v) {
            cands.push((v.clone(), r));
            v -= 1;
        }
        let mut v = start + 1;
        while let Some(r) = fits(&v) {
            cands.push((v.clone(), r));
            v += 1;
        }
        for (v, r) in cands {
            y[j] = v;
            if j == 0 {
                if y.iter().any(|x| !x.is_zero()) {
                    let x = t.mul_vec(y).expect("dimension");
                    let yn = dot(y, &gr.mul_vec(y).expect("dimension"));
                    visit(x, yn);
                }
            } else {
                level(j - 1, r, y, gs, t, gr, visit);
            }
        }
        y[j] = BigInt::zero();
    }
    level(n - 1, total, &mut y, &gs, &t, &gr, visit);
    Ok(())
}

/// All nonzero vectors of norm at most `bound` in absolute value, with their
/// norms, sorted lexicographically.
pub fn short_vectors(l: &Lattice, bound: &BigInt) -> Result<Vec<(Vector, BigInt)>> {
    let (g, sign) = positive_gram(l)?;
    let mut out = Vec::new();
    fincke_pohst(&g, bound, &mut |x, nrm| out.push((x, nrm * sign)))?;
    out.sort();
    Ok(out)
}

/// All vectors `v` with `v² = n`, sorted lexicographically.
pub fn vectors_of_norm(l: &Lattice, n: &BigInt) -> Result<Vec<Vector>> {
    let (g, sign) = positive_gram(l)?;
    let target = n * sign;
    if !target.is_positive() {
        return Ok(vec![]);
    }
    Ok(vectors_of_norm_pd(&g, &target))
}

fn vectors_of_norm_pd(g: &IntMatrix, n: &BigInt) -> Vec<Vector> {
    let mut out = Vec::new();
    fincke_pohst(g, n, &mut |x, nrm| {
        if &nrm == n {
            out.push(x)
        }
    })
    .expect("positive definite");
    out.sort();
    out
}

/// Backtracking search for isometric images of a basis.
///
/// Position `k` of the source basis (Gram `source`) is mapped to one of
/// `cands[k]`, stored together with `target·x`, subject to all pairings with
/// earlier images.
struct BasisSearch<'a> {
    source: &'a IntMatrix,
    cands: Vec<Vec<(Vector, Vector)>>,
}

impl BasisSearch<'_> {
    fn compatible(&self, k: usize, gx: &Vector, chosen: &[(Vector, Vector)]) -> bool {
        chosen.iter().enumerate().all(|(j, (y, _))| dot(gx, y) == self.source[(k, j)])
    }

    /// Runs the search below a fixed prefix; `leaf` returns `true` to stop.
    fn run(&self, chosen: &mut Vec<(Vector, Vector)>, leaf: &mut dyn FnMut(&[(Vector, Vector)]) -> bool) -> bool {
        let k = chosen.len();
        if k == self.cands.len() {
            return leaf(chosen);
        }
        for (x, gx) in &self.cands[k] {
            if self.compatible(k, gx, chosen) {
                chosen.push((x.clone(), gx.clone()));
                let stop = self.run(chosen, leaf);
                chosen.pop();
                if stop {
                    return true;
                }
            }
        }
        false
    }
}

fn cols_matrix(vs: &[(Vector, Vector)]) -> IntMatrix {
    let cols: Vec<Vector> = vs.iter().map(|(x, _)| x.clone()).collect();
    IntMatrix::from_cols(&cols).expect("nonempty")
}

/// Reduced, candidate-sorted basis of a positive definite Gram matrix:
/// returns the transform `t` (columns are the new basis) and `tᵀ·g·t`.
fn search_basis(g: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    let t = lll_gram(g)?;
    let gr = t.congruence(g)?;
    let n = g.rows();
    let counts: Vec<usize> = (0..n).map(|i| vectors_of_norm_pd(&gr, &gr[(i, i)]).len()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (counts[i], i));
    let mut p = IntMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        p[(old, new)] = BigInt::one();
    }
    let t2 = t.mul(&p)?;
    let g2 = t2.congruence(g)?;
    Ok((t2, g2))
}

fn candidates_for(source: &IntMatrix, target: &IntMatrix) -> Vec<Vec<(Vector, Vector)>> {
    let n = source.rows();
    let mut cache: std::collections::HashMap<BigInt, Vec<(Vector, Vector)>> = Default::default();
    (0..n)
        .map(|i| {
            cache
                .entry(source[(i, i)].clone())
                .or_insert_with(|| {
                    vectors_of_norm_pd(target, &source[(i, i)])
                        .into_iter()
                        .map(|x| {
                            let gx = target.mul_vec(&x).expect("dimension");
                            (x, gx)
                        })
                        .collect()
                })
                .clone()
        })
        .collect()
}

/// Generators and order of `O(L)` for a definite lattice.
#[derive(Clone, Debug)]
pub struct AutomorphismGroup {
    lattice: Lattice,
    generators: Vec<Isometry>,
    order: u128,
}

impl AutomorphismGroup {
    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Every group element, sorted; fails above `bound` elements.
    pub fn elements(&self, bound: usize) -> Result<Vec<Isometry>> {
        if self.order > bound as u128 {
            return Err(Error::TooLarge { what: "automorphism group", size: self.order, bound: bound as u128 });
        }
        let mut v = closure(&self.generators, self.lattice.rank(), bound)?;
        v.sort();
        Ok(v)
    }
}

/// All products of the given isometries.
pub fn closure(gens: &[Isometry], n: usize, bound: usize) -> Result<Vec<Isometry>> {
    let id = Isometry::identity(n);
    let mut seen: HashSet<Isometry> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.compose(&x);
            if !seen.contains(&y) {
                if seen.len() >= bound {
                    return Err(Error::TooLarge { what: "group closure", size: seen.len() as u128 + 1, bound: bound as u128 });
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn orbit(start: &Vector, gens: &[IntMatrix]) -> HashSet<Vector> {
    let mut seen: HashSet<Vector> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.mul_vec(&x).expect("dimension");
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// `O(L)` of a definite lattice by a stabilizer-chain backtracking search.
///
/// The basis is LLL-reduced; images of basis vectors are drawn from vectors of
/// matching norm and pruned by partial Gram matrices. The order is the product
/// of the basic orbit lengths.
pub fn automorphism_group(l: &Lattice) -> Result<AutomorphismGroup> {
    let (g, _) = positive_gram(l)?;
    let n = l.rank();
    if n == 0 {
        return Ok(AutomorphismGroup { lattice: l.clone(), generators: vec![], order: 1 });
    }
    let (t, gr) = search_basis(&g)?;
    let search = BasisSearch { source: &gr, cands: candidates_for(&gr, &gr) };
    let unit = |i: usize| -> Vector {
        let mut e = vec![BigInt::zero(); n];
        e[i] = BigInt::one();
        e
    };

    let mut gens: Vec<IntMatrix> = Vec::new();
    let mut order: u128 = 1;
    for i in (0..n).rev() {
        let prefix: Vec<(Vector, Vector)> = (0..i)
            .map(|j| {
                let e = unit(j);
                let ge = gr.mul_vec(&e).expect("dimension");
                (e, ge)
            })
            .collect();
        let ei = unit(i);
        let mut orb = orbit(&ei, &gens);
        let mut dead: HashSet<Vector> = HashSet::new();
        for (x, gx) in &search.cands[i] {
            if orb.contains(x) || dead.contains(x) || !search.compatible(i, gx, &prefix) {
                continue;
            }
            let mut chosen = prefix.clone();
            chosen.push((x.clone(), gx.clone()));
            let mut found: Option<IntMatrix> = None;
            search.run(&mut chosen, &mut |imgs| {
                found = Some(cols_matrix(imgs));
                true
            });
            match found {
                Some(m) => {
                    gens.push(m);
                    orb = orbit(&ei, &gens);
                }
                None => dead.extend(orbit(x, &gens)),
            }
        }
        order = order
            .checked_mul(orb.len() as u128)
            .ok_or(Error::TooLarge { what: "group order", size: u128::MAX, bound: u128::MAX })?;
    }
    let tinv = t.inverse_unimodular()?;
    let mut generators: Vec<Isometry> = gens
        .iter()
        .map(|q| Isometry { matrix: t.mul(q).and_then(|m| m.mul(&tinv)).expect("dimension") })
        .collect();
    generators.sort();
    generators.dedup();
    for q in &generators {
        q.check_preserves(l).map_err(|_| Error::Internal("automorphism search produced a non-isometry".into()))?;
    }
    Ok(AutomorphismGroup { lattice: l.clone(), generators, order })
}

/// Every element of `O(L)` by exhaustive backtracking (no group structure).
pub fn all_isometries(l: &Lattice, bound: usize) -> Result<Vec<Isometry>> {
    let (g, _) = positive_gram(l)?;
    let n = l.rank();
    if n == 0 {
        return Ok(vec![Isometry::identity(0)]);
    }
    let (t, gr) = search_basis(&g)?;
    let tinv = t.inverse_unimodular()?;
    let search = BasisSearch { source: &gr, cands: candidates_for(&gr, &gr) };
    let mut out = Vec::new();
    let mut overflow = false;
    search.run(&mut Vec::new(), &mut |imgs| {
        if out.len() >= bound {
            overflow = true;
            return true;
        }
        let q = t.mul(&cols_matrix(imgs)).and_then(|m| m.mul(&tinv)).expect("dimension");
        out.push(Isometry { matrix: q });
        false
    });
    if overflow {
        return Err(Error::TooLarge { what: "isometry list", size: bound as u128 + 1, bound: bound as u128 });
    }
    out.sort();
    Ok(out)
}

/// Counts of vectors per norm up to `bound`, a cheap isometry invariant.
fn norm_fingerprint(g: &IntMatrix, bound: &BigInt) -> Result<Vec<(BigInt, usize)>> {
    let mut counts: std::collections::BTreeMap<BigInt, usize> = Default::default();
    fincke_pohst(g, bound, &mut |_, nrm| *counts.entry(nrm).or_default() += 1)?;
    Ok(counts.into_iter().collect())
}

/// Decides whether two definite lattices are isometric; on success returns
/// `Q` with `Qᵀ·G₂·Q = G₁`.
pub fn is_isometric(l1: &Lattice, l2: &Lattice) -> Result<Option<IntMatrix>> {
    if l1.rank() != l2.rank() {
        return Err(Error::Dimension(format!("ranks {} and {}", l1.rank(), l2.rank())));
    }
    let (g1, s1) = positive_gram(l1)?;
    let (g2, s2) = positive_gram(l2)?;
    if s1 != s2 || l1.det() != l2.det() {
        return Ok(None);
    }
    let n = l1.rank();
    if n == 0 {
        return Ok(Some(IntMatrix::identity(0)));
    }
    let (t1, gr1) = search_basis(&g1)?;
    let top = (0..n).map(|i| gr1[(i, i)].clone()).max().expect("nonempty");
    if norm_fingerprint(&g1, &top)? != norm_fingerprint(&g2, &top)? {
        return Ok(None);
    }
    let search = BasisSearch { source: &gr1, cands: candidates_for(&gr1, &g2) };
    let mut found = None;
    search.run(&mut Vec::new(), &mut |imgs| {
        found = Some(cols_matrix(imgs));
        true
    });
    let Some(x) = found else { return Ok(None) };
    let q = x.mul(&t1.inverse_unimodular()?)?;
    if &q.congruence(l2.gram())? != l1.gram() {
        return Err(Error::Internal("isometry witness check failed".into()));
    }
    Ok(Some(q))
}

/// Whether a negative definite lattice contains a wall divisor: a vector of
/// square −2, or of square −10 and divisibility 2 (in the glued lattice when a
/// glue image in `D_M` is given).
pub fn wall_divisor_scan(m: &Lattice, glue_image: Option<&Subgroup>) -> Result<bool> {
    if !m.is_negative_definite() {
        return Err(Error::NotDefinite);
    }
    if !vectors_of_norm(m, &int(-2))?.is_empty() {
        return Ok(true);
    }
    let tens = vectors_of_norm(m, &int(-10))?;
    let disc = match glue_image {
        Some(_) => Some(m.discriminant()?),
        None => None,
    };
    for v in &tens {
        let d = match (glue_image, &disc) {
            (Some(img), Some(dm)) => crate::glue::divisibility_in_glued(dm, v, img)?,
            _ => m.divisibility(v)?,
        };
        if d == int(2) {
            return Ok(true);
        }
    }
    Ok(false)
}
