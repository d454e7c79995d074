//! Integral lattices given by Gram matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumerate::Isometry;
use crate::error::{Error, Result};
use crate::exact::{
    dot, gcd_all, hermite_row_basis, int, integer_kernel, rank, saturate_rows, signature, smith_normal_form,
    IntMatrix,
};
use crate::fqm::{Fqm, FqmElement, FqmHom, MAX_EXPONENT};

/// Coordinates of a lattice vector in the lattice basis.
pub type Vector = Vec<BigInt>;

/// Converts machine integers into a [`Vector`].
pub fn vector(coords: &[i64]) -> Vector {
    coords.iter().map(|&c| BigInt::from(c)).collect()
}

/// A nondegenerate symmetric integral bilinear form on `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    gram: IntMatrix,
}

impl Lattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::Dimension(format!("Gram matrix is {}x{}", gram.rows(), gram.cols())));
        }
        if let Some((row, col)) = gram.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        if gram.det()?.is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(Lattice { gram })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Lattice::new(IntMatrix::from_i64(rows))
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> BigInt {
        self.gram.det().expect("square by construction")
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    pub fn signature(&self) -> (usize, usize) {
        signature(&self.gram).expect("nondegenerate by construction")
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature().1 == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.signature().0 == 0
    }

    pub fn is_definite(&self) -> bool {
        let (p, n) = self.signature();
        p == 0 || n == 0
    }

    pub fn product(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        dot(v, &self.gram.mul_vec(w).expect("vector length"))
    }

    pub fn norm(&self, v: &[BigInt]) -> BigInt {
        self.product(v, v)
    }

    fn check_vector(&self, v: &[BigInt]) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::Dimension(format!("vector of length {} in a rank {} lattice", v.len(), self.rank())));
        }
        Ok(())
    }

    /// `L(m)`: the same module with the form multiplied by `m`.
    pub fn rescale(&self, m: i64) -> Result<Lattice> {
        if m == 0 {
            return Err(Error::InvalidArgument("rescaling by 0".into()));
        }
        Ok(Lattice { gram: self.gram.scale(&int(m)) })
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        Lattice { gram: self.gram.direct_sum(&other.gram) }
    }

    /// Gram matrix in the basis given by the columns of `t` (`tᵀ·G·t`).
    pub fn change_basis(&self, t: &IntMatrix) -> Result<Lattice> {
        Lattice::new(t.congruence(&self.gram)?)
    }

    /// `D_L = L^∨/L` with its discriminant form.
    pub fn discriminant(&self) -> Result<Discriminant> {
        Discriminant::new(self)
    }

    /// Divisibility of `v`: the positive generator of `v·L`.
    pub fn divisibility(&self, v: &[BigInt]) -> Result<BigInt> {
        self.check_vector(v)?;
        if v.iter().all(Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        Ok(gcd_all(&self.gram.mul_vec(v)?))
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice{}", self.gram)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gram)
    }
}

/// Discriminant group of an even lattice.
pub fn discriminant_group(l: &Lattice) -> Result<Fqm> {
    Ok(l.discriminant()?.form)
}

pub fn divisibility(l: &Lattice, v: &[BigInt]) -> Result<BigInt> {
    l.divisibility(v)
}

/// The discriminant form together with the maps relating it to `L^∨`.
///
/// With `U·G·V = S` the Smith form of the Gram matrix, generator `k` lifts to
/// `V e_i / s_i`, and a dual vector `w` has coefficients `U·(G·w) mod s`.
#[derive(Clone, Debug)]
pub struct Discriminant {
    lattice: Lattice,
    form: Fqm,
    lifts: Vec<Vec<BigRational>>,
    proj: Vec<Vec<BigInt>>,
    moduli: Vec<BigInt>,
}

impl Discriminant {
    pub fn new(l: &Lattice) -> Result<Self> {
        if !l.is_even() {
            return Err(Error::OddLattice);
        }
        let g = &l.gram;
        let n = l.rank();
        let snf = smith_normal_form(g);
        let w = snf.v.congruence(g)?;
        let nontrivial: Vec<usize> = (0..n).filter(|&i| !snf.s[(i, i)].is_one()).collect();
        let mut orders = Vec::with_capacity(nontrivial.len());
        for &i in &nontrivial {
            let d = snf.s[(i, i)].to_u64().filter(|&d| d <= MAX_EXPONENT).ok_or(Error::TooLarge {
                what: "discriminant invariant factor",
                size: snf.s[(i, i)].to_u128().unwrap_or(u128::MAX),
                bound: MAX_EXPONENT as u128,
            })?;
            orders.push(d);
        }
        let e = orders.last().copied().unwrap_or(1);
        let big_e = BigInt::from(e);
        let mut q = Vec::with_capacity(orders.len());
        let mut b = vec![vec![Rational64::zero(); orders.len()]; orders.len()];
        for (a, &i) in nontrivial.iter().enumerate() {
            let si = &snf.s[(i, i)];
            let qa = (&w[(i, i)] / si) * (&big_e / si);
            if !(&w[(i, i)] % si).is_zero() {
                return Err(Error::Internal("dual generator pairs non-integrally".into()));
            }
            let qa = qa.mod_floor(&(2 * &big_e)).to_i64().expect("bounded by 2e");
            q.push(Rational64::new(qa, e as i64));
            for (c, &j) in nontrivial.iter().enumerate() {
                let sj = &snf.s[(j, j)];
                let bac = (&w[(i, j)] / si) * (&big_e / sj);
                let bac = bac.mod_floor(&big_e).to_i64().expect("bounded by e");
                b[a][c] = Rational64::new(bac, e as i64);
            }
        }
        let form = Fqm::new(orders, q, b)?;
        let lifts = nontrivial
            .iter()
            .map(|&i| {
                let s = &snf.s[(i, i)];
                snf.v.col(i).into_iter().map(|x| BigRational::new(x, s.clone())).collect()
            })
            .collect();
        let proj = nontrivial.iter().map(|&i| snf.u.row(i).to_vec()).collect();
        let moduli = nontrivial.iter().map(|&i| snf.s[(i, i)].clone()).collect();
        Ok(Discriminant { lattice: l.clone(), form, lifts, proj, moduli })
    }

    pub fn form(&self) -> &Fqm {
        &self.form
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// A representative in `L^∨ ⊂ L ⊗ Q` of a discriminant class.
    pub fn lift(&self, x: &FqmElement) -> Vec<BigRational> {
        let n = self.lattice.rank();
        let mut out = vec![BigRational::zero(); n];
        for (c, g) in x.coeffs().iter().zip(&self.lifts) {
            if *c == 0 {
                continue;
            }
            let c = BigRational::from_integer(BigInt::from(*c));
            for (o, gi) in out.iter_mut().zip(g) {
                *o += &c * gi;
            }
        }
        out
    }

    /// Class of a dual vector given by its pairings `z = G·w` with the basis.
    pub fn project_pairings(&self, z: &[BigInt]) -> Result<FqmElement> {
        if z.len() != self.lattice.rank() {
            return Err(Error::Dimension("pairing vector length".into()));
        }
        let coeffs = self
            .proj
            .iter()
            .zip(&self.moduli)
            .map(|(row, m)| dot(row, z).mod_floor(m).to_u64().expect("reduced residue"))
            .collect();
        Ok(FqmElement(coeffs))
    }

    /// Class of `w ∈ L^∨`; fails if `w` pairs non-integrally with `L`.
    pub fn project(&self, w: &[BigRational]) -> Result<FqmElement> {
        let g = self.lattice.gram();
        let n = self.lattice.rank();
        if w.len() != n {
            return Err(Error::Dimension("dual vector length".into()));
        }
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = BigRational::zero();
            for (j, wj) in w.iter().enumerate() {
                s += BigRational::from_integer(g[(i, j)].clone()) * wj;
            }
            if !s.is_integer() {
                return Err(Error::InvalidArgument("vector is not in the dual lattice".into()));
            }
            z.push(s.to_integer());
        }
        self.project_pairings(&z)
    }

    /// The automorphism `f̄` of `D_L` induced by an isometry `f`.
    pub fn induced_map(&self, f: &Isometry) -> Result<FqmHom> {
        f.check_preserves(&self.lattice)?;
        let q = f.matrix();
        let images = self
            .lifts
            .iter()
            .map(|g| {
                let fg: Vec<BigRational> = (0..q.rows())
                    .map(|i| {
                        q.row(i).iter().zip(g).fold(BigRational::zero(), |acc, (a, b)| {
                            acc + BigRational::from_integer(a.clone()) * b
                        })
                    })
                    .collect();
                self.project(&fg)
            })
            .collect::<Result<Vec<_>>>()?;
        FqmHom::new(self.form.clone(), self.form.clone(), images)
    }
}

/// Independent vectors of an ambient lattice, stored as rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublatticeBasis {
    ambient: Lattice,
    rows: IntMatrix,
}

impl SublatticeBasis {
    pub fn new(ambient: &Lattice, rows: IntMatrix) -> Result<Self> {
        if rows.cols() != ambient.rank() {
            return Err(Error::Dimension(format!("basis vectors of length {} in rank {}", rows.cols(), ambient.rank())));
        }
        if rank(&rows) != rows.rows() {
            return Err(Error::InvalidArgument("sublattice basis vectors are linearly dependent".into()));
        }
        Ok(SublatticeBasis { ambient: ambient.clone(), rows })
    }

    pub fn from_vectors(ambient: &Lattice, vectors: &[Vector]) -> Result<Self> {
        let rows = if vectors.is_empty() {
            IntMatrix::zeros(0, ambient.rank())
        } else {
            IntMatrix::from_rows(vectors.to_vec())?
        };
        SublatticeBasis::new(ambient, rows)
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn rows(&self) -> &IntMatrix {
        &self.rows
    }

    pub fn vectors(&self) -> Vec<Vector> {
        self.rows.row_vecs()
    }

    pub fn rank(&self) -> usize {
        self.rows.rows()
    }

    /// Induced Gram matrix `R·G·Rᵀ`.
    pub fn gram(&self) -> IntMatrix {
        self.rows.transpose().congruence(self.ambient.gram()).expect("shapes checked")
    }

    /// The sublattice as a lattice in its own right (fails if degenerate).
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.gram())
    }

    /// Whether the ambient lattice modulo the span is torsion-free.
    pub fn is_primitive(&self) -> bool {
        smith_normal_form(&self.rows).invariant_factors().iter().all(One::is_one)
    }

    /// The primitive closure `(span ⊗ Q) ∩ L`.
    pub fn saturated(&self) -> SublatticeBasis {
        SublatticeBasis { ambient: self.ambient.clone(), rows: saturate_rows(&self.rows) }
    }

    /// Primitive basis of `{v ∈ L : v·S = 0}`.
    pub fn orthogonal_complement(&self) -> SublatticeBasis {
        let a = self.ambient.gram().mul(&self.rows.transpose()).expect("shapes checked");
        let k = integer_kernel(&a);
        let k = if k.rows() > 0 { hermite_row_basis(&k) } else { k };
        SublatticeBasis { ambient: self.ambient.clone(), rows: k }
    }

    /// Coordinates of an ambient vector in this basis, if it lies in the span.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vector> {
        let sol = crate::exact::solve_rational(&self.rows.transpose(), v)?;
        sol.iter().all(|x| x.is_integer()).then(|| sol.iter().map(|x| x.to_integer()).collect())
    }
}

pub fn orthogonal_complement(s: &SublatticeBasis) -> SublatticeBasis {
    s.orthogonal_complement()
}

/// Index `[L : A ⊕ B]` of the span of two sublattices of complementary ranks.
pub fn sum_index(a: &SublatticeBasis, b: &SublatticeBasis) -> Result<BigInt> {
    let stacked = a.rows().vstack(b.rows())?;
    if stacked.rows() != stacked.cols() {
        return Err(Error::Dimension("ranks do not add up to the ambient rank".into()));
    }
    let d = stacked.det()?;
    if d.is_zero() {
        return Err(Error::InvalidArgument("sublattices are not complementary".into()));
    }
    Ok(d.abs())
}

/// The invariant sublattice `L^G` and coinvariant sublattice `L_G = (L^G)^⊥`.
pub fn invariant_and_coinvariant(l: &Lattice, gens: &[Isometry]) -> Result<(SublatticeBasis, SublatticeBasis)> {
    let n = l.rank();
    let mut blocks: Option<IntMatrix> = None;
    for g in gens {
        g.check_preserves(l)?;
        let d = g.matrix().sub(&IntMatrix::identity(n))?.transpose();
        blocks = Some(match blocks {
            None => d,
            Some(b) => b.hstack(&d)?,
        });
    }
    let inv_rows = match blocks {
        None => IntMatrix::identity(n),
        Some(b) => {
            let k = integer_kernel(&b);
            if k.rows() > 0 {
                hermite_row_basis(&k)
            } else {
                k
            }
        }
    };
    let inv = SublatticeBasis { ambient: l.clone(), rows: inv_rows };
    let coinv = inv.orthogonal_complement();
    Ok((inv, coinv))
}

/// `ρ_h(v) = −v + (h·v) h`, the isometry fixing `h` and negating `h^⊥`.
pub fn reflection_compose(l: &Lattice, h: &[BigInt], v: &[BigInt]) -> Result<Vector> {
    l.check_vector(h)?;
    l.check_vector(v)?;
    if l.norm(h) != int(2) {
        return Err(Error::InvalidArgument("reflection requires h^2 = 2".into()));
    }
    let hv = l.product(h, v);
    Ok(v.iter().zip(h).map(|(vi, hi)| -vi + &hv * hi).collect())
}

/// Matrix of `ρ_h` acting on column vectors.
pub fn reflection(l: &Lattice, h: &[BigInt]) -> Result<Isometry> {
    let n = l.rank();
    let cols = (0..n)
        .map(|j| {
            let mut e = vec![BigInt::zero(); n];
            e[j] = BigInt::one();
            reflection_compose(l, h, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    Isometry::new(l, IntMatrix::from_cols(&cols)?)
}

/// Named lattices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    /// The hyperbolic plane.
    U,
    /// `E8(m)`, with `E8` positive definite.
    E8(i64),
    /// `A2(m)`, with `A2` positive definite.
    A2(i64),
    /// `⟨k⟩`.
    RankOne(i64),
    /// `E8(−1)^2 ⊕ U^3`.
    K3,
    /// `E8(−1)^2 ⊕ U^3 ⊕ ⟨−2⟩`.
    K3Square,
    Leech,
}

pub fn construct(kind: &LatticeKind) -> Result<Lattice> {
    match kind {
        LatticeKind::U => Ok(hyperbolic_plane()),
        LatticeKind::E8(m) => e8().rescale(*m),
        LatticeKind::A2(m) => a2().rescale(*m),
        LatticeKind::RankOne(k) => rank_one(*k),
        LatticeKind::K3 => Ok(k3()),
        LatticeKind::K3Square => Ok(k3_square()),
        LatticeKind::Leech => Ok(crate::leech::leech()),
    }
}

pub fn hyperbolic_plane() -> Lattice {
    Lattice { gram: IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]]) }
}

pub fn rank_one(k: i64) -> Result<Lattice> {
    if k == 0 {
        return Err(Error::InvalidArgument("<0> is degenerate".into()));
    }
    Ok(Lattice { gram: IntMatrix::from_i64(&[vec![k]]) })
}

pub fn a2() -> Lattice {
    Lattice { gram: IntMatrix::from_i64(&[vec![2, 1], vec![1, 2]]) }
}

/// Cartan matrix of `E8`: a chain of seven nodes with an eighth attached to
/// the fifth.
pub fn e8() -> Lattice {
    let mut g = vec![vec![0i64; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |a: usize, b: usize| {
        g[a][b] = -1;
        g[b][a] = -1;
    };
    for i in 0..6 {
        link(i, i + 1);
    }
    link(4, 7);
    Lattice { gram: IntMatrix::from_i64(&g) }
}

pub fn k3() -> Lattice {
    let e = e8().rescale(-1).expect("nonzero scale");
    let u = hyperbolic_plane();
    e.direct_sum(&e).direct_sum(&u).direct_sum(&u).direct_sum(&u)
}

pub fn k3_square() -> Lattice {
    k3().direct_sum(&rank_one(-2).expect("nonzero"))
}
