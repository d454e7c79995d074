//! Gluing along anti-embeddings of discriminant forms.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumerate::{all_isometries, closure, Isometry, ELEMENT_STORE_BOUND};
use crate::error::{Error, Result};
use crate::exact::{gcd_all, hermite_row_basis, solve_rational, IntMatrix, RatMatrix};
use crate::fqm::{AutGroup, Fqm, FqmElement, FqmHom, Subgroup, DEFAULT_ENUMERATION_BOUND};
use crate::lattice::{sum_index, Discriminant, Lattice, SublatticeBasis, Vector};

/// How condition 2 of the extension criterion is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// The witness must lie in the image of `O(M)` in `O(D_M)`.
    Exact,
    /// Any witness in `O(D_M)` is accepted; yields a superset.
    Permissive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Permissive => "permissive",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "permissive" => Ok(Mode::Permissive),
            _ => Err(Error::InvalidArgument(format!("unknown mode '{s}'"))),
        }
    }
}

/// An anti-embedding `γ: D_M → D_N`.
#[derive(Clone, Debug)]
pub struct GlueMap {
    n: Discriminant,
    m_disc: Fqm,
    m: Option<Discriminant>,
    gamma: FqmHom,
    image: Subgroup,
    inverse: HashMap<FqmElement, FqmElement>,
}

impl GlueMap {
    pub fn new(n: &Lattice, m_disc: &Fqm, gamma: FqmHom) -> Result<Self> {
        let dn = n.discriminant()?;
        Self::build(dn, m_disc.clone(), None, gamma)
    }

    /// Glue map with the lattice `M` known; checks `D(M)` against the source.
    pub fn with_lattice(n: &Lattice, m: &Lattice, gamma: FqmHom) -> Result<Self> {
        let dn = n.discriminant()?;
        let dm = m.discriminant()?;
        if gamma.source() != dm.form() {
            return Err(Error::InvalidArgument("glue map source is not the discriminant form of M".into()));
        }
        let form = dm.form().clone();
        Self::build(dn, form, Some(dm), gamma)
    }

    fn build(n: Discriminant, m_disc: Fqm, m: Option<Discriminant>, gamma: FqmHom) -> Result<Self> {
        if gamma.source() != &m_disc || gamma.target() != n.form() {
            return Err(Error::InvalidArgument("glue map must go from D_M to D_N".into()));
        }
        if !gamma.is_form_negating() {
            return Err(Error::OddGlue("glue map does not negate the discriminant form".into()));
        }
        let inverse = gamma.inverse_table()?;
        let image = gamma.image()?;
        Ok(GlueMap { n, m_disc, m, gamma, image, inverse })
    }

    pub fn n_disc(&self) -> &Discriminant {
        &self.n
    }

    pub fn m_disc(&self) -> &Fqm {
        &self.m_disc
    }

    pub fn m(&self) -> Option<&Discriminant> {
        self.m.as_ref()
    }

    pub fn gamma(&self) -> &FqmHom {
        &self.gamma
    }

    pub fn image(&self) -> &Subgroup {
        &self.image
    }

    /// `γ⁻¹(y)` for `y` in the image.
    pub fn preimage(&self, y: &FqmElement) -> Result<FqmElement> {
        self.inverse.get(y).cloned().ok_or(Error::NotInImage)
    }
}

/// The overlattice of `N ⊕ M` generated by the graph of a glue map.
#[derive(Clone, Debug)]
pub struct Overlattice {
    lattice: Lattice,
    /// Basis vectors as rows, in `N ⊕ M` coordinates.
    basis: RatMatrix,
    split: usize,
}

impl Overlattice {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn n_rank(&self) -> usize {
        self.split
    }

    /// Overlattice coordinates of a vector given in `N ⊕ M` coordinates.
    pub fn coordinates(&self, v: &[BigRational]) -> Option<Vector> {
        let k = self.basis.common_denominator();
        let scaled: Vec<BigInt> = v
            .iter()
            .map(|x| {
                let y = x * BigRational::from_integer(k.clone());
                y.is_integer().then(|| y.to_integer())
            })
            .collect::<Option<_>>()?;
        let b = scale_to_int(&self.basis, &k)?;
        let sol = solve_rational(&b.transpose(), &scaled)?;
        sol.iter().all(|x| x.is_integer()).then(|| sol.iter().map(|x| x.to_integer()).collect())
    }

    /// Coordinates of `v ∈ N` inside the overlattice.
    pub fn embed_n(&self, v: &[BigInt]) -> Option<Vector> {
        let mut w: Vec<BigRational> = v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        w.resize(self.basis.cols(), BigRational::zero());
        self.coordinates(&w)
    }

    /// Matrix, in overlattice coordinates, of a map given in `N ⊕ M`
    /// coordinates; `None` if it does not preserve the overlattice.
    pub fn transport(&self, block: &IntMatrix) -> Option<IntMatrix> {
        let n = self.basis.rows();
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let b = self.basis.row(i);
            let img: Vec<BigRational> = (0..n)
                .map(|r| {
                    block.row(r).iter().zip(b).fold(BigRational::zero(), |acc, (a, x)| {
                        acc + BigRational::from_integer(a.clone()) * x
                    })
                })
                .collect();
            cols.push(self.coordinates(&img)?);
        }
        IntMatrix::from_cols(&cols).ok()
    }
}

fn scale_to_int(m: &RatMatrix, k: &BigInt) -> Option<IntMatrix> {
    let rows: Vec<Vec<BigInt>> = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| {
                    let y = x * BigRational::from_integer(k.clone());
                    y.is_integer().then(|| y.to_integer())
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<_>>()?;
    if rows.is_empty() {
        return Some(IntMatrix::zeros(0, m.cols()));
    }
    IntMatrix::from_rows(rows).ok()
}

/// Lattice generated by `N ⊕ M` and the vectors `γ(x)~ + x~` for `x ∈ D_M`.
pub fn overlattice(glue: &GlueMap) -> Result<Overlattice> {
    let dm = glue.m.as_ref().ok_or_else(|| Error::InvalidArgument("overlattice needs the lattice M".into()))?;
    let n_lat = glue.n.lattice();
    let m_lat = dm.lattice();
    let (a, b) = (n_lat.rank(), m_lat.rank());
    let dim = a + b;
    let mut gens: Vec<Vec<BigRational>> = (0..dim)
        .map(|i| {
            let mut e = vec![BigRational::zero(); dim];
            e[i] = BigRational::one();
            e
        })
        .collect();
    for x in glue.m_disc.generators() {
        let mut v = glue.n.lift(&glue.gamma.apply(&x));
        v.extend(dm.lift(&x));
        gens.push(v);
    }
    let k = gens.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let kr = BigRational::from_integer(k.clone());
    let int_rows: Vec<Vec<BigInt>> = gens.iter().map(|v| v.iter().map(|x| (x * &kr).to_integer()).collect()).collect();
    let hnf = hermite_row_basis(&IntMatrix::from_rows(int_rows)?);
    let ambient = n_lat.gram().direct_sum(m_lat.gram());
    let g = hnf.transpose().congruence(&ambient)?;
    let k2 = &k * &k;
    let mut entries = Vec::with_capacity(dim * dim);
    for x in g.entries() {
        let (q, r) = x.div_rem(&k2);
        if !r.is_zero() {
            return Err(Error::OddGlue("glue vectors pair non-integrally".into()));
        }
        entries.push(q);
    }
    let gram = IntMatrix::new(dim, dim, entries)?;
    if (0..dim).any(|i| gram[(i, i)].is_odd()) {
        return Err(Error::OddGlue("glue vector with odd square".into()));
    }
    let basis = RatMatrix::from_rows(
        (0..dim)
            .map(|i| hnf.row(i).iter().map(|x| BigRational::new(x.clone(), k.clone())).collect())
            .collect(),
    )?;
    Ok(Overlattice { lattice: Lattice::new(gram)?, basis, split: a })
}

/// Divisibility of `v ∈ N` in the lattice glued along `image ⊂ D_N`.
pub fn divisibility_in_glued(n: &Discriminant, v: &[BigInt], image: &Subgroup) -> Result<BigInt> {
    let lat = n.lattice();
    if image.ambient() != n.form() {
        return Err(Error::NotSubgroup);
    }
    let mut values = vec![lat.divisibility(v)?];
    let gv: Vec<BigRational> =
        lat.gram().mul_vec(v)?.into_iter().map(BigRational::from_integer).collect();
    for y in image.generators() {
        let w = n.lift(y);
        let p = gv.iter().zip(&w).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
        if !p.is_integer() {
            return Err(Error::Internal("dual lift pairs non-integrally with N".into()));
        }
        values.push(p.to_integer());
    }
    Ok(gcd_all(&values))
}

/// Which condition of the extension criterion failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailedCondition {
    /// `f̄` moves the glue image.
    ImageNotPreserved,
    /// The witness is not induced by an isometry of `M`.
    NotInducedOnM,
}

/// Outcome of [`check_extendable`].
#[derive(Clone, Debug)]
pub struct Extension {
    pub extendable: bool,
    pub witness: Option<FqmHom>,
    pub mode: Mode,
    pub failed: Option<FailedCondition>,
}

/// Whether `f ∈ O(N)` extends to the lattice glued along `γ`: `f̄` must
/// preserve `γ(D_M)` and `γ⁻¹ f̄ γ` must come from `O(M)` (exact mode, with the
/// image of `O(M)` given as `obar`) or merely lie in `O(D_M)` (permissive).
pub fn check_extendable(glue: &GlueMap, f: &Isometry, obar: Option<&AutGroup>) -> Result<Extension> {
    let mode = if obar.is_some() { Mode::Exact } else { Mode::Permissive };
    let fbar = glue.n.induced_map(f)?;
    let mut images = Vec::with_capacity(glue.m_disc.num_generators());
    for y in glue.gamma.images() {
        let fy = fbar.apply(y);
        match glue.inverse.get(&fy) {
            Some(x) => images.push(x.clone()),
            None => {
                return Ok(Extension { extendable: false, witness: None, mode, failed: Some(FailedCondition::ImageNotPreserved) })
            }
        }
    }
    let witness = FqmHom::new(glue.m_disc.clone(), glue.m_disc.clone(), images)?;
    if !witness.is_form_preserving() {
        return Err(Error::Internal("conjugated discriminant map does not preserve the form".into()));
    }
    if let Some(group) = obar {
        if group.generators().iter().any(|g| g.source() != &glue.m_disc) {
            return Err(Error::InvalidFqm("O(M) image generators act on a different module".into()));
        }
        if !group.contains(&witness) {
            return Ok(Extension {
                extendable: false,
                witness: Some(witness),
                mode,
                failed: Some(FailedCondition::NotInducedOnM),
            });
        }
    }
    Ok(Extension { extendable: true, witness: Some(witness), mode, failed: None })
}

/// Result of [`lift_order_search`].
#[derive(Clone, Debug)]
pub struct LiftResult {
    pub isometry: Isometry,
    /// Whether the lift normalizes `G` and no power up to half the order lies in `G`.
    pub improved: bool,
}

/// Among isometries of `M` inducing `witness`, prefers one that normalizes
/// `⟨G⟩` and has no power `g^i`, `1 ≤ i ≤ ⌊order/2⌋`, inside `⟨G⟩`.
pub fn lift_order_search(
    witness: &FqmHom,
    m: &Lattice,
    g_gens: &[Isometry],
    isos_m: Option<&[Isometry]>,
    order: u64,
) -> Result<LiftResult> {
    let dm = m.discriminant()?;
    if witness.source() != dm.form() || witness.target() != dm.form() {
        return Err(Error::InvalidArgument("witness does not act on D(M)".into()));
    }
    let owned;
    let all: &[Isometry] = match isos_m {
        Some(v) => v,
        None => {
            owned = all_isometries(m, ELEMENT_STORE_BOUND)?;
            &owned
        }
    };
    for g in g_gens {
        g.check_preserves(m)?;
    }
    let group: HashSet<Isometry> = closure(g_gens, m.rank(), ELEMENT_STORE_BOUND)?.into_iter().collect();
    let mut preimages = Vec::new();
    for g in all {
        if &dm.induced_map(g)? == witness {
            preimages.push(g.clone());
        }
    }
    if preimages.is_empty() {
        return Err(Error::NoPreimage);
    }
    let normalizes = |g: &Isometry| {
        let ginv = g.inverse();
        g_gens.iter().all(|s| group.contains(&g.compose(s).compose(&ginv)))
    };
    let no_small_power = |g: &Isometry| (1..=order / 2).all(|i| !group.contains(&g.pow(i)));
    let mut good: Vec<&Isometry> = preimages.iter().filter(|g| normalizes(g) && no_small_power(g)).collect();
    good.sort_by_key(|g| (g.order(10_000).unwrap_or(u64::MAX), g.trace(), (*g).clone()));
    if let Some(g) = good.first() {
        return Ok(LiftResult { isometry: (*g).clone(), improved: true });
    }
    preimages.sort_by_key(|g| (!normalizes(g), g.clone()));
    Ok(LiftResult { isometry: preimages[0].clone(), improved: false })
}

/// The glue data of a primitive sublattice `N ⊂ L` and `M = N^⊥`.
#[derive(Clone, Debug)]
pub struct PrimitiveGlue {
    pub n: SublatticeBasis,
    pub m: SublatticeBasis,
    pub n_disc: Discriminant,
    pub m_disc: Discriminant,
    /// The glue group `L/(N ⊕ M)` as pairs of classes in `D_N × D_M`.
    pub graph: Vec<(FqmElement, FqmElement)>,
    /// `γ: D_M → D_N` when the glue group projects onto `D_M`.
    pub gamma: Option<FqmHom>,
}

/// Extracts the glue group of a primitive sublattice and its complement.
pub fn glue_of_primitive(n: &SublatticeBasis) -> Result<PrimitiveGlue> {
    if !n.is_primitive() {
        return Err(Error::InvalidArgument("sublattice is not primitive".into()));
    }
    let l = n.ambient();
    let m = n.orthogonal_complement();
    let index = sum_index(n, &m)?;
    if index > BigInt::from(DEFAULT_ENUMERATION_BOUND) {
        return Err(Error::TooLarge {
            what: "glue group",
            size: index.try_into().unwrap_or(u128::MAX),
            bound: DEFAULT_ENUMERATION_BOUND as u128,
        });
    }
    let n_disc = n.lattice()?.discriminant()?;
    let m_disc = m.lattice()?.discriminant()?;
    let stacked = n.rows().vstack(m.rows())?;
    let st = stacked.transpose();
    let a = n.rank();
    let (dn, dm) = (n_disc.form(), m_disc.form());
    let mut gens = Vec::new();
    for i in 0..l.rank() {
        let mut e = vec![BigInt::zero(); l.rank()];
        e[i] = BigInt::one();
        let c = solve_rational(&st, &e).ok_or_else(|| Error::Internal("N ⊕ M does not span".into()))?;
        gens.push((n_disc.project(&c[..a])?, m_disc.project(&c[a..])?));
    }
    let add = |x: &(FqmElement, FqmElement), y: &(FqmElement, FqmElement)| (dn.add(&x.0, &y.0), dm.add(&x.1, &y.1));
    let zero = (dn.zero(), dm.zero());
    let mut seen: HashSet<(FqmElement, FqmElement)> = HashSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = add(&x, g);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let mut graph: Vec<_> = seen.into_iter().collect();
    graph.sort();
    let by_m: HashMap<&FqmElement, &FqmElement> = graph.iter().map(|(x, y)| (y, x)).collect();
    let gamma = dm
        .generators()
        .iter()
        .map(|g| by_m.get(g).map(|x| (*x).clone()))
        .collect::<Option<Vec<_>>>()
        .map(|images| FqmHom::new(dm.clone(), dn.clone(), images))
        .transpose()?;
    Ok(PrimitiveGlue { n: n.clone(), m, n_disc, m_disc, graph, gamma })
}
