//! Finite quadratic modules (discriminant forms).
//!
//! A module is stored on invariant-factor generators `g_1, ..., g_r` of orders
//! `d_1 | ... | d_r`, together with `q(g_i) ∈ Q/2Z` and the pairing
//! `b(g_i, g_j) ∈ Q/Z`. All values have denominators dividing the exponent
//! `e = d_r`, so they are kept internally as residues of numerators over `e`
//! (`q` modulo `2e`, `b` modulo `e`); the public API hands out reduced
//! rationals in `[0, 2)` and `[0, 1)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{smith_normal_form, IntMatrix};

/// Largest module we are willing to enumerate element by element.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 1_000_000;

/// Largest group of module automorphisms stored element by element.
pub const DEFAULT_GROUP_BOUND: usize = 1_000_000;

/// Largest supported exponent, so that form values add and multiply in 64 bits.
pub const MAX_EXPONENT: u64 = 1 << 30;

/// A value of the quadratic form, reduced into `[0, 2)`.
pub type QValue = Rational64;

/// A value of the bilinear form, reduced into `[0, 1)`.
pub type BValue = Rational64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fqm {
    orders: Vec<u64>,
    exponent: u64,
    q_num: Vec<u64>,
    b_num: Vec<Vec<u64>>,
    size: u64,
}

/// An element given by its coefficients on the generators, each reduced
/// modulo the generator order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqmElement(pub Vec<u64>);

impl FqmElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for FqmElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn reduce_q(num: i128, den: i128) -> QValue {
    let m = 2 * den;
    let r = num.rem_euclid(m);
    let g = r.gcd(&den).max(1);
    Rational64::new_raw((r / g) as i64, (den / g) as i64)
}

fn reduce_b(num: i128, den: i128) -> BValue {
    let r = num.rem_euclid(den);
    let g = r.gcd(&den).max(1);
    Rational64::new_raw((r / g) as i64, (den / g) as i64)
}

/// Reduces an arbitrary rational into `[0, 2)`.
pub fn mod2(x: Rational64) -> QValue {
    reduce_q(*x.numer() as i128, *x.denom() as i128)
}

/// Reduces an arbitrary rational into `[0, 1)`.
pub fn mod1(x: Rational64) -> BValue {
    reduce_b(*x.numer() as i128, *x.denom() as i128)
}

impl Fqm {
    /// Builds a module from generator orders, `q` on generators and the full
    /// symmetric pairing matrix `b` (whose diagonal must agree with `q` mod 1).
    pub fn new(orders: Vec<u64>, q: Vec<QValue>, b: Vec<Vec<BValue>>) -> Result<Self> {
        let r = orders.len();
        if q.len() != r || b.len() != r || b.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidFqm("shape of q/b does not match the number of generators".into()));
        }
        for (i, &d) in orders.iter().enumerate() {
            if d < 2 {
                return Err(Error::InvalidFqm(format!("generator {i} has order {d} (must be > 1)")));
            }
            if i > 0 && d % orders[i - 1] != 0 {
                return Err(Error::InvalidFqm("orders must form a divisibility chain".into()));
            }
        }
        let exponent = orders.last().copied().unwrap_or(1);
        if exponent > MAX_EXPONENT {
            return Err(Error::TooLarge { what: "module exponent", size: exponent as u128, bound: MAX_EXPONENT as u128 });
        }
        let mut size: u64 = 1;
        for &d in &orders {
            size = size
                .checked_mul(d)
                .ok_or(Error::TooLarge { what: "module order", size: u128::MAX, bound: u64::MAX as u128 })?;
        }
        let e = exponent as i128;
        let to_num = |x: &Rational64, what: &str| -> Result<i128> {
            let num = *x.numer() as i128 * e;
            let den = *x.denom() as i128;
            if num % den != 0 {
                return Err(Error::InvalidFqm(format!("{what} = {x} has denominator not dividing {exponent}")));
            }
            Ok(num / den)
        };
        let mut q_num = Vec::with_capacity(r);
        for (i, qi) in q.iter().enumerate() {
            let d = orders[i] as i128;
            let (n, m) = (*qi.numer() as i128, *qi.denom() as i128);
            if d % m != 0 {
                return Err(Error::InvalidFqm(format!("d_{i} * q(g_{i}) is not an integer")));
            }
            if (d / m * d * n) % 2 != 0 {
                return Err(Error::InvalidFqm(format!("d_{i}^2 * q(g_{i}) is not an even integer")));
            }
            q_num.push(to_num(qi, "q")?.rem_euclid(2 * e) as u64);
        }
        let mut b_num = vec![vec![0u64; r]; r];
        for i in 0..r {
            for j in 0..r {
                if mod1(b[i][j]) != mod1(b[j][i]) {
                    return Err(Error::InvalidFqm("pairing matrix is not symmetric".into()));
                }
                for &d in &[orders[i], orders[j]] {
                    if d as i64 % *b[i][j].denom() != 0 {
                        return Err(Error::InvalidFqm(format!("b(g_{i}, g_{j}) is not killed by {d}")));
                    }
                }
                b_num[i][j] = to_num(&b[i][j], "b")?.rem_euclid(e) as u64;
            }
            if b_num[i][i] != q_num[i] % exponent.max(1) {
                return Err(Error::InvalidFqm(format!("b(g_{i}, g_{i}) differs from q(g_{i}) mod 1")));
            }
        }
        Ok(Fqm { orders, exponent, q_num, b_num, size })
    }

    /// Builds a module directly from numerators over the exponent.
    pub(crate) fn from_numerators(orders: Vec<u64>, q_num: Vec<u64>, b_num: Vec<Vec<u64>>) -> Self {
        let exponent = orders.last().copied().unwrap_or(1);
        let size = orders.iter().product();
        Fqm { orders, exponent, q_num, b_num, size }
    }

    /// The trivial module.
    pub fn trivial() -> Self {
        Fqm::from_numerators(vec![], vec![], vec![])
    }

    /// Cyclic module `Z/d` with `q(g) = q`.
    pub fn cyclic(d: u64, q: QValue) -> Result<Self> {
        Fqm::new(vec![d], vec![q], vec![vec![mod1(q)]])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn q_generators(&self) -> Vec<QValue> {
        let e = self.exponent as i128;
        self.q_num.iter().map(|&n| reduce_q(n as i128, e)).collect()
    }

    pub fn b_generators(&self) -> Vec<Vec<BValue>> {
        let e = self.exponent as i128;
        self.b_num.iter().map(|row| row.iter().map(|&n| reduce_b(n as i128, e)).collect()).collect()
    }

    /// The same group with the form negated, `(A, -q)`.
    pub fn negated(&self) -> Fqm {
        let e = self.exponent;
        let q_num = self.q_num.iter().map(|&n| (2 * e - n) % (2 * e)).collect();
        let b_num = self.b_num.iter().map(|row| row.iter().map(|&n| (e - n) % e).collect()).collect();
        Fqm { q_num, b_num, ..self.clone() }
    }

    pub fn zero(&self) -> FqmElement {
        FqmElement(vec![0; self.orders.len()])
    }

    pub fn generator(&self, i: usize) -> FqmElement {
        let mut c = vec![0; self.orders.len()];
        c[i] = 1 % self.orders[i];
        FqmElement(c)
    }

    pub fn generators(&self) -> Vec<FqmElement> {
        (0..self.orders.len()).map(|i| self.generator(i)).collect()
    }

    /// Element with the given (unreduced) integer coefficients.
    pub fn element(&self, coeffs: &[i64]) -> Result<FqmElement> {
        if coeffs.len() != self.orders.len() {
            return Err(Error::Dimension("coefficient vector length".into()));
        }
        Ok(FqmElement(
            coeffs.iter().zip(&self.orders).map(|(&c, &d)| (c as i128).rem_euclid(d as i128) as u64).collect(),
        ))
    }

    pub fn contains(&self, x: &FqmElement) -> bool {
        x.0.len() == self.orders.len() && x.0.iter().zip(&self.orders).all(|(c, d)| c < d)
    }

    /// Mixed-radix index, first coordinate most significant.
    pub fn index_of(&self, x: &FqmElement) -> u64 {
        x.0.iter().zip(&self.orders).fold(0u64, |acc, (&c, &d)| acc * d + c)
    }

    pub fn element_at(&self, mut idx: u64) -> FqmElement {
        let mut c = vec![0u64; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            c[i] = idx % self.orders[i];
            idx /= self.orders[i];
        }
        FqmElement(c)
    }

    pub fn check_enumerable(&self, bound: u64) -> Result<()> {
        if self.size > bound {
            return Err(Error::TooLarge { what: "module order", size: self.size as u128, bound: bound as u128 });
        }
        Ok(())
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = FqmElement> + '_ {
        (0..self.size).map(move |i| self.element_at(i))
    }

    pub fn add(&self, x: &FqmElement, y: &FqmElement) -> FqmElement {
        FqmElement(x.0.iter().zip(&y.0).zip(&self.orders).map(|((a, b), d)| (a + b) % d).collect())
    }

    pub fn sub(&self, x: &FqmElement, y: &FqmElement) -> FqmElement {
        FqmElement(x.0.iter().zip(&y.0).zip(&self.orders).map(|((a, b), d)| (a + d - b) % d).collect())
    }

    pub fn neg(&self, x: &FqmElement) -> FqmElement {
        FqmElement(x.0.iter().zip(&self.orders).map(|(a, d)| (d - a) % d).collect())
    }

    pub fn scale(&self, k: i64, x: &FqmElement) -> FqmElement {
        FqmElement(
            x.0.iter()
                .zip(&self.orders)
                .map(|(&a, &d)| ((a as i128 * k as i128).rem_euclid(d as i128)) as u64)
                .collect(),
        )
    }

    pub fn is_zero(&self, x: &FqmElement) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    /// Order of an element: lcm of `d_i / gcd(d_i, c_i)`.
    pub fn order_of(&self, x: &FqmElement) -> u64 {
        x.0.iter().zip(&self.orders).fold(1u64, |acc, (&c, &d)| acc.lcm(&(d / d.gcd(&c))))
    }

    fn q_numerator(&self, x: &FqmElement) -> u128 {
        let m = 2 * self.exponent as u128;
        let r = self.orders.len();
        let mut s: u128 = 0;
        for i in 0..r {
            let ci = x.0[i] as u128 % m;
            if ci == 0 {
                continue;
            }
            s = (s + (ci * ci % m) * self.q_num[i] as u128) % m;
            for j in i + 1..r {
                let cj = x.0[j] as u128 % m;
                if cj == 0 {
                    continue;
                }
                s = (s + 2 * ((ci * cj % m) * self.b_num[i][j] as u128 % m)) % m;
            }
        }
        s
    }

    fn b_numerator(&self, x: &FqmElement, y: &FqmElement) -> u128 {
        let m = self.exponent as u128;
        let r = self.orders.len();
        let mut s: u128 = 0;
        for i in 0..r {
            let ci = x.0[i] as u128 % m;
            if ci == 0 {
                continue;
            }
            for j in 0..r {
                let cj = y.0[j] as u128 % m;
                if cj == 0 {
                    continue;
                }
                s = (s + (ci * cj % m) * self.b_num[i][j] as u128) % m;
            }
        }
        s
    }

    /// `q(x) = Σ c_i² q_i + 2 Σ_{i<j} c_i c_j b_ij  (mod 2)`.
    pub fn q(&self, x: &FqmElement) -> QValue {
        if self.orders.is_empty() {
            return QValue::zero();
        }
        reduce_q(self.q_numerator(x) as i128, self.exponent as i128)
    }

    pub fn b(&self, x: &FqmElement, y: &FqmElement) -> BValue {
        if self.orders.is_empty() {
            return BValue::zero();
        }
        reduce_b(self.b_numerator(x, y) as i128, self.exponent as i128)
    }

    /// Whether `b(x, ·)` vanishes only for `x = 0`.
    pub fn is_nondegenerate(&self) -> Result<bool> {
        self.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        let gens = self.generators();
        Ok(self.elements().skip(1).all(|x| gens.iter().any(|g| self.b_numerator(&x, g) != 0)))
    }

    /// All elements `x` with `b(x, y) = 0` for every `y` in `gens`.
    pub fn orthogonal_to(&self, gens: &[FqmElement]) -> Result<Vec<FqmElement>> {
        self.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        Ok(self.elements().filter(|x| gens.iter().all(|g| self.b_numerator(x, g) == 0)).collect())
    }
}

impl fmt::Display for Fqm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "trivial");
        }
        let groups: Vec<String> = self.orders.iter().map(|d| format!("Z/{d}")).collect();
        let qs: Vec<String> = self.q_generators().iter().map(|x| x.to_string()).collect();
        write!(f, "{} with q = [{}]", groups.join(" + "), qs.join(", "))
    }
}

/// A homomorphism between finite quadratic modules, given by the images of
/// the source generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqmHom {
    source: Fqm,
    target: Fqm,
    images: Vec<FqmElement>,
}

impl FqmHom {
    /// Checks well-definedness: `d_i · image(g_i) = 0` in the target.
    pub fn new(source: Fqm, target: Fqm, images: Vec<FqmElement>) -> Result<Self> {
        if images.len() != source.num_generators() {
            return Err(Error::InvalidFqm("one image per source generator required".into()));
        }
        for (i, y) in images.iter().enumerate() {
            if !target.contains(y) {
                return Err(Error::InvalidFqm(format!("image {i} is not a reduced target element")));
            }
            if !target.is_zero(&target.scale(source.orders[i] as i64, y)) {
                return Err(Error::InvalidFqm(format!("image of generator {i} has order not dividing {}", source.orders[i])));
            }
        }
        Ok(FqmHom { source, target, images })
    }

    pub fn identity(m: &Fqm) -> Self {
        FqmHom { source: m.clone(), target: m.clone(), images: m.generators() }
    }

    pub fn negation(m: &Fqm) -> Self {
        FqmHom { source: m.clone(), target: m.clone(), images: m.generators().iter().map(|g| m.neg(g)).collect() }
    }

    pub fn zero(source: &Fqm, target: &Fqm) -> Self {
        FqmHom { source: source.clone(), target: target.clone(), images: vec![target.zero(); source.num_generators()] }
    }

    pub fn source(&self) -> &Fqm {
        &self.source
    }

    pub fn target(&self) -> &Fqm {
        &self.target
    }

    pub fn images(&self) -> &[FqmElement] {
        &self.images
    }

    pub fn apply(&self, x: &FqmElement) -> FqmElement {
        let mut acc = self.target.zero();
        for (c, y) in x.0.iter().zip(&self.images) {
            if *c != 0 {
                acc = self.target.add(&acc, &self.target.scale(*c as i64, y));
            }
        }
        acc
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FqmHom) -> Result<FqmHom> {
        if other.target != self.source {
            return Err(Error::InvalidFqm("composition of incompatible maps".into()));
        }
        Ok(FqmHom {
            source: other.source.clone(),
            target: self.target.clone(),
            images: other.images.iter().map(|y| self.apply(y)).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.images == self.source.generators()
    }

    /// Checks `q(φ(g_i)) = sign·q(g_i)` and `b(φ(g_i), φ(g_j)) = sign·b(g_i, g_j)`.
    fn scales_form_by(&self, sign: i64) -> bool {
        let s = &self.source;
        let t = &self.target;
        let r = s.num_generators();
        for i in 0..r {
            let gi = s.generator(i);
            if t.q(&self.images[i]) != mod2(s.q(&gi) * sign) {
                return false;
            }
            for j in i + 1..r {
                let gj = s.generator(j);
                if t.b(&self.images[i], &self.images[j]) != mod1(s.b(&gi, &gj) * sign) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_form_preserving(&self) -> bool {
        self.scales_form_by(1)
    }

    pub fn is_form_negating(&self) -> bool {
        self.scales_form_by(-1)
    }

    /// Injectivity by exhaustive kernel search.
    pub fn is_injective(&self) -> Result<bool> {
        self.source.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        Ok(self.source.elements().skip(1).all(|x| !self.target.is_zero(&self.apply(&x))))
    }

    /// The image as a subgroup of the target.
    pub fn image(&self) -> Result<Subgroup> {
        Subgroup::generated(&self.target, &self.images)
    }

    /// Lookup table inverting an injective map on its image.
    pub fn inverse_table(&self) -> Result<HashMap<FqmElement, FqmElement>> {
        self.source.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        let mut table = HashMap::with_capacity(self.source.size() as usize);
        for x in self.source.elements() {
            if table.insert(self.apply(&x), x).is_some() {
                return Err(Error::InvalidFqm("map is not injective".into()));
            }
        }
        Ok(table)
    }

    /// Preimage of `y` under an injective map.
    pub fn preimage(&self, y: &FqmElement) -> Result<FqmElement> {
        self.source.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
        let mut found = None;
        for x in self.source.elements() {
            if &self.apply(&x) == y {
                if found.is_some() {
                    return Err(Error::InvalidFqm("preimage requested from a non-injective map".into()));
                }
                found = Some(x);
            }
        }
        found.ok_or(Error::NotInImage)
    }

    /// Multiplicative order of an automorphism.
    pub fn order(&self) -> Result<u64> {
        if self.source != self.target {
            return Err(Error::InvalidFqm("order of a map between different modules".into()));
        }
        let mut p = self.clone();
        for k in 1..=DEFAULT_GROUP_BOUND as u64 {
            if p.is_identity() {
                return Ok(k);
            }
            p = self.compose(&p)?;
        }
        Err(Error::TooLarge { what: "automorphism order", size: DEFAULT_GROUP_BOUND as u128 + 1, bound: DEFAULT_GROUP_BOUND as u128 })
    }
}

impl fmt::Display for FqmHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().enumerate().map(|(i, y)| format!("g{i}->{y}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A subgroup of a finite quadratic module, with its elements stored as
/// sorted indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    ambient: Fqm,
    generators: Vec<FqmElement>,
    members: Vec<u64>,
}

impl Subgroup {
    pub fn generated(ambient: &Fqm, gens: &[FqmElement]) -> Result<Self> {
        if let Some(g) = gens.iter().find(|g| !ambient.contains(g)) {
            return Err(Error::InvalidFqm(format!("{g} is not an element of the ambient module")));
        }
        let mut seen: HashSet<u64> = HashSet::new();
        let zero = ambient.zero();
        seen.insert(ambient.index_of(&zero));
        let mut queue = VecDeque::from([zero]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = ambient.add(&x, g);
                if seen.insert(ambient.index_of(&y)) {
                    if seen.len() as u64 > DEFAULT_ENUMERATION_BOUND {
                        return Err(Error::TooLarge {
                            what: "subgroup order",
                            size: seen.len() as u128,
                            bound: DEFAULT_ENUMERATION_BOUND as u128,
                        });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut members: Vec<u64> = seen.into_iter().collect();
        members.sort_unstable();
        Ok(Subgroup { ambient: ambient.clone(), generators: gens.to_vec(), members })
    }

    /// Subgroup with the given element list; fails unless it is closed.
    pub fn from_elements(ambient: &Fqm, elements: &[FqmElement]) -> Result<Self> {
        let mut members: Vec<u64> = elements.iter().map(|x| ambient.index_of(x)).collect();
        members.sort_unstable();
        members.dedup();
        let set: HashSet<u64> = members.iter().copied().collect();
        if !set.contains(&0) {
            return Err(Error::NotSubgroup);
        }
        for x in elements {
            for y in elements {
                if !set.contains(&ambient.index_of(&ambient.add(x, y))) {
                    return Err(Error::NotSubgroup);
                }
            }
        }
        // greedy generating set
        let mut gens = Vec::new();
        let mut span = Subgroup::generated(ambient, &[])?;
        for x in elements {
            if !span.contains(x) {
                gens.push(x.clone());
                span = Subgroup::generated(ambient, &gens)?;
            }
        }
        Ok(Subgroup { ambient: ambient.clone(), generators: gens, members })
    }

    pub fn trivial(ambient: &Fqm) -> Self {
        Subgroup { ambient: ambient.clone(), generators: vec![], members: vec![0] }
    }

    pub fn whole(ambient: &Fqm) -> Result<Self> {
        Subgroup::generated(ambient, &ambient.generators())
    }

    pub fn ambient(&self) -> &Fqm {
        &self.ambient
    }

    pub fn generators(&self) -> &[FqmElement] {
        &self.generators
    }

    pub fn order(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn contains(&self, x: &FqmElement) -> bool {
        self.ambient.contains(x) && self.members.binary_search(&self.ambient.index_of(x)).is_ok()
    }

    pub fn elements(&self) -> impl Iterator<Item = FqmElement> + '_ {
        self.members.iter().map(move |&i| self.ambient.element_at(i))
    }

    /// Sorted element indices; equal subgroups have equal keys.
    pub fn key(&self) -> &[u64] {
        &self.members
    }

    /// The orthogonal complement inside the ambient module.
    pub fn orthogonal(&self) -> Result<Subgroup> {
        let elems = self.ambient.orthogonal_to(&self.generators)?;
        Subgroup::from_elements(&self.ambient, &elems)
    }

    /// The subgroup as a module in its own right, with invariant-factor
    /// generators, together with the inclusion map into the ambient module.
    pub fn to_fqm(&self) -> Result<(Fqm, FqmHom)> {
        let amb = &self.ambient;
        let r = amb.num_generators();
        if self.generators.is_empty() || r == 0 {
            let t = Fqm::trivial();
            let inc = FqmHom::zero(&t, amb);
            return Ok((t, inc));
        }
        // Subgroup = (span of generator lifts + relations) / relations in Z^r.
        let mut rows: Vec<Vec<i64>> = self.generators.iter().map(|g| g.0.iter().map(|&c| c as i64).collect()).collect();
        for (i, &d) in amb.orders().iter().enumerate() {
            let mut row = vec![0i64; r];
            row[i] = d as i64;
            rows.push(row);
        }
        let span = crate::exact::hermite_row_basis(&IntMatrix::from_i64(&rows));
        // span is r x r (full rank since relations included); express relations in it
        let span_rat_inv = span.transpose().to_rat().inverse()?;
        let mut rel_rows = Vec::with_capacity(r);
        for (i, &d) in amb.orders().iter().enumerate() {
            let mut v = vec![num_rational::BigRational::zero(); r];
            v[i] = num_rational::BigRational::from_integer(d.into());
            let coords = span_rat_inv.mul_vec(&v)?;
            let ints: Option<Vec<_>> = coords.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect();
            rel_rows.push(ints.ok_or_else(|| Error::Internal("relation not in span".into()))?);
        }
        // rel (rows) = coordinates of relations in the span basis
        let rel = IntMatrix::from_rows(rel_rows)?;
        let snf = smith_normal_form(&rel);
        // rel = U^{-1} S V^{-1}; new generators of the quotient: rows of V^{-1} (in span coords)
        let vinv = snf.v.inverse_unimodular()?;
        let mut orders = Vec::new();
        let mut images = Vec::new();
        for k in 0..r {
            let d = snf.s[(k, k)].clone();
            use num_traits::{One, ToPrimitive};
            if d.is_one() {
                continue;
            }
            let d64 = d.to_u64().ok_or(Error::TooLarge { what: "invariant factor", size: u128::MAX, bound: u64::MAX as u128 })?;
            // generator = Σ_j vinv[k][j] * span_row_j, as an ambient element
            let coeffs = span.vec_mul(vinv.row(k))?;
            let mut c = Vec::with_capacity(r);
            for (x, &dd) in coeffs.iter().zip(amb.orders()) {
                let m = x.mod_floor(&num_bigint::BigInt::from(dd));
                c.push(m.to_u64().unwrap_or(0));
            }
            orders.push(d64);
            images.push(FqmElement(c));
        }
        let e = orders.last().copied().unwrap_or(1);
        let sub_q: Vec<u64> = images
            .iter()
            .map(|x| {
                let q = amb.q(x) * Rational64::from_integer(e as i64);
                q.to_integer().rem_euclid(2 * e as i64) as u64
            })
            .collect();
        let sub_b: Vec<Vec<u64>> = images
            .iter()
            .map(|x| {
                images
                    .iter()
                    .map(|y| {
                        let b = amb.b(x, y) * Rational64::from_integer(e as i64);
                        b.to_integer().rem_euclid(e as i64) as u64
                    })
                    .collect()
            })
            .collect();
        let fqm = Fqm::from_numerators(orders, sub_q, sub_b);
        let inc = FqmHom::new(fqm.clone(), amb.clone(), images)?;
        if fqm.size() != self.order() {
            return Err(Error::Internal("subgroup decomposition has wrong order".into()));
        }
        Ok((fqm, inc))
    }
}

/// Sign of the form relation required of an embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormSign {
    Preserve,
    Negate,
}

impl FormSign {
    fn factor(self) -> i64 {
        match self {
            FormSign::Preserve => 1,
            FormSign::Negate => -1,
        }
    }
}

/// All injective homomorphisms `a → b` with `q_b(φ(x)) = ±q_a(x)`, found by
/// backtracking over generator images constrained by order, `q` and pairings.
/// If `within` is given, images are restricted to that subgroup of `b`.
pub fn embeddings(
    a: &Fqm,
    b: &Fqm,
    sign: FormSign,
    within: Option<&Subgroup>,
    limit: Option<usize>,
) -> Result<Vec<FqmHom>> {
    b.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    if a.size() > b.size() || b.size() % a.size().max(1) != 0 {
        return Ok(vec![]);
    }
    if a.is_trivial() {
        return Ok(vec![FqmHom::zero(a, b)]);
    }
    let s = sign.factor();
    let r = a.num_generators();
    let a_nondeg = a.is_nondegenerate()?;
    let pool: Vec<FqmElement> = match within {
        Some(sub) => {
            if sub.ambient() != b {
                return Err(Error::NotSubgroup);
            }
            sub.elements().collect()
        }
        None => b.elements().collect(),
    };
    let candidates: Vec<Vec<FqmElement>> = (0..r)
        .map(|i| {
            let gi = a.generator(i);
            let want = mod2(a.q(&gi) * s);
            pool.iter()
                .filter(|y| a.orders()[i] % b.order_of(y) == 0 && b.q(y) == want)
                .cloned()
                .collect()
        })
        .collect();
    let want_b: Vec<Vec<BValue>> = (0..r)
        .map(|i| (0..r).map(|j| mod1(a.b(&a.generator(i), &a.generator(j)) * s)).collect())
        .collect();

    let mut out = Vec::new();
    let mut chosen: Vec<FqmElement> = Vec::with_capacity(r);
    fn rec(
        k: usize,
        r: usize,
        a: &Fqm,
        b: &Fqm,
        candidates: &[Vec<FqmElement>],
        want_b: &[Vec<BValue>],
        chosen: &mut Vec<FqmElement>,
        a_nondeg: bool,
        limit: Option<usize>,
        out: &mut Vec<FqmHom>,
    ) -> Result<()> {
        if limit.is_some_and(|l| out.len() >= l) {
            return Ok(());
        }
        if k == r {
            let hom = FqmHom { source: a.clone(), target: b.clone(), images: chosen.clone() };
            if a_nondeg || hom.is_injective()? {
                out.push(hom);
            }
            return Ok(());
        }
        for y in &candidates[k] {
            if (0..k).all(|j| b.b(y, &chosen[j]) == want_b[k][j]) {
                chosen.push(y.clone());
                rec(k + 1, r, a, b, candidates, want_b, chosen, a_nondeg, limit, out)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    rec(0, r, a, b, &candidates, &want_b, &mut chosen, a_nondeg, limit, &mut out)?;
    Ok(out)
}

/// All anti-embeddings `a → b` (injective, `q` and `b` negated).
pub fn anti_embeddings(a: &Fqm, b: &Fqm) -> Result<Vec<FqmHom>> {
    embeddings(a, b, FormSign::Negate, None, None)
}

/// Whether two modules are isometric.
pub fn is_isometric(a: &Fqm, b: &Fqm) -> Result<bool> {
    if a.size() != b.size() {
        return Ok(false);
    }
    Ok(!embeddings(a, b, FormSign::Preserve, None, Some(1))?.is_empty())
}

/// A finite group of module automorphisms, stored element by element.
#[derive(Clone, Debug)]
pub struct AutGroup {
    module: Fqm,
    generators: Vec<FqmHom>,
    elements: HashSet<Vec<FqmElement>>,
}

impl AutGroup {
    /// Closure of the given automorphisms under composition.
    pub fn generated(module: &Fqm, gens: &[FqmHom], bound: usize) -> Result<Self> {
        for g in gens {
            if g.source() != module || g.target() != module {
                return Err(Error::InvalidFqm("generator is not an endomorphism of the module".into()));
            }
            if !g.is_form_preserving() || !g.is_injective()? {
                return Err(Error::InvalidFqm("generator is not an automorphism of the module".into()));
            }
        }
        let id = FqmHom::identity(module);
        let mut elements: HashSet<Vec<FqmElement>> = HashSet::new();
        elements.insert(id.images.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = g.compose(&x)?;
                if elements.insert(y.images.clone()) {
                    if elements.len() > bound {
                        return Err(Error::TooLarge { what: "automorphism group", size: elements.len() as u128, bound: bound as u128 });
                    }
                    queue.push_back(y);
                }
            }
        }
        Ok(AutGroup { module: module.clone(), generators: gens.to_vec(), elements })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[FqmHom] {
        &self.generators
    }

    pub fn contains(&self, h: &FqmHom) -> bool {
        h.source() == &self.module && h.target() == &self.module && self.elements.contains(&h.images)
    }

    pub fn elements(&self) -> Vec<FqmHom> {
        let mut v: Vec<Vec<FqmElement>> = self.elements.iter().cloned().collect();
        v.sort();
        v.into_iter()
            .map(|images| FqmHom { source: self.module.clone(), target: self.module.clone(), images })
            .collect()
    }
}

/// Generators and order of the orthogonal group `O(M)` of a module.
#[derive(Clone, Debug)]
pub struct OrthogonalGroup {
    pub generators: Vec<FqmHom>,
    pub order: usize,
}

pub fn orthogonal_group(m: &Fqm, bound: u64) -> Result<OrthogonalGroup> {
    m.check_enumerable(bound)?;
    let all = embeddings(m, m, FormSign::Preserve, None, None)?;
    let mut gens: Vec<FqmHom> = Vec::new();
    let mut closure = AutGroup::generated(m, &[], DEFAULT_GROUP_BOUND)?;
    for x in &all {
        if !closure.contains(x) {
            gens.push(x.clone());
            closure = AutGroup::generated(m, &gens, DEFAULT_GROUP_BOUND)?;
        }
    }
    if closure.order() != all.len() {
        return Err(Error::Internal("orthogonal group closure mismatch".into()));
    }
    Ok(OrthogonalGroup { generators: gens, order: all.len() })
}

/// Whether the glued lattice has discriminant `Z/2` with `q = 3/2`: the image
/// has index 2 and some `x ∉ image`, orthogonal to it, has `q(x) = 3/2 mod 2`.
pub fn k3sq_glue_admissible(dn: &Fqm, image: &Subgroup) -> Result<bool> {
    if image.ambient() != dn {
        return Err(Error::NotSubgroup);
    }
    if dn.size() != 2 * image.order() {
        return Ok(false);
    }
    dn.check_enumerable(DEFAULT_ENUMERATION_BOUND)?;
    let target = QValue::new(3, 2);
    let gens = image.generators();
    Ok(dn
        .elements()
        .any(|x| !image.contains(&x) && gens.iter().all(|g| dn.b(&x, g).is_zero()) && dn.q(&x) == target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(n: i64, d: i64) -> QValue {
        QValue::new(n, d)
    }

    #[test]
    fn evaluate_basics() {
        let m = Fqm::cyclic(2, qv(3, 2)).unwrap();
        assert_eq!(m.q(&m.zero()), qv(0, 1));
        assert_eq!(m.q(&m.generator(0)), qv(3, 2));
        let a2 = Fqm::cyclic(3, qv(2, 3)).unwrap();
        let g = a2.generator(0);
        assert_eq!(a2.q(&g), a2.q(&a2.neg(&g)));
        assert_eq!(a2.q(&a2.scale(2, &g)), qv(2, 3));
    }

    #[test]
    fn rejects_inconsistent_data() {
        assert!(Fqm::cyclic(3, qv(1, 2)).is_err());
        assert!(Fqm::new(vec![2, 3], vec![qv(1, 2), qv(2, 3)], vec![vec![qv(1, 2), qv(0, 1)], vec![qv(0, 1), qv(2, 3)]]).is_err());
    }

    #[test]
    fn orthogonal_group_examples() {
        assert_eq!(orthogonal_group(&Fqm::trivial(), 1000).unwrap().order, 1);
        assert_eq!(orthogonal_group(&Fqm::cyclic(3, qv(2, 3)).unwrap(), 1000).unwrap().order, 2);
        assert_eq!(orthogonal_group(&Fqm::cyclic(2, qv(3, 2)).unwrap(), 1000).unwrap().order, 1);
    }

    #[test]
    fn anti_embedding_examples() {
        let t = Fqm::trivial();
        let b = Fqm::cyclic(3, qv(4, 3)).unwrap();
        assert_eq!(anti_embeddings(&t, &b).unwrap().len(), 1);
        let a = Fqm::cyclic(3, qv(2, 3)).unwrap();
        let maps = anti_embeddings(&a, &b).unwrap();
        assert_eq!(maps.len(), 2);
        assert!(maps.iter().all(|h| h.is_form_negating() && h.is_injective().unwrap()));
        let two = Fqm::cyclic(2, qv(1, 2)).unwrap();
        assert!(anti_embeddings(&two, &b).unwrap().is_empty());
    }

    #[test]
    fn admissibility_examples() {
        let d = Fqm::cyclic(2, qv(3, 2)).unwrap();
        assert!(k3sq_glue_admissible(&d, &Subgroup::trivial(&d)).unwrap());
        let d3 = Fqm::cyclic(3, qv(2, 3)).unwrap();
        assert!(!k3sq_glue_admissible(&d3, &Subgroup::trivial(&d3)).unwrap());
        // D(A2 ⊕ A2(-1)) with the diagonal graph subgroup
        let dd = Fqm::new(
            vec![3, 3],
            vec![qv(2, 3), qv(4, 3)],
            vec![vec![qv(2, 3), qv(0, 1)], vec![qv(0, 1), qv(1, 3)]],
        )
        .unwrap();
        let graph = Subgroup::generated(&dd, &[dd.element(&[1, 1]).unwrap()]).unwrap();
        assert_eq!(graph.order(), 3);
        assert!(!k3sq_glue_admissible(&dd, &graph).unwrap());
        let other = Fqm::cyclic(3, qv(2, 3)).unwrap();
        assert!(k3sq_glue_admissible(&other, &graph).is_err());
    }

    #[test]
    fn subgroup_tools() {
        let m = Fqm::cyclic(6, qv(1, 6)).unwrap();
        let zero = FqmHom::zero(&m, &m);
        assert_eq!(zero.image().unwrap().order(), 1);
        let sub = Subgroup::generated(&m, &[m.element(&[2]).unwrap()]).unwrap();
        assert!(sub.contains(&m.zero()));
        assert_eq!(sub.order(), 3);
        let neg = FqmHom::negation(&m);
        let x = m.element(&[1]).unwrap();
        assert_eq!(neg.preimage(&x).unwrap(), m.neg(&x));
        let not_inj = FqmHom::new(m.clone(), m.clone(), vec![m.element(&[2]).unwrap()]).unwrap();
        assert!(!not_inj.is_injective().unwrap());
        assert!(FqmHom::zero(&m, &m).preimage(&x).is_err());
    }

    #[test]
    fn subgroup_to_module() {
        // Z/2 ⊕ Z/6, subgroup generated by (1,3): cyclic of order 2
        let m = Fqm::new(
            vec![2, 6],
            vec![qv(1, 2), qv(1, 6)],
            vec![vec![qv(1, 2), qv(0, 1)], vec![qv(0, 1), qv(1, 6)]],
        )
        .unwrap();
        let sub = Subgroup::generated(&m, &[m.element(&[1, 3]).unwrap()]).unwrap();
        let (f, inc) = sub.to_fqm().unwrap();
        assert_eq!(f.orders(), &[2]);
        assert_eq!(f.q(&f.generator(0)), m.q(&m.element(&[1, 3]).unwrap()));
        assert!(inc.is_form_preserving());
        let whole = Subgroup::whole(&m).unwrap();
        let (g, _) = whole.to_fqm().unwrap();
        assert_eq!(g.size(), 12);
        assert!(is_isometric(&g, &m).unwrap());
    }
}
