//! Group data for the classification: invariant lattices, coinvariant glue
//! data and optional `O(M)` image generators, in a line-oriented text format.
//!
//! ```text
//! # comment
//! group <name>
//! symplectic_order <n>
//! invariant
//! <3 rows of integers>
//! end
//! coinv_gram
//! <rows>
//! end
//! coinv_disc
//! orders <d1> <d2> ...
//! q <p/q> <p/q> ...
//! b
//! <rows of p/q>
//! end
//! obar
//! hom
//! <one line of coefficients per generator image>
//! end
//! end
//! generators
//! matrix
//! <rows>
//! end
//! end
//! endgroup
//! ```
//!
//! Every block except `group` is optional, and `invariant` may repeat.
//! `generators` holds matrices of the symplectic action on the coinvariant
//! lattice, in the basis of `coinv_gram`.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::Rational64;

use crate::classify::CoinvariantData;
use crate::enumerate::{short_vectors, Isometry};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::fqm::{is_isometric, Fqm, FqmElement, FqmHom, QValue, Subgroup};
use crate::lattice::Lattice;

/// The built-in transcription of the 15 maximal symplectic groups.
pub const BUILTIN: &str = include_str!("../data/maximal_groups.k3d");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupData {
    pub name: String,
    pub symplectic_order: Option<u128>,
    pub invariant_grams: Vec<IntMatrix>,
    pub coinv_gram: Option<IntMatrix>,
    pub coinv_disc: Option<Fqm>,
    pub obar_gens: Option<Vec<FqmHom>>,
    pub generators: Option<Vec<IntMatrix>>,
}

impl GroupData {
    pub fn new(name: &str) -> Self {
        GroupData {
            name: name.to_string(),
            symplectic_order: None,
            invariant_grams: Vec::new(),
            coinv_gram: None,
            coinv_disc: None,
            obar_gens: None,
            generators: None,
        }
    }

    pub fn invariant_lattices(&self) -> Result<Vec<Lattice>> {
        self.invariant_grams.iter().map(|g| Lattice::new(g.clone())).collect()
    }

    /// The glue data handed to the classification.
    pub fn coinvariant_data(&self) -> Result<CoinvariantData> {
        let lattice = self.coinv_gram.as_ref().map(|g| Lattice::new(g.clone())).transpose()?;
        let disc = match (&self.coinv_disc, &lattice) {
            (Some(d), _) => d.clone(),
            (None, Some(m)) => m.discriminant()?.form().clone(),
            (None, None) => return Err(Error::Dataset(format!("{}: no coinvariant data", self.name))),
        };
        let symplectic_action = match (&self.generators, &lattice) {
            (Some(gens), Some(m)) => Some(gens.iter().map(|g| Isometry::new(m, g.clone())).collect::<Result<Vec<_>>>()?),
            _ => None,
        };
        Ok(CoinvariantData { disc, lattice, obar: self.obar_gens.clone(), symplectic_action })
    }

    /// Checks the named invariants of the group record.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Dataset(format!("{}: {what}", self.name)));
        if self.invariant_grams.is_empty() {
            return fail("no invariant lattice".into());
        }
        for g in &self.invariant_grams {
            if let Some((r, c)) = g.first_asymmetry() {
                return Err(Error::NotSymmetric { row: r, col: c });
            }
            let l = Lattice::new(g.clone())?;
            if l.rank() != 3 || !l.is_positive_definite() || !l.is_even() {
                return fail(format!("invariant lattice {} is not even positive definite of rank 3", l));
            }
        }
        if let Some(g) = &self.coinv_gram {
            let m = Lattice::new(g.clone())?;
            if !m.is_even() || !m.is_definite() {
                return fail("coinvariant lattice is not even and definite".into());
            }
            if let Some(d) = &self.coinv_disc {
                if !is_isometric(m.discriminant()?.form(), d)? {
                    return fail("declared coinvariant form differs from the form of coinv_gram".into());
                }
            }
        }
        if let (Some(gens), Some(d)) = (&self.obar_gens, self.coinv_data_form()?) {
            for h in gens {
                if h.source() != &d || h.target() != &d || !h.is_form_preserving() || !h.is_injective()? {
                    return fail("obar generator is not an isometry of the coinvariant form".into());
                }
            }
        }
        if self.generators.is_some() {
            self.coinvariant_data()?;
        }
        Ok(())
    }

    fn coinv_data_form(&self) -> Result<Option<Fqm>> {
        match (&self.coinv_disc, &self.coinv_gram) {
            (Some(d), _) => Ok(Some(d.clone())),
            (None, Some(g)) => Ok(Some(Lattice::new(g.clone())?.discriminant()?.form().clone())),
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub groups: Vec<GroupData>,
}

impl Dataset {
    pub fn builtin() -> Dataset {
        parse(BUILTIN).expect("built-in dataset parses")
    }

    pub fn group(&self, name: &str) -> Option<&GroupData> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.groups.iter().try_for_each(GroupData::validate)
    }
}

/// Reads, parses and validates a dataset file.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
    let ds = parse(&text)?;
    ds.validate()?;
    Ok(ds)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate().peekable(), line: 0 }
    }

    /// Next non-blank, non-comment line, trimmed.
    fn next(&mut self) -> Option<&'a str> {
        for (i, raw) in self.inner.by_ref() {
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Some(s);
        }
        None
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn expect(&mut self) -> Result<&'a str> {
        self.next().ok_or_else(|| Error::Parse { line: self.line, msg: "unexpected end of input".into() })
    }

    /// Integer rows up to the closing `end`.
    fn matrix(&mut self) -> Result<IntMatrix> {
        let mut rows = Vec::new();
        loop {
            let s = self.expect()?;
            if s == "end" {
                break;
            }
            let row = s
                .split_whitespace()
                .map(|t| t.parse::<num_bigint::BigInt>().map_err(|_| self.err(format!("bad integer '{t}'"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(self.err("matrix block is not square"));
        }
        IntMatrix::from_rows(rows)
    }
}

fn parse_rational(lines: &Lines, t: &str) -> Result<Rational64> {
    t.parse::<Rational64>().map_err(|_| lines.err(format!("bad rational '{t}'")))
}

fn parse_u64(lines: &Lines, t: &str) -> Result<u64> {
    t.parse::<u64>().map_err(|_| lines.err(format!("bad integer '{t}'")))
}

fn parse_fqm(lines: &mut Lines) -> Result<Fqm> {
    let s = lines.expect()?;
    let orders = match s.strip_prefix("orders") {
        Some(rest) => rest.split_whitespace().map(|t| parse_u64(lines, t)).collect::<Result<Vec<_>>>()?,
        None => return Err(lines.err("expected 'orders'")),
    };
    let s = lines.expect()?;
    let q = match s.strip_prefix("q") {
        Some(rest) => rest.split_whitespace().map(|t| parse_rational(lines, t)).collect::<Result<Vec<_>>>()?,
        None => return Err(lines.err("expected 'q'")),
    };
    if lines.expect()? != "b" {
        return Err(lines.err("expected 'b'"));
    }
    let mut b = Vec::new();
    loop {
        let s = lines.expect()?;
        if s == "end" {
            break;
        }
        b.push(s.split_whitespace().map(|t| parse_rational(lines, t)).collect::<Result<Vec<_>>>()?);
    }
    Fqm::new(orders, q, b).map_err(|e| lines.err(e.to_string()))
}

fn parse_obar(lines: &mut Lines, disc: Option<&Fqm>) -> Result<Vec<FqmHom>> {
    let d = disc.ok_or_else(|| lines.err("obar needs coinv_disc or coinv_gram before it"))?.clone();
    let mut out = Vec::new();
    loop {
        match lines.expect()? {
            "end" => return Ok(out),
            "hom" => {
                let mut images = Vec::new();
                loop {
                    let s = lines.expect()?;
                    if s == "end" {
                        break;
                    }
                    let coeffs = s
                        .split_whitespace()
                        .map(|t| t.parse::<i64>().map_err(|_| lines.err(format!("bad integer '{t}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    images.push(d.element(&coeffs).map_err(|e| lines.err(e.to_string()))?);
                }
                out.push(FqmHom::new(d.clone(), d.clone(), images).map_err(|e| lines.err(e.to_string()))?);
            }
            other => return Err(lines.err(format!("expected 'hom' or 'end', got '{other}'"))),
        }
    }
}

fn parse_generators(lines: &mut Lines) -> Result<Vec<IntMatrix>> {
    let mut out = Vec::new();
    loop {
        match lines.expect()? {
            "end" => return Ok(out),
            "matrix" => out.push(lines.matrix()?),
            other => return Err(lines.err(format!("expected 'matrix' or 'end', got '{other}'"))),
        }
    }
}

/// Parses the text format; does not run [`Dataset::validate`].
pub fn parse(text: &str) -> Result<Dataset> {
    let mut lines = Lines::new(text);
    let mut groups = Vec::new();
    while let Some(s) = lines.next() {
        let name = match s.strip_prefix("group ") {
            Some(n) if !n.trim().is_empty() => n.trim(),
            _ => return Err(lines.err(format!("expected 'group <name>', got '{s}'"))),
        };
        let mut g = GroupData::new(name);
        loop {
            let s = lines.expect()?;
            let (key, rest) = s.split_once(' ').unwrap_or((s, ""));
            match key {
                "endgroup" => break,
                "symplectic_order" => {
                    g.symplectic_order =
                        Some(rest.trim().parse().map_err(|_| lines.err(format!("bad order '{}'", rest.trim())))?)
                }
                "invariant" => {
                    let m = lines.matrix()?;
                    if let Some((r, c)) = m.first_asymmetry() {
                        return Err(lines.err(format!("invariant Gram fails symmetry at ({r}, {c})")));
                    }
                    g.invariant_grams.push(m);
                }
                "coinv_gram" => {
                    let m = lines.matrix()?;
                    if let Some((r, c)) = m.first_asymmetry() {
                        return Err(lines.err(format!("coinvariant Gram fails symmetry at ({r}, {c})")));
                    }
                    g.coinv_gram = Some(m);
                }
                "coinv_disc" => g.coinv_disc = Some(parse_fqm(&mut lines)?),
                "obar" => {
                    let d = g.coinv_data_form()?;
                    g.obar_gens = Some(parse_obar(&mut lines, d.as_ref())?)
                }
                "generators" => g.generators = Some(parse_generators(&mut lines)?),
                other => return Err(lines.err(format!("unknown key '{other}'"))),
            }
        }
        groups.push(g);
    }
    Ok(Dataset { groups })
}

fn emit_matrix(out: &mut String, m: &IntMatrix) {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out.push_str("end\n");
}

fn rational(x: &QValue) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn coeffs(x: &FqmElement) -> String {
    x.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Canonical text of a dataset; `parse(emit(d))` returns `d`.
pub fn emit(ds: &Dataset) -> String {
    let mut out = String::new();
    for (i, g) in ds.groups.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "group {}", g.name);
        if let Some(n) = g.symplectic_order {
            let _ = writeln!(out, "symplectic_order {n}");
        }
        for m in &g.invariant_grams {
            out.push_str("invariant\n");
            emit_matrix(&mut out, m);
        }
        if let Some(m) = &g.coinv_gram {
            out.push_str("coinv_gram\n");
            emit_matrix(&mut out, m);
        }
        if let Some(d) = &g.coinv_disc {
            out.push_str("coinv_disc\n");
            let orders: Vec<String> = d.orders().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "orders {}", orders.join(" "));
            let qs: Vec<String> = d.q_generators().iter().map(rational).collect();
            let _ = writeln!(out, "q {}", qs.join(" "));
            out.push_str("b\n");
            for row in d.b_generators() {
                let _ = writeln!(out, "{}", row.iter().map(rational).collect::<Vec<_>>().join(" "));
            }
            out.push_str("end\n");
        }
        if let Some(gens) = &g.obar_gens {
            out.push_str("obar\n");
            for h in gens {
                out.push_str("hom\n");
                for x in h.images() {
                    let _ = writeln!(out, "{}", coeffs(x));
                }
                out.push_str("end\n");
            }
            out.push_str("end\n");
        }
        if let Some(gens) = &g.generators {
            out.push_str("generators\n");
            for m in gens {
                out.push_str("matrix\n");
                emit_matrix(&mut out, m);
            }
            out.push_str("end\n");
        }
        out.push_str("endgroup\n");
    }
    out
}

/// Candidate coinvariant forms for one invariant lattice `N`: `−x^⊥` for each
/// `x ∈ D_N` of order 2 with `q(x) = 3/2`.
pub fn coinvariant_form_candidates(n: &Lattice) -> Result<Vec<Fqm>> {
    let d = n.discriminant()?;
    let dn = d.form();
    dn.check_enumerable(crate::fqm::DEFAULT_ENUMERATION_BOUND)?;
    let target = QValue::new(3, 2);
    let mut out: Vec<Fqm> = Vec::new();
    for x in dn.elements() {
        if dn.order_of(&x) != 2 || dn.q(&x) != target {
            continue;
        }
        let perp = Subgroup::generated(dn, &[x])?.orthogonal()?;
        let (form, _) = perp.to_fqm()?;
        let neg = form.negated();
        let mut seen = false;
        for f in &out {
            if is_isometric(f, &neg)? {
                seen = true;
                break;
            }
        }
        if !seen {
            out.push(neg);
        }
    }
    Ok(out)
}

/// A positive definite even rank-4 lattice without vectors of norm 2 whose
/// discriminant form is isometric to `f`, if one exists.
///
/// Searches Gram matrices with `4 ≤ a₁₁ ≤ … ≤ a₄₄`, `|2aᵢⱼ| ≤ aᵢᵢ` and
/// `a₁₁a₂₂a₃₃a₄₄ ≤ 4·|f|`, which contains a Minkowski-reduced representative
/// of every such lattice.
pub fn rootless_rank4_realization(f: &Fqm) -> Result<Option<Lattice>> {
    let det = f.size() as i64;
    let bound = 4 * det;
    let two = BigInt::from(2);
    let mut a: i64 = 4;
    while a.pow(4) <= bound {
        let mut b: i64 = a;
        while a * b.pow(3) <= bound {
            let mut c = b;
            while a * b * c * c <= bound {
                let mut d = c;
                while a * b * c * d <= bound {
                    let r = |x: i64| -(x / 2)..=(x / 2);
                    for ab in r(a) {
                        for ac in r(a) {
                            for ad in r(a) {
                                for bc in r(b) {
                                    for bd in r(b) {
                                        for cd in r(c) {
                                            let g = IntMatrix::from_i64(&[
                                                vec![a, ab, ac, ad],
                                                vec![ab, b, bc, bd],
                                                vec![ac, bc, c, cd],
                                                vec![ad, bd, cd, d],
                                            ]);
                                            if g.det()? != BigInt::from(det) {
                                                continue;
                                            }
                                            let l = Lattice::new(g)?;
                                            if !l.is_positive_definite() || !short_vectors(&l, &two)?.is_empty() {
                                                continue;
                                            }
                                            if is_isometric(l.discriminant()?.form(), f)? {
                                                return Ok(Some(l));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                    d += 2;
                }
                c += 2;
            }
            b += 2;
        }
        a += 2;
    }
    Ok(None)
}

/// Candidate coinvariant forms compatible with every invariant lattice of a
/// group and realized by a rootless rank-4 lattice, up to isometry.
pub fn coinvariant_forms(invariant: &[Lattice]) -> Result<Vec<Fqm>> {
    let (first, rest) = invariant.split_first().ok_or_else(|| Error::Dataset("no invariant lattice".into()))?;
    let mut common = coinvariant_form_candidates(first)?;
    for n in rest {
        let cands = coinvariant_form_candidates(n)?;
        let mut keep = Vec::new();
        for f in common {
            let mut found = false;
            for c in &cands {
                if is_isometric(&f, c)? {
                    found = true;
                    break;
                }
            }
            if found {
                keep.push(f);
            }
        }
        common = keep;
    }
    let mut out = Vec::new();
    for f in common {
        if rootless_rank4_realization(&f)?.is_some() {
            out.push(f);
        }
    }
    Ok(out)
}

/// The unique form returned by [`coinvariant_forms`].
pub fn derive_coinvariant_form(invariant: &[Lattice]) -> Result<Fqm> {
    let mut forms = coinvariant_forms(invariant)?;
    match forms.len() {
        1 => Ok(forms.pop().expect("one element")),
        0 => Err(Error::Dataset("invariant lattices admit no coinvariant form".into())),
        k => Err(Error::Dataset(format!("{k} non-isometric coinvariant forms remain"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_round_trip() {
        let ds = Dataset::builtin();
        assert_eq!(ds.groups.len(), 15);
        let text = emit(&ds);
        assert_eq!(parse(&text).unwrap(), ds);
        assert_eq!(emit(&parse(&text).unwrap()), text);
    }

    #[test]
    fn builtin_fixtures() {
        let ds = Dataset::builtin();
        let l211 = ds.group("L2(11)").unwrap();
        assert_eq!(
            l211.invariant_grams,
            vec![
                IntMatrix::from_i64(&[vec![2, 1, 0], vec![1, 6, 0], vec![0, 0, 22]]),
                IntMatrix::from_i64(&[vec![6, 2, 2], vec![2, 8, -3], vec![2, -3, 8]]),
            ]
        );
        let big = ds.group("3^4:A6").unwrap();
        assert_eq!(big.invariant_grams, vec![IntMatrix::from_i64(&[vec![6, 3, 0], vec![3, 6, 0], vec![0, 0, 6]])]);
        assert_eq!(big.symplectic_order, Some(29160));
    }

    #[test]
    fn asymmetric_gram_rejected() {
        let text = "group bad\ninvariant\n2 1 0\n0 2 0\n0 0 2\nend\nendgroup\n";
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("symmetry"), "{err}");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse("group g\ninvariant\n2 x 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(parse("nonsense\n").is_err());
        assert!(parse("group g\n").is_err());
        assert_eq!(parse("# only a comment\n").unwrap(), Dataset::default());
    }
}
