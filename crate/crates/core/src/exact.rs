//! Exact integer and rational linear algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) and
//! rationals ([`BigRational`]); there is no floating point and no fixed-width
//! arithmetic on matrix entries.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Dense row-major matrix of rationals, always kept in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

/// Result of [`smith_normal_form`]: `u * a * v == s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries `d_1 | d_2 | ...` of `s`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let n = self.s.rows.min(self.s.cols);
        (0..n)
            .map(|i| self.s[(i, i)].clone())
            .filter(|d| !d.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Floor of `a / b` for rationals.
pub fn rat_floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn rat_ceil(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Nearest integer, ties rounded towards +inf.
pub fn rat_round(x: &BigRational) -> BigInt {
    rat_floor(&(x + rat(1, 2)))
}

/// Largest `s` with `s*s <= n` for `n >= 0`.
pub fn isqrt(n: &BigInt) -> BigInt {
    if n.is_negative() {
        return BigInt::zero();
    }
    n.sqrt()
}

pub fn gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(xs: I) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Builds a matrix from rows of machine integers. Panics on ragged input.
    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix literal");
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<BigInt>]) -> Result<Self> {
        Ok(Self::from_rows(cols.to_vec())?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.cols != v.len() {
            return Err(Error::Dimension("matrix-vector length mismatch".into()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.rows != v.len() {
            return Err(Error::Dimension("vector-matrix length mismatch".into()));
        }
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += vi * &self[(i, j)];
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &IntMatrix, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Result<IntMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn neg(&self) -> IntMatrix {
        self.scale(&-BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    pub fn trace(&self) -> BigInt {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    /// `selfᵀ · g · self`.
    pub fn congruence(&self, g: &IntMatrix) -> Result<IntMatrix> {
        self.transpose().mul(&g.mul(self)?)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn hstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension("hstack row mismatch".into()));
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        Ok(m)
    }

    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.cols && self.rows != 0 && other.rows != 0 {
            return Err(Error::Dimension("vstack column mismatch".into()));
        }
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMatrix { rows: self.rows + other.rows, cols, data })
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        IntMatrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = v;
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(p) => {
                        m.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)]) / &prev;
                    m[(i, j)] = v;
                }
            }
            prev = m[(k, k)].clone();
        }
        Ok(sign * m[(n - 1, n - 1)].clone())
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }

    /// Largest absolute entry, for diagnostics.
    pub fn max_abs(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    /// Converts to machine integers if every entry fits.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_i64()).collect()).collect()
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        self.to_rat()
            .inverse()?
            .to_int()
            .ok_or_else(|| Error::InvalidArgument("matrix is not unimodular".into()))
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension("rational product shape mismatch".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(i, j)] += p;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if self.cols != v.len() {
            return Err(Error::Dimension("matrix-vector length mismatch".into()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<RatMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a[(r, c)].is_zero()).ok_or(Error::Degenerate)?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let piv = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = &a[(c, j)] / &piv;
                inv[(c, j)] = &inv[(c, j)] / &piv;
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    let da = &f * &a[(c, j)];
                    a[(r, j)] -= da;
                    let di = &f * &inv[(c, j)];
                    inv[(r, j)] -= di;
                }
            }
        }
        Ok(inv)
    }

    pub fn to_int(&self) -> Option<IntMatrix> {
        let data: Option<Vec<BigInt>> =
            self.data.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect();
        data.map(|data| IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", row.join(","))?;
        }
        write!(f, "]")
    }
}

/// Smith normal form with minimum-absolute-entry pivoting.
///
/// Returns unimodular `u`, `v` and diagonal `s` with `u·a·v = s`, nonnegative
/// diagonal and `s[i][i] | s[i+1][i+1]`.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (r, c) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);

    for t in 0..r.min(c) {
        loop {
            // pivot: smallest nonzero |entry| in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let e = &m[(i, j)];
                    if e.is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| e.abs() < m[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_snf(m, u, v);
            };
            m.swap_rows(t, pi);
            u.swap_rows(t, pi);
            m.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..r {
                if m[(i, t)].is_zero() {
                    continue;
                }
                let q = m[(i, t)].div_floor(&m[(t, t)]);
                let nq = -q;
                m.add_row_multiple(i, t, &nq);
                u.add_row_multiple(i, t, &nq);
                if !m[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                if m[(t, j)].is_zero() {
                    continue;
                }
                let q = m[(t, j)].div_floor(&m[(t, t)]);
                let nq = -q;
                m.add_col_multiple(j, t, &nq);
                v.add_col_multiple(j, t, &nq);
                if !m[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility condition on the trailing block
            let piv = m[(t, t)].clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !m[(i, j)].is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    m.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if m[(t, t)].is_negative() {
            m.negate_row(t);
            u.negate_row(t);
        }
    }
    finish_snf(m, u, v)
}

fn finish_snf(mut m: IntMatrix, mut u: IntMatrix, v: IntMatrix) -> SmithForm {
    for t in 0..m.rows.min(m.cols) {
        if m[(t, t)].is_negative() {
            m.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { s: m, u, v }
}

/// Row-style Hermite normal form of the row span: returns a basis (as rows) of
/// the Z-module generated by the rows of `a`, in echelon form with positive
/// pivots and reduced entries above pivots.
pub fn hermite_row_basis(a: &IntMatrix) -> IntMatrix {
    let (r, c) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut pivot_row = 0;
    for col in 0..c {
        if pivot_row == r {
            break;
        }
        loop {
            let best = (pivot_row..r)
                .filter(|&i| !m[(i, col)].is_zero())
                .min_by(|&x, &y| m[(x, col)].abs().cmp(&m[(y, col)].abs()));
            let Some(p) = best else { break };
            m.swap_rows(pivot_row, p);
            let mut done = true;
            for i in pivot_row + 1..r {
                if m[(i, col)].is_zero() {
                    continue;
                }
                let q = -m[(i, col)].div_floor(&m[(pivot_row, col)]);
                m.add_row_multiple(i, pivot_row, &q);
                if !m[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if m[(pivot_row, col)].is_zero() {
            continue;
        }
        if m[(pivot_row, col)].is_negative() {
            m.negate_row(pivot_row);
        }
        let piv = m[(pivot_row, col)].clone();
        for i in 0..pivot_row {
            let q = -m[(i, col)].div_floor(&piv);
            m.add_row_multiple(i, pivot_row, &q);
        }
        pivot_row += 1;
    }
    m.select_rows(&(0..pivot_row).collect::<Vec<_>>())
}

/// Basis (as rows) of the left kernel `{v ∈ Zⁿ : v·a = 0}`; the basis is saturated.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let idx: Vec<usize> = (rank..a.rows).collect();
    let mut k = snf.u.select_rows(&idx);
    if k.rows == 0 {
        k.cols = a.rows;
    }
    k
}

/// Basis of `(span_Q rows) ∩ Zⁿ`, i.e. the primitive closure of the row span.
pub fn saturate_rows(rows: &IntMatrix) -> IntMatrix {
    if rows.rows == 0 {
        return rows.clone();
    }
    let perp = integer_kernel(&rows.transpose());
    if perp.rows == 0 {
        return IntMatrix::identity(rows.cols);
    }
    integer_kernel(&perp.transpose())
}

/// Rank over Q.
pub fn rank(a: &IntMatrix) -> usize {
    smith_normal_form(a).rank()
}

/// Signature `(pos, neg)` of a symmetric nondegenerate integer matrix, by exact
/// congruence diagonalization over Q.
pub fn signature(g: &IntMatrix) -> Result<(usize, usize)> {
    if let Some((row, col)) = g.first_asymmetry() {
        return Err(Error::NotSymmetric { row, col });
    }
    let n = g.rows;
    let mut a = g.to_rat();
    let (mut pos, mut neg) = (0usize, 0usize);
    for k in 0..n {
        if a[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                sym_swap(&mut a, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                // e_k <- e_k + e_j makes the diagonal 2 a_kj (a_jj = a_kk = 0)
                sym_add(&mut a, k, j);
            } else {
                return Err(Error::Degenerate);
            }
        }
        let piv = a[(k, k)].clone();
        if piv.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = &a[(i, k)] / &piv;
            for j in k..n {
                let d = &f * &a[(k, j)];
                a[(i, j)] -= d;
            }
            for j in k..n {
                let d = &f * &a[(j, k)];
                a[(j, i)] -= d;
            }
        }
    }
    Ok((pos, neg))
}

fn sym_swap(a: &mut RatMatrix, x: usize, y: usize) {
    let n = a.rows;
    for j in 0..n {
        a.data.swap(x * n + j, y * n + j);
    }
    for i in 0..n {
        a.data.swap(i * n + x, i * n + y);
    }
}

fn sym_add(a: &mut RatMatrix, dst: usize, src: usize) {
    let n = a.rows;
    for j in 0..n {
        let v = a[(src, j)].clone();
        a[(dst, j)] += v;
    }
    for i in 0..n {
        let v = a[(i, src)].clone();
        a[(i, dst)] += v;
    }
}

/// Gram-Schmidt data of a positive definite Gram matrix: `mu[i][j]` for
/// `j < i` and the squared lengths `b[i]` of the orthogonalized vectors.
#[derive(Clone, Debug)]
pub struct GramSchmidt {
    pub mu: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
}

pub fn gram_schmidt(g: &IntMatrix) -> GramSchmidt {
    let n = g.rows;
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = BigRational::from_integer(g[(i, j)].clone());
            for l in 0..j {
                s -= &mu[j][l] * &mu[i][l] * &b[l];
            }
            mu[i][j] = if b[j].is_zero() { BigRational::zero() } else { s / &b[j] };
        }
        let mut s = BigRational::from_integer(g[(i, i)].clone());
        for l in 0..i {
            s -= &mu[i][l] * &mu[i][l] * &b[l];
        }
        b[i] = s;
    }
    GramSchmidt { mu, b }
}

/// LLL reduction (δ = 3/4) of a positive definite Gram matrix.
///
/// Returns `t` unimodular such that `tᵀ·g·t` is LLL-reduced; the columns of
/// `t` are the reduced basis vectors in the original coordinates.
pub fn lll_gram(g: &IntMatrix) -> Result<IntMatrix> {
    let n = g.rows;
    let mut gram = g.clone();
    let mut t = IntMatrix::identity(n);
    if n <= 1 {
        return Ok(t);
    }
    let delta = rat(3, 4);
    let mut gs = gram_schmidt(&gram);
    if gs.b.iter().any(|x| !x.is_positive()) {
        return Err(Error::NotDefinite);
    }
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = rat_round(&gs.mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let nq = -&q;
            // b_k <- b_k - q b_j
            t.add_col_multiple(k, j, &nq);
            gram.add_col_multiple(k, j, &nq);
            gram.add_row_multiple(k, j, &nq);
            let qr = BigRational::from_integer(q);
            for l in 0..j {
                let d = &qr * &gs.mu[j][l];
                gs.mu[k][l] -= d;
            }
            gs.mu[k][j] -= &qr;
        }
        let lhs = gs.b[k].clone();
        let rhs = (&delta - &gs.mu[k][k - 1] * &gs.mu[k][k - 1]) * &gs.b[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            t.swap_cols(k, k - 1);
            gram.swap_cols(k, k - 1);
            gram.swap_rows(k, k - 1);
            gs = gram_schmidt(&gram);
            k = (k - 1).max(1);
        }
    }
    Ok(t)
}

/// Solves `a·x = b` over Q; `None` if inconsistent or not uniquely solvable.
pub fn solve_rational(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let (r, c) = (a.rows, a.cols);
    if b.len() != r {
        return None;
    }
    let mut m: Vec<Vec<BigRational>> = (0..r)
        .map(|i| {
            let mut row: Vec<BigRational> = a.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    let mut pivots = Vec::with_capacity(c);
    let mut pr = 0;
    for col in 0..c {
        let Some(p) = (pr..r).find(|&i| !m[i][col].is_zero()) else {
            return None;
        };
        m.swap(pr, p);
        let inv = m[pr][col].recip();
        for x in m[pr].iter_mut() {
            *x *= &inv;
        }
        for i in 0..r {
            if i != pr && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..=c {
                    let d = &f * &m[pr][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(pr);
        pr += 1;
    }
    if (pr..r).any(|i| !m[i][c].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&i| m[i][c].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn snf_identity() {
        let snf = smith_normal_form(&IntMatrix::identity(3));
        assert!(snf.s.is_identity());
        assert!(snf.u.is_identity());
        assert!(snf.v.is_identity());
    }

    #[test]
    fn snf_small_examples() {
        let a = m(&[&[6, 3], &[3, 6]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.invariant_factors(), vec![int(3), int(9)]);
        assert_eq!(snf.u.mul(&a).unwrap().mul(&snf.v).unwrap(), snf.s);
        let b = m(&[&[2, 1], &[1, 6]]);
        assert_eq!(smith_normal_form(&b).invariant_factors(), vec![int(1), int(11)]);
    }

    #[test]
    fn snf_rectangular_and_singular() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.invariant_factors(), vec![int(2), int(6), int(12)]);
        let z = m(&[&[0, 0], &[0, 0], &[0, 0]]);
        assert_eq!(smith_normal_form(&z).rank(), 0);
        let r = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let snf = smith_normal_form(&r);
        assert_eq!(snf.invariant_factors(), vec![int(1)]);
        assert_eq!(snf.u.mul(&r).unwrap().mul(&snf.v).unwrap(), snf.s);
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&m(&[&[6, 0, 0], &[0, 6, 0], &[0, 0, 6]])).unwrap(), (3, 0));
        assert_eq!(signature(&m(&[&[0, 1], &[1, 0]])).unwrap(), (1, 1));
        assert_eq!(signature(&m(&[&[1, 1], &[1, 1]])), Err(Error::Degenerate));
        assert!(matches!(signature(&m(&[&[1, 2], &[0, 1]])), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(integer_kernel(&IntMatrix::identity(3)).rows(), 0);
        let k = integer_kernel(&m(&[&[2], &[4]]));
        assert_eq!(k.rows(), 1);
        let row = k.row(0);
        assert!(row == [int(2), int(-1)] || row == [int(-2), int(1)]);
        assert_eq!(integer_kernel(&IntMatrix::zeros(2, 2)).rows(), 2);
    }

    #[test]
    fn determinant_bareiss() {
        assert_eq!(m(&[&[2, 1], &[1, 6]]).det().unwrap(), int(11));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det().unwrap(), int(-1));
        assert_eq!(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).det().unwrap(), int(0));
        assert_eq!(m(&[&[0, 2, 1], &[3, 0, 0], &[1, 1, 5]]).det().unwrap(), int(-27));
    }

    #[test]
    fn hermite_basis_spans() {
        let a = m(&[&[2, 0], &[0, 2], &[1, 1]]);
        let h = hermite_row_basis(&a);
        assert_eq!(h, m(&[&[1, 1], &[0, 2]]));
    }

    #[test]
    fn saturation_of_scaled_vector() {
        let s = saturate_rows(&m(&[&[2, 4, 6]]));
        assert_eq!(s.rows(), 1);
        let g = gcd_all(s.row(0));
        assert_eq!(g, int(1));
    }

    #[test]
    fn lll_reduces_skewed_basis() {
        let g = m(&[&[2, 1], &[1, 2]]);
        let p = m(&[&[1, 7], &[0, 1]]);
        let skew = p.congruence(&g).unwrap();
        let t = lll_gram(&skew).unwrap();
        let red = t.congruence(&skew).unwrap();
        assert_eq!(red[(0, 0)], int(2));
        assert_eq!(red[(1, 1)], int(2));
        assert_eq!(t.det().unwrap().abs(), int(1));
    }

    #[test]
    fn rational_inverse() {
        let a = m(&[&[2, 1], &[1, 6]]).to_rat();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), RatMatrix::identity(2));
        assert_eq!(inv[(0, 0)], rat(6, 11));
    }
}
