//! Exact rational linear algebra: row reduction, kernels, subspaces and
//! orthogonal projection onto a span.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows of length `cols`.
    ///
    /// # Panics
    /// If a row has the wrong length.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rational>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix row");
            data.extend(row);
        }
        Self {
            rows: n,
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged matrix column");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
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

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
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
        out
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// In-place reduction of a list of rows to reduced row echelon form.
/// Returns the pivot columns; zero rows end up at the bottom.
fn rref_rows(rows: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Canonical reduced row echelon form and pivot columns.
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut rows = m.to_rows();
    let pivots = rref_rows(&mut rows, m.cols);
    (RationalMatrix::from_rows(m.cols, rows), pivots)
}

/// A linear subspace stored as its canonical RREF basis, so equal subspaces
/// compare (and hash) equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubspaceBasis {
    ambient: usize,
    #[serde(with = "basis_serde")]
    rows: Vec<Vec<Rational>>,
}

mod basis_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let text: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let text: Vec<Vec<String>> = Vec::deserialize(d)?;
        text.into_iter()
            .map(|r| {
                r.iter()
                    .map(|v| crate::rational::parse_rational(v).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

impl SubspaceBasis {
    /// The span of `vectors` in dimension `ambient`.
    pub fn span(ambient: usize, vectors: &[Vec<Rational>]) -> Self {
        let mut rows: Vec<Vec<Rational>> = vectors.to_vec();
        for v in &rows {
            assert_eq!(v.len(), ambient, "vector outside ambient space");
        }
        let rank = rref_rows(&mut rows, ambient).len();
        rows.truncate(rank);
        Self { ambient, rows }
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            rows: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            rows: RationalMatrix::identity(ambient).to_rows(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let mut rest = v.to_vec();
        for row in &self.rows {
            let p = row.iter().position(|x| !x.is_zero()).expect("basis row is nonzero");
            if rest[p].is_zero() {
                continue;
            }
            let factor = rest[p].clone();
            for (x, y) in rest.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
        }
        is_zero_vector(&rest)
    }
}

impl fmt::Debug for SubspaceBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span(ambient={})[", self.ambient)?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let text: Vec<String> = row.iter().map(format_rational).collect();
            write!(f, "({})", text.join(","))?;
        }
        f.write_str("]")
    }
}

/// `{v : m·v = 0}` in canonical form.
pub fn kernel_basis(m: &RationalMatrix) -> SubspaceBasis {
    let (r, pivots) = rref(m);
    let n = m.cols();
    let mut vectors = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); n];
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[(i, free)].clone();
        }
        vectors.push(v);
    }
    SubspaceBasis::span(n, &vectors)
}

/// Whether `b ⊆ a`.
pub fn subspace_contains(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<bool, LinalgError> {
    if a.ambient != b.ambient {
        return Err(LinalgError::DimensionMismatch {
            left: a.ambient,
            right: b.ambient,
        });
    }
    Ok(b.rows.iter().all(|v| a.contains_vector(v)))
}

/// Greedy maximal independent subset, in input order. Returns indices.
pub fn independent_subset(ambient: usize, vectors: &[Vec<Rational>]) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut basis = SubspaceBasis::zero(ambient);
    for (i, v) in vectors.iter().enumerate() {
        if !basis.contains_vector(v) {
            chosen.push(i);
            let mut rows = basis.rows.clone();
            rows.push(v.clone());
            basis = SubspaceBasis::span(ambient, &rows);
        }
    }
    chosen
}

/// Solves `m·x = b`; returns one solution if the system is consistent.
pub fn solve(m: &RationalMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(b.len(), m.rows(), "right-hand side length mismatch");
    let n = m.cols();
    let mut rows: Vec<Vec<Rational>> = (0..m.rows())
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.push(b[i].clone());
            row
        })
        .collect();
    let pivots = rref_rows(&mut rows, n + 1);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = rows[i][n].clone();
    }
    Some(x)
}

pub fn inverse(m: &RationalMatrix) -> Option<RationalMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return None;
    }
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let pivots = rref_rows(&mut rows, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(RationalMatrix::from_rows(
        n,
        rows.into_iter().map(|r| r[n..].to_vec()).collect(),
    ))
}

/// Exact orthogonal projection of `target` onto `span(vectors)`, via the
/// normal equations of a basis of the span.
pub fn project_onto_span(vectors: &[Vec<Rational>], target: &[Rational]) -> Vec<Rational> {
    let n = target.len();
    let basis = SubspaceBasis::span(n, vectors);
    let k = basis.dim();
    if k == 0 {
        return vec![Rational::zero(); n];
    }
    let b = &basis.rows;
    let mut gram = RationalMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let g = dot(&b[i], &b[j]);
            gram[(j, i)] = g.clone();
            gram[(i, j)] = g;
        }
    }
    let rhs: Vec<Rational> = b.iter().map(|row| dot(row, target)).collect();
    let coeffs = solve(&gram, &rhs).expect("Gram matrix of a basis is invertible");
    let mut out = vec![Rational::zero(); n];
    for (c, row) in coeffs.iter().zip(b) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += c * v;
        }
    }
    out
}
