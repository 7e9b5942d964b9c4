//! Dense matrices over arbitrary-precision integers.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dec;

/// Row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Option<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return None;
        }
        Some(IntMatrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Option<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<BigInt>], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[BigInt]) {
        for (i, x) in col.iter().enumerate() {
            self[(i, j)] = x.clone();
        }
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

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    /// Matrix product; panics on shape mismatch.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
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

    /// Matrix-vector product; panics on shape mismatch.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                    a[(i, j)] = v / &prev;
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    pub(crate) fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    pub(crate) fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[dst] += k * row[src]
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for c in 0..self.cols {
            let v = &self[(src, c)] * k;
            self[(dst, c)] += v;
        }
    }

    /// col[dst] += k * col[src]
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for r in 0..self.rows {
            let v = &self[(r, src)] * k;
            self[(r, dst)] += v;
        }
    }

    pub(crate) fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -&self[(i, c)];
            self[(i, c)] = v;
        }
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
        f.debug_list()
            .entries((0..self.rows).map(|i| {
                self.row(i)
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<dec::Dec>> = (0..self.rows)
            .map(|i| self.row(i).iter().cloned().map(dec::Dec).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<dec::Dec>> = Vec::deserialize(d)?;
        IntMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| x.0).collect())
                .collect(),
        )
        .ok_or_else(|| D::Error::custom("ragged matrix rows"))
    }
}

/// Result of a Smith normal form computation: `u * m * v == d`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Nonzero diagonal entries, in order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .take_while(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form with unimodular transforms.
///
/// Returns `U`, `D`, `V` with `U·M·V = D`, `D` diagonal with nonnegative
/// entries `d₁ | d₂ | …` (zeros last), and `U`, `V` invertible over ℤ.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (nr, nc) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut u = IntMatrix::identity(nr);
    let mut v = IntMatrix::identity(nc);

    'outer: for k in 0..nr.min(nc) {
        loop {
            let Some((pi, pj)) = min_nonzero(&a, k) else {
                break 'outer;
            };
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            a.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let mut clean = true;
            for i in k + 1..nr {
                let q = a[(i, k)].div_floor(&a[(k, k)]);
                if !q.is_zero() {
                    let nq = -q;
                    a.add_row_multiple(i, k, &nq);
                    u.add_row_multiple(i, k, &nq);
                }
                clean &= a[(i, k)].is_zero();
            }
            for j in k + 1..nc {
                let q = a[(k, j)].div_floor(&a[(k, k)]);
                if !q.is_zero() {
                    let nq = -q;
                    a.add_col_multiple(j, k, &nq);
                    v.add_col_multiple(j, k, &nq);
                }
                clean &= a[(k, j)].is_zero();
            }
            if !clean {
                continue;
            }

            let pivot = a[(k, k)].clone();
            let offender = (k + 1..nr)
                .find(|&i| (k + 1..nc).any(|j| !a[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(k, i, &one);
                    u.add_row_multiple(k, i, &one);
                }
                None => break,
            }
        }
        if a[(k, k)].is_negative() {
            a.negate_row(k);
            u.negate_row(k);
        }
    }
    Smith { u, d: a, v }
}

fn min_nonzero(a: &IntMatrix, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in k..a.rows() {
        for j in k..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Integer solution of `m · x = b`, if one exists.
pub fn solve_integer(m: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(m.rows(), b.len(), "matrix shape mismatch");
    let snf = smith_normal_form(m);
    let ub = snf.u.mul_vec(b);
    let factors = snf.invariant_factors();
    let mut y = vec![BigInt::zero(); m.cols()];
    for (i, c) in ub.iter().enumerate() {
        match factors.get(i) {
            Some(f) => {
                if !c.is_multiple_of(f) {
                    return None;
                }
                y[i] = c / f;
            }
            None if !c.is_zero() => return None,
            None => {}
        }
    }
    Some(snf.v.mul_vec(&y))
}

/// A ℤ-basis of the integer kernel `{x : m·x = 0}`.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(m);
    (snf.rank()..m.cols()).map(|j| snf.v.column(j)).collect()
}

/// Whether a square integer matrix is invertible over ℤ.
pub fn is_unimodular(m: &IntMatrix) -> bool {
    m.is_square() && m.determinant().abs().is_one()
}

/// Inertia `(positive, negative, zero)` of a symmetric integer matrix.
///
/// Symmetric elimination with integer-scaled congruences; each step is an
/// invertible real congruence, so Sylvester's law preserves the counts.
pub fn signature(m: &IntMatrix) -> (usize, usize, usize) {
    assert!(m.is_symmetric(), "signature of a non-symmetric matrix");
    let n = m.rows();
    let mut a = m.clone();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[(k, k)].is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[(j, j)].is_zero()) {
                a.swap_rows(k, j);
                a.swap_cols(k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| !a[(k, j)].is_zero()) {
                // row/col k += row/col j makes the pivot 2·a[k][j].
                let one = BigInt::one();
                a.add_row_multiple(k, j, &one);
                a.add_col_multiple(k, j, &one);
            } else {
                continue;
            }
        }
        let p = a[(k, k)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let c = a[(i, k)].clone();
            if c.is_zero() {
                continue;
            }
            // row_i ← p·row_i − c·row_k, then the same on columns.
            for t in 0..n {
                let v = &a[(i, t)] * &p - &a[(k, t)] * &c;
                a[(i, t)] = v;
            }
            for t in 0..n {
                let v = &a[(t, i)] * &p - &a[(t, k)] * &c;
                a[(t, i)] = v;
            }
        }
    }
    (pos, neg, n - pos - neg)
}
