//! Integral lattices given by an exact Gram matrix over a fixed basis.
//!
//! # Basis order
//!
//! The K3 lattice `Λ_K3 = U ⊕ U ⊕ U ⊕ E8(−1) ⊕ E8(−1)` uses the ordered basis
//!
//! | index  | vector                         |
//! |--------|--------------------------------|
//! | 0, 1   | `e₁, f₁` (first hyperbolic plane)  |
//! | 2, 3   | `e₂, f₂`                        |
//! | 4, 5   | `e₃, f₃`                        |
//! | 6..=13 | simple roots `α₁..α₈` of the first `E8(−1)`  |
//! | 14..=21| simple roots `α₁..α₈` of the second `E8(−1)` |
//!
//! and `Λ(n) = Λ_K3 ⊕ ℤδ` appends `δ` at index 22 with `δ² = 2 − 2n`.
//! In each hyperbolic plane `e² = f² = 0`, `e·f = 1`. The `E8(−1)` block is
//! the negated Cartan matrix in Bourbaki order: diagonal `−2`, and `+1` on
//! the edges `α₁α₃, α₃α₄, α₄α₅, α₅α₆, α₆α₇, α₇α₈, α₂α₄`; see [`E8_NEGATIVE`].

mod isometry;

pub use isometry::{Isometry, Transvection, DEFAULT_ISOMETRY_BUDGET};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{smith_normal_form, IntMatrix};

/// Basis indices of `Λ(n)`.
pub mod basis {
    pub const E1: usize = 0;
    pub const F1: usize = 1;
    pub const E2: usize = 2;
    pub const F2: usize = 3;
    pub const E3: usize = 4;
    pub const F3: usize = 5;
    pub const E8_FIRST: usize = 6;
    pub const E8_SECOND: usize = 14;
    pub const DELTA: usize = 22;
}

pub const K3_RANK: usize = 22;
pub const LAMBDA_RANK: usize = 23;

/// Gram matrix of `E8(−1)`, Bourbaki order.
pub const E8_NEGATIVE: [[i64; 8]; 8] = [
    [-2, 0, 1, 0, 0, 0, 0, 0],
    [0, -2, 0, 1, 0, 0, 0, 0],
    [1, 0, -2, 1, 0, 0, 0, 0],
    [0, 1, 1, -2, 1, 0, 0, 0],
    [0, 0, 0, 1, -2, 1, 0, 0],
    [0, 0, 0, 0, 1, -2, 1, 0],
    [0, 0, 0, 0, 0, 1, -2, 1],
    [0, 0, 0, 0, 0, 0, 1, -2],
];

/// Integer coordinates in a lattice basis.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(#[serde(with = "crate::dec::ints")] Vec<BigInt>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.0[i] = BigInt::one();
        v
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigInt> {
        self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        gcd_all(self.0.iter())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LatticeVector(self.0.iter().map(|x| x * k).collect())
    }

    /// Sum of absolute values of the coordinates.
    pub fn l1(&self) -> BigInt {
        self.0.iter().map(|x| x.abs()).sum()
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.rank(), rhs.rank(), "lattice vector rank mismatch");
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        assert_eq!(self.rank(), rhs.rank(), "lattice vector rank mismatch");
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|x| -x).collect())
    }
}

impl Mul<&LatticeVector> for &BigInt {
    type Output = LatticeVector;
    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        rhs.scale(self)
    }
}

pub(crate) fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// A rational class `numerator / denominator`, normalized so that the
/// denominator is positive and coprime to the content of the numerator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalClass {
    numerator: LatticeVector,
    #[serde(with = "crate::dec::int")]
    denominator: BigInt,
}

impl RationalClass {
    pub fn new(numerator: LatticeVector, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let (mut num, mut den) = (numerator, denominator);
        if den.is_negative() {
            num = -&num;
            den = -den;
        }
        let g = num.content().gcd(&den);
        if !g.is_one() {
            num = LatticeVector(num.0.iter().map(|x| x / &g).collect());
            den /= &g;
        }
        Ok(RationalClass {
            numerator: num,
            denominator: den,
        })
    }

    pub fn integral(v: LatticeVector) -> Self {
        RationalClass {
            numerator: v,
            denominator: BigInt::one(),
        }
    }

    pub fn numerator(&self) -> &LatticeVector {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn rank(&self) -> usize {
        self.numerator.rank()
    }

    pub fn is_normalized(&self) -> bool {
        self.denominator.is_positive()
            && self.numerator.content().gcd(&self.denominator).is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.denominator.is_one()
    }

    pub fn neg(&self) -> Self {
        RationalClass {
            numerator: -&self.numerator,
            denominator: self.denominator.clone(),
        }
    }

    pub fn sub(&self, other: &RationalClass) -> Result<Self> {
        if self.rank() != other.rank() {
            return Err(Error::InvalidArgument(format!(
                "rational classes of rank {} and {}",
                self.rank(),
                other.rank()
            )));
        }
        let num = &self.numerator.scale(&other.denominator)
            - &other.numerator.scale(&self.denominator);
        RationalClass::new(num, &self.denominator * &other.denominator)
    }
}

/// Nontrivial invariant factors `d₁ | d₂ | …` of `L^∨ / L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscriminantData {
    pub invariant_factors: Vec<BigInt>,
}

impl DiscriminantData {
    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }
}

/// A nondegenerate integral lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramLattice {
    gram: IntMatrix,
    label: String,
}

impl GramLattice {
    pub fn new(gram: IntMatrix, label: impl Into<String>) -> Result<Self> {
        if !gram.is_square() || gram.rows() == 0 {
            return Err(Error::InvalidArgument("Gram matrix must be square and nonempty".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidArgument("Gram matrix must be symmetric".into()));
        }
        if gram.determinant().is_zero() {
            return Err(Error::InvalidArgument("Gram matrix is degenerate".into()));
        }
        Ok(GramLattice {
            gram,
            label: label.into(),
        })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.determinant()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    pub fn basis_vector(&self, i: usize) -> LatticeVector {
        LatticeVector::basis(self.rank(), i)
    }

    pub fn vector(&self, coords: &[i64]) -> Result<LatticeVector> {
        let v = LatticeVector::from_i64s(coords);
        self.check_rank(&v)?;
        Ok(v)
    }

    pub(crate) fn check_rank(&self, v: &LatticeVector) -> Result<()> {
        if v.rank() != self.rank() {
            return Err(Error::InvalidArgument(format!(
                "vector of rank {} used in lattice {} of rank {}",
                v.rank(),
                self.label,
                self.rank()
            )));
        }
        Ok(())
    }

    /// `G·v`: the pairings of `v` with every basis vector.
    pub fn pairings(&self, v: &LatticeVector) -> Result<Vec<BigInt>> {
        self.check_rank(v)?;
        Ok(self.gram.mul_vec(v.coords()))
    }

    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> Result<BigInt> {
        self.check_rank(w)?;
        let gv = self.pairings(v)?;
        Ok(gv.iter().zip(w.coords()).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self, v: &LatticeVector) -> Result<BigInt> {
        self.pair(v, v)
    }

    /// Positive generator of `{(v, μ) : μ ∈ L}`.
    pub fn divisibility(&self, v: &LatticeVector) -> Result<BigInt> {
        if v.is_zero() {
            return Err(Error::InvalidArgument("divisibility of the zero vector".into()));
        }
        Ok(gcd_all(self.pairings(v)?.iter()))
    }

    pub fn is_primitive(&self, v: &LatticeVector) -> Result<bool> {
        self.check_rank(v)?;
        if v.is_zero() {
            return Err(Error::InvalidArgument("primitivity of the zero vector".into()));
        }
        Ok(v.content().is_one())
    }

    pub fn discriminant_group(&self) -> DiscriminantData {
        discriminant_group(&self.gram).expect("GramLattice is nondegenerate")
    }
}

/// Invariant factors of `coker(gram)`, dropping factors equal to one.
pub fn discriminant_group(gram: &IntMatrix) -> Result<DiscriminantData> {
    if !gram.is_square() {
        return Err(Error::InvalidArgument("Gram matrix must be square".into()));
    }
    let snf = smith_normal_form(gram);
    let factors = snf.invariant_factors();
    if factors.len() < gram.rows() {
        return Err(Error::InvalidArgument("Gram matrix is degenerate".into()));
    }
    Ok(DiscriminantData {
        invariant_factors: factors.into_iter().filter(|d| !d.is_one()).collect(),
    })
}

fn block_diagonal(blocks: &[IntMatrix]) -> IntMatrix {
    let n = blocks.iter().map(IntMatrix::rows).sum();
    let mut g = IntMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                g[(off + i, off + j)] = b[(i, j)].clone();
            }
        }
        off += b.rows();
    }
    g
}

fn u_gram() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]).unwrap()
}

fn e8_gram() -> IntMatrix {
    let rows: Vec<&[i64]> = E8_NEGATIVE.iter().map(|r| r.as_slice()).collect();
    IntMatrix::from_i64_rows(&rows).unwrap()
}

/// The hyperbolic plane `U`.
pub fn hyperbolic_plane() -> GramLattice {
    GramLattice::new(u_gram(), "U").unwrap()
}

/// `U ⊕ U`, the smallest lattice on which [`Isometry::between`] operates.
pub fn hyperbolic_planes(count: usize) -> GramLattice {
    let blocks = vec![u_gram(); count];
    GramLattice::new(block_diagonal(&blocks), format!("U^{count}")).unwrap()
}

/// The negative definite `E8(−1)`.
pub fn e8_negative() -> GramLattice {
    GramLattice::new(e8_gram(), "E8(-1)").unwrap()
}

fn k3_blocks() -> Vec<IntMatrix> {
    vec![u_gram(), u_gram(), u_gram(), e8_gram(), e8_gram()]
}

/// The unimodular K3 lattice `U³ ⊕ E8(−1)²` of rank 22.
pub fn build_lambda_k3() -> GramLattice {
    GramLattice::new(block_diagonal(&k3_blocks()), "Lambda_K3").unwrap()
}

/// `Λ(n) = Λ_K3 ⊕ ℤδ` with `δ² = 2 − 2n`, rank 23.
pub fn build_lambda(n: u32) -> Result<GramLattice> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n}, expected n >= 2")));
    }
    let mut blocks = k3_blocks();
    let delta2 = BigInt::from(2) - BigInt::from(2) * BigInt::from(n);
    blocks.push(IntMatrix::from_rows(vec![vec![delta2]]).unwrap());
    GramLattice::new(block_diagonal(&blocks), format!("Lambda({n})"))
}

/// Whether `q ∈ span_ℚ(span) + L`.
///
/// Decided exactly: with `U·M·V = D` the Smith form of the matrix whose
/// columns are `span`, the class lies in the sum iff the coordinates of
/// `U·numerator` past the rank of `M` are divisible by the denominator.
pub fn in_span_plus_lattice(q: &RationalClass, span: &[LatticeVector]) -> Result<bool> {
    let r = q.rank();
    if let Some(bad) = span.iter().find(|s| s.rank() != r) {
        return Err(Error::InvalidArgument(format!(
            "span vector of rank {} against class of rank {r}",
            bad.rank()
        )));
    }
    if q.is_integral() {
        return Ok(true);
    }
    let cols: Vec<Vec<BigInt>> = span.iter().map(|s| s.coords().to_vec()).collect();
    let m = IntMatrix::from_columns(&cols, r);
    let snf = smith_normal_form(&m);
    let rank = snf.rank();
    let image = snf.u.mul_vec(q.numerator().coords());
    Ok(image[rank..]
        .iter()
        .all(|c| c.is_multiple_of(q.denominator())))
}
