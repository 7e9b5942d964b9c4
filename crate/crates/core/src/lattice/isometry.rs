//! Isometries, Eichler transvections, and transvection-built isometries
//! between primitive vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::basis::{E1, E2, F1, F2};
use super::{GramLattice, LatticeVector, RationalClass};
use crate::error::{Error, Result};
use crate::matrix::{smith_normal_form, IntMatrix};

/// Default number of transvections allowed per reduction.
pub const DEFAULT_ISOMETRY_BUDGET: u64 = 10_000;

/// An integer matrix `S` acting on coordinate columns with `Sᵀ·G·S = G`.
///
/// Values built through [`Isometry::new`] are checked; deserialized values
/// are not, and must go through [`Isometry::check`] before being trusted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Isometry {
    matrix: IntMatrix,
}

impl Isometry {
    pub fn identity(lattice: &GramLattice) -> Self {
        Isometry {
            matrix: IntMatrix::identity(lattice.rank()),
        }
    }

    pub fn new(lattice: &GramLattice, matrix: IntMatrix) -> Result<Self> {
        let iso = Isometry { matrix };
        iso.check(lattice)?;
        Ok(iso)
    }

    /// Wraps a matrix without checking it.
    pub fn unchecked(matrix: IntMatrix) -> Self {
        Isometry { matrix }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn preserves_gram(&self, lattice: &GramLattice) -> bool {
        let m = &self.matrix;
        m.rows() == lattice.rank()
            && m.is_square()
            && &m.transpose().mul(lattice.gram()).mul(m) == lattice.gram()
    }

    pub fn determinant(&self) -> BigInt {
        self.matrix.determinant()
    }

    pub fn check(&self, lattice: &GramLattice) -> Result<()> {
        if !self.preserves_gram(lattice) {
            return Err(Error::InvariantViolated(
                "matrix does not preserve the Gram matrix".into(),
            ));
        }
        if !self.determinant().abs().is_one() {
            return Err(Error::InvariantViolated("isometry determinant is not ±1".into()));
        }
        Ok(())
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector::new(self.matrix.mul_vec(v.coords()))
    }

    pub fn apply_rational(&self, q: &RationalClass) -> RationalClass {
        RationalClass::new(self.apply(q.numerator()), q.denominator().clone())
            .expect("denominator stays positive")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    /// Whether `σ` acts as the identity on `L^∨/L`.
    ///
    /// With `U·G·V = D`, `G⁻¹ = V·D⁻¹·U`, so `(σ − 1)·G⁻¹` is integral iff
    /// column `j` of `(σ − 1)·V` is divisible by `d_j`.
    pub fn acts_trivially_on_discriminant(&self, lattice: &GramLattice) -> bool {
        let n = lattice.rank();
        let snf = smith_normal_form(lattice.gram());
        let mut diff = self.matrix.clone();
        for i in 0..n {
            diff[(i, i)] -= BigInt::one();
        }
        let w = diff.mul(&snf.v);
        (0..n).all(|j| {
            let dj = &snf.d[(j, j)];
            dj.is_one() || (0..n).all(|i| w[(i, j)].is_multiple_of(dj))
        })
    }

    /// A transvection-generated isometry with `σ(v) = w`.
    ///
    /// Both vectors are reduced to the form `e₁ + (v²/2)·f₁` by Eichler
    /// transvections supported on the first two hyperbolic planes; the
    /// result is the second reduction inverted after the first. Requires
    /// `v`, `w` primitive of divisibility one with equal norms, and a
    /// lattice that is even and whose first four basis vectors span
    /// `U ⊕ U` orthogonally to the rest.
    pub fn between(
        lattice: &GramLattice,
        v: &LatticeVector,
        w: &LatticeVector,
        budget: u64,
    ) -> Result<Isometry> {
        check_two_planes(lattice)?;
        for (name, x) in [("source", v), ("target", w)] {
            if x.is_zero() || !lattice.is_primitive(x)? {
                return Err(Error::NoIsometryAttempted(format!("{name} is not primitive")));
            }
        }
        let (nv, nw) = (lattice.norm(v)?, lattice.norm(w)?);
        if nv != nw {
            return Err(Error::NoIsometryAttempted(format!(
                "norm mismatch: {nv} vs {nw}"
            )));
        }
        let (dv, dw) = (lattice.divisibility(v)?, lattice.divisibility(w)?);
        if !dv.is_one() || !dw.is_one() {
            return Err(Error::NoIsometryAttempted(format!(
                "divisibility {dv} and {dw}; only divisibility 1 is supported"
            )));
        }

        let mut steps = 0u64;
        let to_canonical_v = Reducer::new(lattice, v, budget, &mut steps).run()?;
        let to_canonical_w = Reducer::new(lattice, w, budget, &mut steps).run()?;

        let mut sigma = IntMatrix::identity(lattice.rank());
        for t in &to_canonical_v {
            t.apply_columns(&mut sigma);
        }
        for t in to_canonical_w.iter().rev() {
            t.inverse().apply_columns(&mut sigma);
        }
        let sigma = Isometry::new(lattice, sigma)?;
        if &sigma.apply(v) != w {
            return Err(Error::InvariantViolated(
                "composed transvections do not map source to target".into(),
            ));
        }
        Ok(sigma)
    }
}

fn check_two_planes(lattice: &GramLattice) -> Result<()> {
    let n = lattice.rank();
    if n < 4 || !lattice.is_even() {
        return Err(Error::InvalidArgument(
            "isometry construction needs an even lattice containing U ⊕ U".into(),
        ));
    }
    let g = lattice.gram();
    for i in 0..4 {
        for j in 0..n {
            let expected = match (i, j) {
                (0, 1) | (2, 3) => 1,
                (1, 0) | (3, 2) => 1,
                _ => 0,
            };
            if g[(i, j)] != BigInt::from(expected) {
                return Err(Error::InvalidArgument(
                    "basis vectors 0..4 are not an orthogonal summand U ⊕ U".into(),
                ));
            }
        }
    }
    Ok(())
}

/// `x ↦ x − (a,x)·e + (e,x)·a − ½(a,a)(e,x)·e` for isotropic `e ⊥ a`.
#[derive(Debug, Clone)]
pub struct Transvection {
    e: Vec<BigInt>,
    a: Vec<BigInt>,
    ge: Vec<BigInt>,
    ga: Vec<BigInt>,
    half_a2: BigInt,
}

fn dot(x: &[BigInt], y: &[BigInt]) -> BigInt {
    x.iter()
        .zip(y)
        .filter(|(p, q)| !p.is_zero() && !q.is_zero())
        .map(|(p, q)| p * q)
        .sum()
}

impl Transvection {
    pub fn new(lattice: &GramLattice, e: &LatticeVector, a: &LatticeVector) -> Result<Self> {
        let ge = lattice.pairings(e)?;
        let ga = lattice.pairings(a)?;
        if !dot(&ge, e.coords()).is_zero() {
            return Err(Error::InvalidArgument("transvection vector e is not isotropic".into()));
        }
        if !dot(&ge, a.coords()).is_zero() {
            return Err(Error::InvalidArgument("transvection vectors are not orthogonal".into()));
        }
        let a2 = dot(&ga, a.coords());
        if a2.is_odd() {
            return Err(Error::InvalidArgument("transvection vector a has odd norm".into()));
        }
        Ok(Transvection {
            e: e.coords().to_vec(),
            a: a.coords().to_vec(),
            ge,
            ga,
            half_a2: a2 / 2,
        })
    }

    pub fn inverse(&self) -> Transvection {
        Transvection {
            e: self.e.clone(),
            a: self.a.iter().map(|x| -x).collect(),
            ge: self.ge.clone(),
            ga: self.ga.iter().map(|x| -x).collect(),
            half_a2: self.half_a2.clone(),
        }
    }

    pub fn apply_in_place(&self, x: &mut [BigInt]) {
        let ax = dot(&self.ga, x);
        let ex = dot(&self.ge, x);
        if ax.is_zero() && ex.is_zero() {
            return;
        }
        let coeff_e = -(&ax + &self.half_a2 * &ex);
        for (xi, (ei, ai)) in x.iter_mut().zip(self.e.iter().zip(&self.a)) {
            if !ei.is_zero() {
                *xi += &coeff_e * ei;
            }
            if !ai.is_zero() {
                *xi += &ex * ai;
            }
        }
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        let mut x = v.coords().to_vec();
        self.apply_in_place(&mut x);
        LatticeVector::new(x)
    }

    /// Replaces `m` by `t ∘ m`.
    pub(crate) fn apply_columns(&self, m: &mut IntMatrix) {
        for j in 0..m.cols() {
            let mut col = m.column(j);
            self.apply_in_place(&mut col);
            m.set_column(j, &col);
        }
    }

    pub fn to_isometry(&self, lattice: &GramLattice) -> Result<Isometry> {
        let mut m = IntMatrix::identity(lattice.rank());
        self.apply_columns(&mut m);
        Isometry::new(lattice, m)
    }
}

impl GramLattice {
    /// The Eichler transvection `t(e, a)` as an isometry.
    pub fn eichler_transvection(&self, e: &LatticeVector, a: &LatticeVector) -> Result<Isometry> {
        Transvection::new(self, e, a)?.to_isometry(self)
    }
}

/// Drives one vector to `e₁ + (x²/2)·f₁`, recording every transvection.
///
/// Writing `x = α e₁ + β f₁ + α₂ e₂ + β₂ f₂ + y` with `y` in the complement
/// of `U ⊕ U`, transvections along `e₁, f₁, e₂, f₂` run a Euclidean
/// algorithm that gathers `gcd` of all pairings of `x` into `α`. Since the
/// divisibility is one this ends at `α = 1`, and one `f₁`-transvection then
/// clears everything outside the first plane.
struct Reducer<'a> {
    lattice: &'a GramLattice,
    x: Vec<BigInt>,
    log: Vec<Transvection>,
    budget: u64,
    steps: &'a mut u64,
}

impl<'a> Reducer<'a> {
    fn new(
        lattice: &'a GramLattice,
        v: &LatticeVector,
        budget: u64,
        steps: &'a mut u64,
    ) -> Self {
        Reducer {
            lattice,
            x: v.coords().to_vec(),
            log: Vec::new(),
            budget,
            steps,
        }
    }

    fn unit(&self, i: usize) -> LatticeVector {
        LatticeVector::basis(self.lattice.rank(), i)
    }

    fn push(&mut self, e: usize, a: LatticeVector) -> Result<()> {
        if a.is_zero() {
            return Ok(());
        }
        *self.steps += 1;
        if *self.steps > self.budget {
            return Err(Error::exhausted("isometry reduction", self.budget));
        }
        let t = Transvection::new(self.lattice, &self.unit(e), &a)?;
        t.apply_in_place(&mut self.x);
        self.log.push(t);
        Ok(())
    }

    fn alpha(&self) -> &BigInt {
        &self.x[E1]
    }

    // α += k·α₂ via t(f₂, k e₁)
    fn alpha_add_alpha2(&mut self, k: &BigInt) -> Result<()> {
        let a = self.unit(E1).scale(k);
        self.push(F2, a)
    }

    // α₂ += k·α via t(f₁, k e₂)
    fn alpha2_add_alpha(&mut self, k: &BigInt) -> Result<()> {
        let a = self.unit(E2).scale(k);
        self.push(F1, a)
    }

    // α += k·β₂ and α₂ −= k·β via t(e₂, k e₁)
    fn alpha_add_beta2(&mut self, k: &BigInt) -> Result<()> {
        let a = self.unit(E1).scale(k);
        self.push(E2, a)
    }

    // β₂ += k·α via t(f₁, k f₂)
    fn beta2_add_alpha(&mut self, k: &BigInt) -> Result<()> {
        let a = self.unit(F2).scale(k);
        self.push(F1, a)
    }

    /// Euclid between `α` and the coordinate at `partner`, ending with the
    /// partner zero and `α = ±gcd`.
    fn euclid(&mut self, partner: usize) -> Result<()> {
        let (to_alpha, from_alpha): (fn(&mut Self, &BigInt) -> Result<()>, fn(&mut Self, &BigInt) -> Result<()>) =
            if partner == E2 {
                (Self::alpha_add_alpha2, Self::alpha2_add_alpha)
            } else {
                (Self::alpha_add_beta2, Self::beta2_add_alpha)
            };
        loop {
            let p = self.x[partner].clone();
            if p.is_zero() {
                return Ok(());
            }
            let a = self.alpha().clone();
            if a.is_zero() {
                to_alpha(self, &BigInt::one())?;
                continue;
            }
            let q = p.div_floor(&a);
            from_alpha(self, &-q)?;
            let p = self.x[partner].clone();
            if p.is_zero() {
                return Ok(());
            }
            let q = self.alpha().div_floor(&p);
            to_alpha(self, &-q)?;
        }
    }

    fn clear_second_plane(&mut self) -> Result<()> {
        while !(self.x[E2].is_zero() && self.x[F2].is_zero()) {
            self.euclid(E2)?;
            self.euclid(F2)?;
        }
        Ok(())
    }

    fn run(mut self) -> Result<Vec<Transvection>> {
        let n = self.lattice.rank();
        let gram = self.lattice.gram().clone();
        self.clear_second_plane()?;
        loop {
            let a = self.alpha().clone();
            let divides = |x: &BigInt| if a.is_zero() { x.is_zero() } else { x.is_multiple_of(&a) };
            // With α₂ = β₂ = 0, t(e₂, −e₁) adds β to α₂ only.
            if !divides(&self.x[F1]) {
                self.alpha_add_beta2(&-BigInt::one())?;
                self.clear_second_plane()?;
                continue;
            }
            // With β₂ = 0, t(e₂, b) for b outside U ⊕ U adds −(b, x) to α₂ only.
            let offender = (4..n).find(|&j| {
                let p: BigInt = (0..n).map(|i| &gram[(j, i)] * &self.x[i]).sum();
                !divides(&p)
            });
            match offender {
                Some(j) => {
                    let b = self.unit(j);
                    self.push(E2, b)?;
                    self.clear_second_plane()?;
                }
                None => break,
            }
        }

        if self.alpha().is_negative() && self.alpha().abs().is_one() {
            self.alpha2_add_alpha(&-BigInt::one())?;
            self.alpha_add_alpha2(&BigInt::from(2))?;
        }
        if !self.alpha().is_one() {
            return Err(Error::InvariantViolated(format!(
                "reduction stalled with e1-coefficient {}",
                self.alpha()
            )));
        }
        // t(f₁, −y) with y the part of x outside the first plane.
        let mut y = self.x.clone();
        y[E1] = BigInt::zero();
        y[F1] = BigInt::zero();
        let a = -&LatticeVector::new(y);
        self.push(F1, a)?;
        if self.x[2..].iter().any(|c| !c.is_zero()) || !self.x[E1].is_one() {
            return Err(Error::InvariantViolated("reduction did not reach e1 + k f1".into()));
        }
        Ok(self.log)
    }

}
