//! Problem data: a Picard sublattice of `Λ(n)`, an MBM wall class, a
//! B-field `[−B/d]` and the bound `C₀`; Brauer-class arithmetic and a
//! seeded instance generator.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::check::Report;
use crate::error::{Error, Result};
use crate::lattice::{build_lambda, in_span_plus_lattice, GramLattice, LatticeVector, RationalClass, LAMBDA_RANK};
use crate::matrix::{integer_kernel, signature, smith_normal_form, solve_integer, IntMatrix};
use crate::obstruction::mbm_bound_check;

/// Default coordinate bound for [`normalize_brauer`].
pub const DEFAULT_NORMALIZE_BOUND: i64 = 8;

/// A K3^[n]-type lattice instance. Vectors are coordinates in the fixed
/// basis of `Λ(n)`; see [`crate::lattice`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HkInstance {
    #[serde(with = "crate::dec::int_u32")]
    pub n: u32,
    pub pic_basis: Vec<LatticeVector>,
    #[serde(rename = "W")]
    pub wall: LatticeVector,
    #[serde(rename = "B")]
    pub b_field: LatticeVector,
    #[serde(with = "crate::dec::int")]
    pub d: BigInt,
    #[serde(rename = "C0", with = "crate::dec::int")]
    pub c0: BigInt,
}

impl HkInstance {
    pub fn lattice(&self) -> Result<GramLattice> {
        build_lambda(self.n)
    }

    pub fn pic_rank(&self) -> usize {
        self.pic_basis.len()
    }

    /// Matrix whose columns are the Picard basis vectors.
    pub fn pic_matrix(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = self.pic_basis.iter().map(|p| p.coords().to_vec()).collect();
        IntMatrix::from_columns(&cols, LAMBDA_RANK)
    }

    /// Coefficients of `v` over the Picard basis, if `v ∈ Pic`.
    pub fn pic_coefficients(&self, v: &LatticeVector) -> Option<Vec<BigInt>> {
        if v.rank() != LAMBDA_RANK || self.pic_basis.iter().any(|p| p.rank() != LAMBDA_RANK) {
            return None;
        }
        solve_integer(&self.pic_matrix(), v.coords())
    }

    pub fn pic_combination(&self, coeffs: &[BigInt]) -> LatticeVector {
        let mut v = LatticeVector::zero(LAMBDA_RANK);
        for (c, p) in coeffs.iter().zip(&self.pic_basis) {
            v = &v + &p.scale(c);
        }
        v
    }

    /// `e` with `B² = 2e`.
    pub fn e(&self) -> Result<BigInt> {
        let l = self.lattice()?;
        Ok(l.norm(&self.b_field)? / 2)
    }

    /// The Brauer class `[−B/d]`.
    pub fn brauer_class(&self) -> Result<BrauerClass> {
        let rep = RationalClass::new(-&self.b_field, self.d.clone())?;
        Ok(BrauerClass::new(rep, self.pic_basis.clone()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// A class in `(Λ/Pic) ⊗ ℚ/ℤ`, represented by a rational lattice class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrauerClass {
    pub representative: RationalClass,
    pub pic_basis: Vec<LatticeVector>,
}

impl BrauerClass {
    pub fn new(representative: RationalClass, pic_basis: Vec<LatticeVector>) -> Self {
        BrauerClass {
            representative,
            pic_basis,
        }
    }

    pub fn zero(rank: usize, pic_basis: Vec<LatticeVector>) -> Self {
        BrauerClass::new(RationalClass::integral(LatticeVector::zero(rank)), pic_basis)
    }
}

/// Equality modulo `span_ℚ(Pic) + Λ`.
pub fn brauer_equal(a: &BrauerClass, b: &BrauerClass) -> Result<bool> {
    if a.pic_basis != b.pic_basis {
        return Err(Error::InvalidArgument("Brauer classes over different Picard bases".into()));
    }
    let diff = a.representative.sub(&b.representative)?;
    in_span_plus_lattice(&diff, &a.pic_basis)
}

/// Checks every instance invariant and reports each verdict.
pub fn validate_instance(inst: &HkInstance) -> Report {
    let mut r = Report::default();
    r.push("n-at-least-2", inst.n >= 2, format!("n = {}", inst.n));
    let bad_rank = inst
        .pic_basis
        .iter()
        .chain([&inst.wall, &inst.b_field])
        .any(|v| v.rank() != LAMBDA_RANK);
    r.push(
        "vectors-have-rank-23",
        !bad_rank,
        if bad_rank { "a vector does not have 23 coordinates" } else { "" },
    );
    let lattice = match (bad_rank, inst.lattice()) {
        (false, Ok(l)) => l,
        _ => return r,
    };
    let rho = inst.pic_rank();
    r.push("pic-rank-at-least-2", rho >= 2, format!("rank {rho}"));
    r.push("d-positive", inst.d.is_positive(), format!("d = {}", inst.d));
    r.push("c0-positive", inst.c0.is_positive(), format!("C0 = {}", inst.c0));

    if rho > 0 {
        let snf = smith_normal_form(&inst.pic_matrix());
        let factors = snf.invariant_factors();
        let saturated = factors.len() == rho && factors.iter().all(One::is_one);
        r.push(
            "pic-primitive-sublattice",
            saturated,
            format!("invariant factors {}", join(&factors)),
        );
        let pic_gram = pic_gram(&lattice, &inst.pic_basis);
        let (pos, neg, zero) = signature(&pic_gram);
        r.push(
            "pic-hyperbolic",
            pos == 1 && zero == 0,
            format!("signature ({pos}, {neg}), kernel {zero}"),
        );
        let coeffs = inst.pic_coefficients(&inst.wall);
        r.push(
            "wall-in-pic",
            coeffs.is_some(),
            coeffs.map_or("W is not an integral Picard combination".into(), |c| {
                format!("coefficients {}", join(&c))
            }),
        );
    }

    let w_prim = !inst.wall.is_zero() && inst.wall.content().is_one();
    r.push("wall-primitive", w_prim, format!("content {}", inst.wall.content()));
    let w_norm = lattice.norm(&inst.wall).expect("rank checked");
    let bound = !inst.wall.is_zero()
        && mbm_bound_check(&lattice, &inst.wall, &inst.c0).expect("rank checked");
    r.push(
        "wall-norm-bound",
        bound,
        format!("W^2 = {w_norm}, C0 = {}", inst.c0),
    );

    let offending: Vec<String> = inst
        .pic_basis
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let x = lattice.pair(&inst.b_field, p).expect("rank checked");
            (!x.is_zero()).then(|| format!("(B, p{i}) = {x}"))
        })
        .collect();
    r.push("b-field-orthogonal-to-pic", offending.is_empty(), offending.join("; "));
    let b_norm = lattice.norm(&inst.b_field).expect("rank checked");
    r.push("b-field-positive-norm", b_norm.is_positive(), format!("B^2 = {b_norm}"));
    let b_prim = !inst.b_field.is_zero() && inst.b_field.content().is_one();
    r.push("b-field-primitive", b_prim, format!("content {}", inst.b_field.content()));
    r
}

pub(crate) fn pic_gram(lattice: &GramLattice, basis: &[LatticeVector]) -> IntMatrix {
    let rows = basis
        .iter()
        .map(|p| basis.iter().map(|q| lattice.pair(p, q).expect("rank checked")).collect())
        .collect();
    IntMatrix::from_rows(rows).expect("square")
}

fn join(xs: &[BigInt]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// Replaces `B` by `B − d·λ` with `λ ⊥ Pic` so that `B² > 0`.
///
/// Candidates for `λ` have at most two nonzero entries bounded by `bound`,
/// first in the coordinates of `Λ`, then over a ℤ-basis of `Pic^⊥`; each
/// family is scanned by increasing `L1` norm, then ascending lexicographic
/// order, and the first `λ` giving a primitive `B'` with `B'² > 0` wins.
pub fn normalize_brauer(inst: &HkInstance, bound: i64) -> Result<HkInstance> {
    let report = validate_instance(inst);
    let blocking: Vec<&str> = report
        .failures()
        .filter(|c| c.name != "b-field-positive-norm")
        .map(|c| c.name.as_str())
        .collect();
    if !blocking.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "instance fails {}",
            blocking.join(", ")
        )));
    }
    let lattice = inst.lattice()?;
    if lattice.norm(&inst.b_field)?.is_positive() {
        return Ok(inst.clone());
    }

    let accept = |lambda: &LatticeVector| -> Result<Option<LatticeVector>> {
        if inst
            .pic_basis
            .iter()
            .any(|p| !lattice.pair(p, lambda).map(|x| x.is_zero()).unwrap_or(false))
        {
            return Ok(None);
        }
        let candidate = &inst.b_field - &lambda.scale(&inst.d);
        if candidate.is_zero() || !candidate.content().is_one() {
            return Ok(None);
        }
        Ok(lattice.norm(&candidate)?.is_positive().then_some(candidate))
    };

    let unit_vectors: Vec<LatticeVector> =
        (0..LAMBDA_RANK).map(|i| LatticeVector::basis(LAMBDA_RANK, i)).collect();
    let complement: Vec<LatticeVector> = {
        let rows: Vec<Vec<BigInt>> = inst
            .pic_basis
            .iter()
            .map(|p| lattice.pairings(p).expect("rank checked"))
            .collect();
        let m = IntMatrix::from_rows(rows).expect("rectangular");
        integer_kernel(&m).into_iter().map(LatticeVector::new).collect()
    };

    for family in [&unit_vectors, &complement] {
        for coeffs in sparse_candidates(family.len(), bound) {
            let mut lambda = LatticeVector::zero(LAMBDA_RANK);
            for &(i, c) in &coeffs {
                lambda = &lambda + &family[i].scale(&BigInt::from(c));
            }
            if let Some(b) = accept(&lambda)? {
                let mut out = inst.clone();
                out.b_field = b;
                return Ok(out);
            }
        }
    }
    Err(Error::exhausted(
        "B-field normalization",
        bound.unsigned_abs(),
    ))
}

/// Sparse coefficient vectors (support ≤ 2, entries in `[−bound, bound]`)
/// ordered by `L1` norm, then ascending lexicographic order of the dense
/// coefficient vector.
fn sparse_candidates(dim: usize, bound: i64) -> Vec<Vec<(usize, i64)>> {
    let values: Vec<i64> = (-bound..=bound).filter(|&c| c != 0).collect();
    let mut out: Vec<Vec<(usize, i64)>> = Vec::new();
    for i in 0..dim {
        for &a in &values {
            out.push(vec![(i, a)]);
            for j in i + 1..dim {
                for &b in &values {
                    out.push(vec![(i, a), (j, b)]);
                }
            }
        }
    }
    let l1 = |v: &Vec<(usize, i64)>| v.iter().map(|(_, c)| c.abs()).sum::<i64>();
    out.sort_by(|x, y| l1(x).cmp(&l1(y)).then_with(|| dense_lex(x, y)));
    out
}

// Lexicographic comparison of sparse vectors as dense vectors.
fn dense_lex(x: &[(usize, i64)], y: &[(usize, i64)]) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        match (x.get(i), y.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(&(_, a)), None) => return a.cmp(&0),
            (None, Some(&(_, b))) => return 0.cmp(&b),
            (Some(&(p, a)), Some(&(q, b))) => match p.cmp(&q) {
                Ordering::Equal => match a.cmp(&b) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                },
                Ordering::Less => return a.cmp(&0),
                Ordering::Greater => return 0.cmp(&b),
            },
        }
    }
}

/// Coordinates the generator may use for Picard classes: `U₁`, the first
/// `E8(−1)`, and `δ`.
const PIC_SUPPORT: [usize; 11] = [0, 1, 6, 7, 8, 9, 10, 11, 12, 13, 22];
/// Coordinates for the B-field: `U₂`, `U₃`, the second `E8(−1)`.
const B_SUPPORT: [usize; 12] = [2, 3, 4, 5, 14, 15, 16, 17, 18, 19, 20, 21];
const GENERATOR_RETRIES: usize = 20_000;
const COORD_BOUND: i64 = 3;

fn sparse_vector(rng: &mut ChaCha8Rng, support: &[usize], max_support: usize) -> LatticeVector {
    let k = rng.gen_range(1..=max_support);
    let mut coords = vec![BigInt::zero(); LAMBDA_RANK];
    for idx in sample(rng, support.len(), k).into_iter() {
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-COORD_BOUND..=COORD_BOUND);
        }
        coords[support[idx]] = BigInt::from(c);
    }
    LatticeVector::new(coords)
}

/// A seeded random instance that passes [`validate_instance`].
///
/// Picard classes are drawn from `U₁ ⊕ E8(−1) ⊕ ℤδ` and the B-field from the
/// orthogonal `U₂ ⊕ U₃ ⊕ E8(−1)`, all with coordinates in `[−3, 3]`; the wall
/// class is the first Picard basis vector.
pub fn random_instance(
    n: u32,
    pic_rank: usize,
    c0: &BigInt,
    d_max: u64,
    seed: u64,
) -> Result<HkInstance> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidParameter(format!("n = {n}, expected 2..=6")));
    }
    if !(2..=4).contains(&pic_rank) {
        return Err(Error::InvalidParameter(format!("pic_rank = {pic_rank}, expected 2..=4")));
    }
    if !c0.is_positive() || d_max == 0 {
        return Err(Error::InvalidParameter("C0 and d_max must be positive".into()));
    }
    let lattice = build_lambda(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..GENERATOR_RETRIES {
        let wall = sparse_vector(&mut rng, &PIC_SUPPORT, 3);
        if !mbm_bound_check(&lattice, &wall, c0)? {
            continue;
        }
        let mut pic_basis = vec![wall.clone()];
        for _ in 1..pic_rank {
            pic_basis.push(sparse_vector(&mut rng, &PIC_SUPPORT, 3));
        }
        let (pos, _, zero) = signature(&pic_gram(&lattice, &pic_basis));
        if pos != 1 || zero != 0 {
            continue;
        }
        let b_field = loop {
            let b = sparse_vector(&mut rng, &B_SUPPORT, 4);
            if b.content().is_one() && lattice.norm(&b)?.is_positive() {
                break b;
            }
        };
        let d = BigInt::from(rng.gen_range(1..=d_max));
        let inst = HkInstance {
            n,
            pic_basis,
            wall,
            b_field,
            d,
            c0: c0.clone(),
        };
        if validate_instance(&inst).all_pass() {
            return Ok(inst);
        }
    }
    Err(Error::exhausted(
        format!("random instance generation (seed {seed})"),
        GENERATOR_RETRIES as u64,
    ))
}

/// `n!`, used for the rank `n!·rⁿ` of the BKR-transformed bundle.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::lattice::basis::*;

    pub fn unit(i: usize) -> LatticeVector {
        LatticeVector::basis(LAMBDA_RANK, i)
    }

    /// n = 2, Pic = ⟨e₁+δ, f₁⟩, W = e₁+δ, B = e₂+f₂, d = 2, C₀ = 3.
    pub fn e2() -> HkInstance {
        let w = &unit(E1) + &unit(DELTA);
        HkInstance {
            n: 2,
            pic_basis: vec![w.clone(), unit(F1)],
            wall: w,
            b_field: &unit(E2) + &unit(F2),
            d: BigInt::from(2),
            c0: BigInt::from(3),
        }
    }
}
