//! The construction pipeline: the classes `A`, `ω`, `D`, the parameters
//! `g`, `C₁`, `t`, the polarization degree and Mukai vector, the transport
//! isometry `σ`, and the pushed-forward Brauer class `α_X`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::check::Report;
use crate::dec::Dec;
use crate::error::{Error, Result};
use crate::instance::{brauer_equal, factorial, validate_instance, BrauerClass, HkInstance};
use crate::lattice::basis::{DELTA, E1, F1};
use crate::lattice::DEFAULT_ISOMETRY_BUDGET;
use crate::lattice::{gcd_all, GramLattice, Isometry, LatticeVector, RationalClass, LAMBDA_RANK};

pub const DEFAULT_COEFF_BOUND: i64 = 16;
pub const DEFAULT_U_BUDGET: u64 = 1_000_000;
pub const DEFAULT_T_BUDGET: u64 = 1_000_000;
// Largest coefficient box the Picard search will enumerate.
const MAX_BOX: u128 = 5_000_000;

/// Search limits. Certificates record them so verification can replay
/// minimality checks without searching past them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    #[serde(with = "crate::dec::int_u64")]
    pub coeff_bound: u64,
    #[serde(with = "crate::dec::int_u64")]
    pub u: u64,
    #[serde(with = "crate::dec::int_u64")]
    pub t: u64,
    #[serde(with = "crate::dec::int_u64")]
    pub isometry: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            coeff_bound: DEFAULT_COEFF_BOUND as u64,
            u: DEFAULT_U_BUDGET,
            t: DEFAULT_T_BUDGET,
            isometry: DEFAULT_ISOMETRY_BUDGET,
        }
    }
}

/// `(r, m·H, s)` together with `H²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MukaiVector {
    #[serde(with = "crate::dec::int")]
    pub r: BigInt,
    #[serde(with = "crate::dec::int")]
    pub m: BigInt,
    #[serde(with = "crate::dec::int")]
    pub s: BigInt,
    #[serde(rename = "H2", with = "crate::dec::int")]
    pub h2: BigInt,
}

impl MukaiVector {
    /// `m²·H² − 2rs`.
    pub fn self_pairing(&self) -> BigInt {
        &self.m * &self.m * &self.h2 - BigInt::from(2) * &self.r * &self.s
    }
}

/// A Picard class with its coefficients over the instance's Picard basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicardClass {
    pub vector: LatticeVector,
    pub coeffs: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualVerdict {
    Accept,
    Reject(String),
}

impl DualVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, DualVerdict::Accept)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualMukai {
    #[serde(with = "crate::dec::int")]
    pub k: BigInt,
    pub s_hat: Option<Dec>,
    pub verdict: DualVerdict,
}

/// `σ` with `σ(source) = ε·target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport {
    pub source: LatticeVector,
    pub target: LatticeVector,
    pub sigma: Isometry,
    pub epsilon: BigInt,
}

/// Every value chosen or computed by [`run`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionRecord {
    #[serde(rename = "A")]
    pub a: LatticeVector,
    #[serde(rename = "A_coeffs", with = "crate::dec::ints")]
    pub a_coeffs: Vec<BigInt>,
    pub omega: LatticeVector,
    #[serde(with = "crate::dec::ints")]
    pub omega_coeffs: Vec<BigInt>,
    #[serde(with = "crate::dec::int")]
    pub u: BigInt,
    #[serde(rename = "D")]
    pub d_class: LatticeVector,
    #[serde(rename = "C1", with = "crate::dec::int")]
    pub c1: BigInt,
    #[serde(with = "crate::dec::int")]
    pub g: BigInt,
    #[serde(with = "crate::dec::int")]
    pub t: BigInt,
    #[serde(with = "crate::dec::int")]
    pub e: BigInt,
    #[serde(rename = "H2", with = "crate::dec::int")]
    pub h2: BigInt,
    pub v0: MukaiVector,
    pub dual: DualMukai,
    pub source: LatticeVector,
    pub target: LatticeVector,
    pub sigma: Isometry,
    #[serde(with = "crate::dec::int")]
    pub epsilon: BigInt,
    #[serde(rename = "alpha_X")]
    pub alpha_x: RationalClass,
    #[serde(with = "crate::dec::int")]
    pub bkr_rank: BigInt,
    pub checks: Report,
}

/// Nonzero coefficient vectors in `[−bound, bound]^ρ`, in search order:
/// increasing `L1` norm of the resulting class in `Λ`, then descending
/// lexicographic order of its `Λ` coordinates. Returns the first candidate
/// accepted by `pred`.
fn first_in_order<T>(
    inst: &HkInstance,
    bound: u64,
    mut pred: impl FnMut(&[i64], LatticeVector) -> Result<Option<T>>,
) -> Result<Option<T>> {
    let rho = inst.pic_rank();
    let pic: Vec<Vec<i128>> = inst
        .pic_basis
        .iter()
        .map(|p| p.coords().iter().map(|x| x.to_i64().map(i128::from)).collect())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidArgument("Picard coordinates exceed 64 bits".into()))?;
    let bound = i64::try_from(bound)
        .ok()
        .filter(|b| *b <= 1 << 20)
        .ok_or_else(|| Error::InvalidParameter(format!("coefficient bound {bound} too large")))?;
    let side = (2 * bound + 1) as u128;
    let size = side
        .checked_pow(rho as u32)
        .filter(|s| *s <= MAX_BOX)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "coefficient box ({side})^{rho} exceeds {MAX_BOX} candidates"
            ))
        })? as usize;

    let decode = |mut idx: usize| -> Vec<i64> {
        (0..rho)
            .map(|_| {
                let digit = (idx % side as usize) as i64;
                idx /= side as usize;
                digit - bound
            })
            .collect()
    };
    let combine = |coeffs: &[i64]| -> Vec<i128> {
        let mut v = vec![0i128; LAMBDA_RANK];
        for (c, p) in coeffs.iter().zip(&pic) {
            if *c != 0 {
                for (x, y) in v.iter_mut().zip(p) {
                    *x += *c as i128 * y;
                }
            }
        }
        v
    };

    let mut keyed: Vec<(u128, u32)> = Vec::with_capacity(size);
    for idx in 0..size {
        let coeffs = decode(idx);
        if coeffs.iter().all(|c| *c == 0) {
            continue;
        }
        let l1: u128 = combine(&coeffs).iter().map(|x| x.unsigned_abs()).sum();
        if l1 > 0 {
            keyed.push((l1, idx as u32));
        }
    }
    keyed.sort_unstable();

    let mut start = 0;
    while start < keyed.len() {
        let l1 = keyed[start].0;
        let end = start + keyed[start..].partition_point(|k| k.0 == l1);
        let mut group: Vec<(Vec<i128>, Vec<i64>)> = keyed[start..end]
            .iter()
            .map(|&(_, idx)| {
                let coeffs = decode(idx as usize);
                (combine(&coeffs), coeffs)
            })
            .collect();
        group.sort_by(|x, y| y.0.cmp(&x.0));
        for (coords, coeffs) in group {
            let v = LatticeVector::new(coords.into_iter().map(BigInt::from).collect());
            if let Some(found) = pred(&coeffs, v)? {
                return Ok(Some(found));
            }
        }
        start = end;
    }
    Ok(None)
}

fn picard_class(coeffs: &[i64], vector: LatticeVector) -> PicardClass {
    PicardClass {
        vector,
        coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
    }
}

/// The first Picard class of divisibility one not orthogonal to `W`,
/// negated if needed so that `(A, W) > 0`.
pub fn find_a(inst: &HkInstance, bound: u64) -> Result<PicardClass> {
    let lattice = inst.lattice()?;
    let found = first_in_order(inst, bound, |coeffs, v| {
        let pairing = lattice.pair(&v, &inst.wall)?;
        if pairing.is_zero() || !lattice.divisibility(&v)?.is_one() {
            return Ok(None);
        }
        let class = picard_class(coeffs, v);
        Ok(Some(if pairing.is_negative() {
            PicardClass {
                vector: -&class.vector,
                coeffs: class.coeffs.iter().map(|c| -c).collect(),
            }
        } else {
            class
        }))
    })?;
    found.ok_or_else(|| Error::exhausted("class A", bound))
}

/// The first Picard class `ω` with `(ω, W) = 0` and `ω² > 0`.
pub fn find_omega(inst: &HkInstance, bound: u64) -> Result<PicardClass> {
    let lattice = inst.lattice()?;
    let found = first_in_order(inst, bound, |coeffs, v| {
        let ok = lattice.pair(&v, &inst.wall)?.is_zero() && lattice.norm(&v)?.is_positive();
        Ok(ok.then(|| picard_class(coeffs, v)))
    })?;
    found.ok_or_else(|| Error::exhausted("class omega", bound))
}

/// Result of [`find_d`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DClass {
    pub d_class: LatticeVector,
    pub g: BigInt,
    pub c1: BigInt,
    pub u: BigInt,
}

/// Whether `D = A + u·ω` has divisibility one and `D² > 2·C₀·C₁`.
pub fn d_condition(
    lattice: &GramLattice,
    a: &LatticeVector,
    omega: &LatticeVector,
    u: &BigInt,
    c0c1: &BigInt,
) -> Result<bool> {
    let d = a + &omega.scale(u);
    if d.is_zero() {
        return Ok(false);
    }
    Ok(&lattice.norm(&d)? > &(BigInt::from(2) * c0c1) && lattice.divisibility(&d)?.is_one())
}

/// `D = A + u·ω` for the smallest `u ≥ 1` with `div(D) = 1` and
/// `D² = 2g > 2·C₀·C₁`.
pub fn find_d(
    inst: &HkInstance,
    a: &LatticeVector,
    omega: &LatticeVector,
    budget: u64,
) -> Result<DClass> {
    let lattice = inst.lattice()?;
    let c1 = lattice.pair(a, &inst.wall)?;
    let bound = BigInt::from(2) * &inst.c0 * &c1;
    let (pa, pw) = (lattice.pairings(a)?, lattice.pairings(omega)?);
    let (a2, aw, w2) = (lattice.norm(a)?, lattice.pair(a, omega)?, lattice.norm(omega)?);
    for u in 1..=budget {
        let u = BigInt::from(u);
        let norm = &a2 + BigInt::from(2) * &u * &aw + &u * &u * &w2;
        if norm <= bound {
            continue;
        }
        let div = gcd_all(pa.iter().zip(&pw).map(|(x, y)| x + &u * y).collect::<Vec<_>>().iter());
        if div.is_one() {
            return Ok(DClass {
                d_class: a + &omega.scale(&u),
                g: norm / 2,
                c1,
                u,
            });
        }
    }
    Err(Error::exhausted("multiplier u for D", budget))
}

/// `4·g·t·d`.
pub fn b_multiplier(g: &BigInt, t: &BigInt, d: &BigInt) -> BigInt {
    BigInt::from(4) * g * t * d
}

/// The smallest `t ≥ 1` with `div(D + 4gtd·B) = 1`.
pub fn choose_t(inst: &HkInstance, d_class: &LatticeVector, g: &BigInt, budget: u64) -> Result<BigInt> {
    let lattice = inst.lattice()?;
    let (pd, pb) = (lattice.pairings(d_class)?, lattice.pairings(&inst.b_field)?);
    for t in 1..=budget {
        let t = BigInt::from(t);
        let k = b_multiplier(g, &t, &inst.d);
        let div = gcd_all(pd.iter().zip(&pb).map(|(x, y)| x + &k * y).collect::<Vec<_>>().iter());
        if div.is_one() {
            return Ok(t);
        }
    }
    Err(Error::exhausted("parameter t", budget))
}

/// `H² = 2g·s` and `v₀ = (16gt²d⁴, 4td², s)` with
/// `s = 1 + 4gt²d⁴(n−1) + 16gt²d²e`.
pub fn mukai_data(n: &BigInt, g: &BigInt, t: &BigInt, d: &BigInt, e: &BigInt) -> MukaiVector {
    let (t2, d2) = (t * t, d * d);
    let d4 = &d2 * &d2;
    let s = BigInt::one()
        + BigInt::from(4) * g * &t2 * &d4 * (n - 1)
        + BigInt::from(16) * g * &t2 * &d2 * e;
    MukaiVector {
        r: BigInt::from(16) * g * &t2 * &d4,
        m: BigInt::from(4) * t * &d2,
        h2: BigInt::from(2) * g * &s,
        s,
    }
}

/// The four predicates on `v₀`: isotropy, `gcd(r, s) = 1`, `r ≥ 2`, and
/// `4gtd² ∤ H²/2 + 1`.
pub fn mukai_checks(v0: &MukaiVector, g: &BigInt, t: &BigInt, d: &BigInt) -> Report {
    let mut r = Report::default();
    let sp = v0.self_pairing();
    r.push(
        "mukai-isotropic",
        sp.is_zero(),
        format!("m^2*H2 - 2rs = {sp}"),
    );
    let gcd = v0.r.gcd(&v0.s);
    r.push("mukai-gcd-r-s", gcd.is_one(), format!("gcd(r, s) = {gcd}"));
    r.push(
        "mukai-rank-at-least-2",
        v0.r >= BigInt::from(2),
        format!("r = {}", v0.r),
    );
    let modulus = BigInt::from(4) * g * t * d * d;
    let half: BigInt = &v0.h2 / 2 + 1;
    let stable = v0.h2.is_even() && !modulus.is_zero() && !half.is_multiple_of(&modulus);
    r.push(
        "mukai-stability-nondivisibility",
        stable,
        format!("4gtd^2 = {modulus}, H2/2 + 1 = {half}"),
    );
    r
}

/// [`mukai_data`] with its checks; a failing check is an invariant violation.
pub fn degree_and_mukai(
    n: &BigInt,
    g: &BigInt,
    t: &BigInt,
    d: &BigInt,
    e: &BigInt,
) -> Result<(BigInt, MukaiVector, Report)> {
    if n < &BigInt::from(2) || [g, t, d, e].iter().any(|x| !x.is_positive()) {
        return Err(Error::InvalidParameter(
            "n >= 2 and g, t, d, e >= 1 required".into(),
        ));
    }
    let v0 = mukai_data(n, g, t, d, e);
    let checks = mukai_checks(&v0, g, t, d);
    if let Some(bad) = checks.first_failure() {
        return Err(Error::InvariantViolated(format!("{}: {}", bad.name, bad.details)));
    }
    Ok((v0.h2.clone(), v0, checks))
}

/// The dual vector test: accept iff `4td² | k` and `gcd(k/4td², r) = 1`,
/// with `ŝ = (k/4td²)²·s`.
pub fn dual_mukai_check(v0: &MukaiVector, k: &BigInt, t: &BigInt, d: &BigInt) -> DualMukai {
    let m = BigInt::from(4) * t * d * d;
    let reject = |reason: String| DualMukai {
        k: k.clone(),
        s_hat: None,
        verdict: DualVerdict::Reject(reason),
    };
    if m.is_zero() || !k.is_multiple_of(&m) {
        return reject(format!("{m} does not divide k = {k}"));
    }
    let q = k / &m;
    let s_hat = &q * &q * &v0.s;
    let gcd = q.gcd(&v0.r);
    if !gcd.is_one() {
        return DualMukai {
            k: k.clone(),
            s_hat: Some(Dec(s_hat)),
            verdict: DualVerdict::Reject(format!(
                "gcd(k/4td^2, r) = gcd({q}, {}) = {gcd}",
                v0.r
            )),
        };
    }
    DualMukai {
        k: k.clone(),
        s_hat: Some(Dec(s_hat)),
        verdict: DualVerdict::Accept,
    }
}

/// `h = e₁ + (H²/2)·f₁`, the fixed primitive class of norm `H²`.
pub fn polarization_class(h2: &BigInt) -> LatticeVector {
    let mut v = LatticeVector::zero(LAMBDA_RANK).into_coords();
    v[E1] = BigInt::one();
    v[F1] = h2 / 2;
    LatticeVector::new(v)
}

/// `h − 2gtd²·δ`.
pub fn transport_source(h2: &BigInt, g: &BigInt, t: &BigInt, d: &BigInt) -> LatticeVector {
    let mut v = polarization_class(h2).into_coords();
    v[DELTA] = -BigInt::from(2) * g * t * d * d;
    LatticeVector::new(v)
}

/// `D + 4gtd·B`.
pub fn transport_target(inst: &HkInstance, d_class: &LatticeVector, g: &BigInt, t: &BigInt) -> LatticeVector {
    d_class + &inst.b_field.scale(&b_multiplier(g, t, &inst.d))
}

/// [`transport`] for a fixed sign.
pub fn transport_with_sign(
    inst: &HkInstance,
    d_class: &LatticeVector,
    g: &BigInt,
    t: &BigInt,
    h2: &BigInt,
    epsilon: i8,
    budget: u64,
) -> Result<Transport> {
    let lattice = inst.lattice()?;
    let source = transport_source(h2, g, t, &inst.d);
    let target = transport_target(inst, d_class, g, t);
    let (ns, nt) = (lattice.norm(&source)?, lattice.norm(&target)?);
    if ns != nt {
        return Err(Error::InvariantViolated(format!(
            "transport norms differ: {ns} vs {nt}"
        )));
    }
    for (name, v) in [("source", &source), ("target", &target)] {
        let div = lattice.divisibility(v)?;
        if !div.is_one() {
            return Err(Error::InvariantViolated(format!("{name} has divisibility {div}")));
        }
    }
    let signed = if epsilon < 0 { -&target } else { target.clone() };
    let sigma = Isometry::between(&lattice, &source, &signed, budget).map_err(|e| match e {
        Error::NoIsometryAttempted(m) => Error::InvariantViolated(m),
        other => other,
    })?;
    Ok(Transport {
        source,
        target,
        sigma,
        epsilon: BigInt::from(epsilon.signum()),
    })
}

/// `σ` with `σ(h − 2gtd²δ) = ε(D + 4gtd·B)`, trying `ε = +1` first.
pub fn transport(
    inst: &HkInstance,
    d_class: &LatticeVector,
    g: &BigInt,
    t: &BigInt,
    h2: &BigInt,
    budget: u64,
) -> Result<Transport> {
    match transport_with_sign(inst, d_class, g, t, h2, 1, budget) {
        Ok(tr) => Ok(tr),
        Err(Error::SearchExhausted { .. }) => transport_with_sign(inst, d_class, g, t, h2, -1, budget),
        Err(e) => Err(e),
    }
}

/// `q = ε·h/(4gtd²) − δ/2`, as `(2εh − 4gtd²·δ) / 8gtd²`.
pub fn pushforward_class(h2: &BigInt, g: &BigInt, t: &BigInt, d: &BigInt, epsilon: &BigInt) -> Result<RationalClass> {
    let m = BigInt::from(4) * g * t * d * d;
    let mut num = polarization_class(h2).scale(&(BigInt::from(2) * epsilon)).into_coords();
    num[DELTA] -= &m;
    RationalClass::new(LatticeVector::new(num), BigInt::from(2) * m)
}

/// `α_X = [−σ(q)]` and whether it equals `[−B/d]`.
pub fn pushforward_brauer(
    inst: &HkInstance,
    sigma: &Isometry,
    g: &BigInt,
    t: &BigInt,
    h2: &BigInt,
    epsilon: &BigInt,
) -> Result<(BrauerClass, bool)> {
    let q = pushforward_class(h2, g, t, &inst.d, epsilon)?;
    let alpha = BrauerClass::new(sigma.apply_rational(&q).neg(), inst.pic_basis.clone());
    let verdict = brauer_equal(&alpha, &inst.brauer_class()?)?;
    Ok((alpha, verdict))
}

/// Runs the whole pipeline on a valid instance.
pub fn run(inst: &HkInstance, budgets: &Budgets) -> Result<ConstructionRecord> {
    let report = validate_instance(inst);
    if let Some(bad) = report.first_failure() {
        return Err(Error::InvalidArgument(format!(
            "instance fails {}: {}",
            bad.name, bad.details
        )));
    }
    let lattice = inst.lattice()?;
    let a = find_a(inst, budgets.coeff_bound)?;
    let omega = find_omega(inst, budgets.coeff_bound)?;
    let dc = find_d(inst, &a.vector, &omega.vector, budgets.u)?;
    let t = choose_t(inst, &dc.d_class, &dc.g, budgets.t)?;
    let e = lattice.norm(&inst.b_field)? / 2;
    let n = BigInt::from(inst.n);
    let (h2, v0, _) = degree_and_mukai(&n, &dc.g, &t, &inst.d, &e)?;
    let dual = dual_mukai_check(&v0, &v0.m, &t, &inst.d);
    let tr = transport(inst, &dc.d_class, &dc.g, &t, &h2, budgets.isometry)?;
    let (alpha, verdict) = pushforward_brauer(inst, &tr.sigma, &dc.g, &t, &h2, &tr.epsilon)?;
    if !verdict {
        return Err(Error::InvariantViolated("alpha_X differs from [-B/d]".into()));
    }
    let mut record = ConstructionRecord {
        a: a.vector,
        a_coeffs: a.coeffs,
        omega: omega.vector,
        omega_coeffs: omega.coeffs,
        u: dc.u,
        d_class: dc.d_class,
        c1: dc.c1,
        g: dc.g,
        t,
        e,
        h2,
        bkr_rank: factorial(inst.n) * v0.r.pow(inst.n),
        v0,
        dual,
        source: tr.source,
        target: tr.target,
        sigma: tr.sigma,
        epsilon: tr.epsilon,
        alpha_x: alpha.representative,
        checks: Report::default(),
    };
    record.checks = crate::certificate::record_checks(inst, &record, budgets);
    if let Some(bad) = record.checks.first_failure() {
        return Err(Error::InvariantViolated(format!("{}: {}", bad.name, bad.details)));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{e2, unit};
    use crate::instance::random_instance;
    use crate::lattice::basis::*;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn v(terms: &[(usize, i64)]) -> LatticeVector {
        let mut c = vec![BigInt::zero(); LAMBDA_RANK];
        for &(i, x) in terms {
            c[i] += x;
        }
        LatticeVector::new(c)
    }

    #[test]
    fn worked_instance_classes() {
        let inst = e2();
        let a = find_a(&inst, 16).unwrap();
        assert_eq!(a.vector, unit(F1));
        assert_eq!(a.coeffs, vec![b(0), b(1)]);
        let omega = find_omega(&inst, 16).unwrap();
        assert_eq!(omega.vector, v(&[(E1, 1), (F1, 2), (DELTA, 1)]));
        let dc = find_d(&inst, &a.vector, &omega.vector, 100).unwrap();
        assert_eq!(dc.u, b(2));
        assert_eq!(dc.d_class, v(&[(E1, 2), (F1, 5), (DELTA, 2)]));
        assert_eq!((dc.g.clone(), dc.c1.clone()), (b(6), b(1)));
        assert_eq!(choose_t(&inst, &dc.d_class, &dc.g, 100).unwrap(), b(1));
    }

    #[test]
    fn find_a_flips_sign() {
        let mut inst = e2();
        inst.pic_basis = vec![unit(E1), unit(F1)];
        inst.wall = &unit(E1) - &unit(F1);
        let a = find_a(&inst, 16).unwrap();
        assert_eq!(a.vector, -&unit(E1));
        assert_eq!(a.coeffs, vec![b(-1), b(0)]);
    }

    #[test]
    fn find_a_exhausts_when_wall_is_orthogonal() {
        // Fabricated: W ⊥ Pic.
        let mut inst = e2();
        inst.wall = unit(E3);
        assert!(matches!(find_a(&inst, 4), Err(Error::SearchExhausted { .. })));
    }

    #[test]
    fn find_omega_skips_rejected_candidates() {
        let mut inst = e2();
        inst.pic_basis = vec![unit(E1), unit(F1)];
        inst.wall = unit(E1);
        // f₁ has norm 0 and e₁ pairs to zero with W but is isotropic; the
        // search must move past both.
        assert!(matches!(find_omega(&inst, 3), Err(Error::SearchExhausted { .. })));
        inst.wall = &unit(E1) - &unit(F1);
        let omega = find_omega(&inst, 3).unwrap();
        assert_eq!(omega.vector, &unit(E1) + &unit(F1));
    }

    #[test]
    fn mukai_examples() {
        let (h2, v0, c) = degree_and_mukai(&b(2), &b(3), &b(1), &b(1), &b(1)).unwrap();
        assert_eq!(h2, b(366));
        assert_eq!((v0.r.clone(), v0.m.clone(), v0.s.clone()), (b(48), b(4), b(61)));
        assert!(c.all_pass());
        let (h2, v0, _) = degree_and_mukai(&b(2), &b(6), &b(1), &b(2), &b(1)).unwrap();
        assert_eq!(h2, b(9228));
        assert_eq!((v0.r.clone(), v0.m.clone(), v0.s.clone()), (b(1536), b(16), b(769)));
        let (h2, v0, _) = degree_and_mukai(&b(3), &b(5), &b(1), &b(2), &b(2)).unwrap();
        assert_eq!(h2, b(12810));
        assert_eq!((v0.r.clone(), v0.m.clone(), v0.s.clone()), (b(1280), b(16), b(1281)));
        assert!(v0.self_pairing().is_zero());
        assert!(degree_and_mukai(&b(1), &b(3), &b(1), &b(1), &b(1)).is_err());
    }

    #[test]
    fn dual_mukai_examples() {
        let v0 = mukai_data(&b(2), &b(6), &b(1), &b(2), &b(1));
        let ok = dual_mukai_check(&v0, &b(16), &b(1), &b(2));
        assert_eq!(ok.verdict, DualVerdict::Accept);
        assert_eq!(ok.s_hat, Some(Dec(b(769))));
        let r = dual_mukai_check(&v0, &b(8), &b(1), &b(2));
        assert!(matches!(r.verdict, DualVerdict::Reject(ref m) if m.contains("does not divide")));
        let r = dual_mukai_check(&v0, &b(32), &b(1), &b(2));
        assert!(matches!(r.verdict, DualVerdict::Reject(ref m) if m.contains("gcd")));
    }

    #[test]
    fn worked_instance_transport() {
        let inst = e2();
        let d = v(&[(E1, 2), (F1, 5), (DELTA, 2)]);
        let (g, t, h2) = (b(6), b(1), b(9228));
        let tr = transport(&inst, &d, &g, &t, &h2, DEFAULT_ISOMETRY_BUDGET).unwrap();
        assert_eq!(tr.source, v(&[(E1, 1), (F1, 4614), (DELTA, -48)]));
        assert_eq!(tr.target, &d + &inst.b_field.scale(&b(48)));
        let l = inst.lattice().unwrap();
        assert_eq!(l.norm(&tr.source).unwrap(), b(4620));
        assert_eq!(l.norm(&tr.target).unwrap(), b(4620));
        assert_eq!(tr.sigma.apply(&tr.source), tr.target.scale(&tr.epsilon));
        assert_eq!(tr.epsilon, b(1));
    }

    #[test]
    fn pushforward_is_sign_independent() {
        let inst = e2();
        let d = v(&[(E1, 2), (F1, 5), (DELTA, 2)]);
        let (g, t, h2) = (b(6), b(1), b(9228));
        let mut classes = Vec::new();
        for eps in [1i8, -1] {
            let tr = transport_with_sign(&inst, &d, &g, &t, &h2, eps, DEFAULT_ISOMETRY_BUDGET).unwrap();
            let (alpha, ok) = pushforward_brauer(&inst, &tr.sigma, &g, &t, &h2, &tr.epsilon).unwrap();
            assert!(ok);
            classes.push(alpha);
        }
        assert!(brauer_equal(&classes[0], &classes[1]).unwrap());
    }

    #[test]
    fn integral_b_field_gives_trivial_class() {
        let mut inst = e2();
        inst.d = b(1);
        let rec = run(&inst, &Budgets::default()).unwrap();
        let alpha = BrauerClass::new(rec.alpha_x, inst.pic_basis.clone());
        assert!(brauer_equal(&alpha, &BrauerClass::zero(LAMBDA_RANK, inst.pic_basis.clone())).unwrap());
    }

    #[test]
    fn worked_instance_record() {
        let rec = run(&e2(), &Budgets::default()).unwrap();
        assert_eq!(rec.h2, b(9228));
        assert_eq!(rec.v0.r, b(1536));
        assert_eq!(rec.bkr_rank, b(2) * b(1536) * b(1536));
        assert!(rec.dual.verdict.is_accept());
        assert_eq!(rec.dual.s_hat, Some(Dec(b(769))));
        assert!(rec.checks.all_pass());
        let expected = RationalClass::new(-&(&unit(E2) + &unit(F2)), b(2)).unwrap();
        let got = BrauerClass::new(rec.alpha_x.clone(), e2().pic_basis);
        assert!(brauer_equal(&got, &BrauerClass::new(expected, e2().pic_basis)).unwrap());
    }

    #[test]
    fn minimality_rescan() {
        for seed in 0..20u64 {
            let inst = random_instance(2 + (seed % 3) as u32, 2, &b(4), 3, seed).unwrap();
            let rec = run(&inst, &Budgets::default()).unwrap();
            let l = inst.lattice().unwrap();
            let c0c1 = &inst.c0 * &rec.c1;
            let mut u = BigInt::one();
            while u < rec.u {
                assert!(!d_condition(&l, &rec.a, &rec.omega, &u, &c0c1).unwrap());
                u += 1;
            }
            assert!(d_condition(&l, &rec.a, &rec.omega, &rec.u, &c0c1).unwrap());
            assert!(l.pair(&rec.d_class, &inst.b_field).unwrap().is_zero());
            assert_eq!(l.pair(&rec.d_class, &inst.wall).unwrap(), rec.c1);
        }
    }
}
