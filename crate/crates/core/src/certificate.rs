//! Certificates: the instance, every constructed value, and the verdict of
//! each predicate, plus a verifier that re-evaluates all predicates from
//! the recorded values.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::check::Report;
use crate::construction::{
    self, b_multiplier, d_condition, dual_mukai_check, find_a, find_omega, mukai_checks, mukai_data,
    pushforward_class, transport_source, transport_target, Budgets, ConstructionRecord, MukaiVector,
};
use crate::error::{Error, Result};
use crate::instance::{brauer_equal, factorial, normalize_brauer, validate_instance, BrauerClass, HkInstance};
use crate::instance::DEFAULT_NORMALIZE_BOUND;
use crate::lattice::{GramLattice, Isometry, LatticeVector, LAMBDA_RANK};
use crate::obstruction::{wall_certificate, WallCertificate};

pub const SCHEMA_VERSION: &str = "hkcert/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
// Larger n would make n!·rⁿ unreasonably big for a tampered certificate.
const MAX_N: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: String,
    pub tool_version: String,
    pub instance: HkInstance,
    pub budgets: Budgets,
    pub record: ConstructionRecord,
    pub wall: WallCertificate,
    pub checks: Report,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Normalizes the B-field if needed, runs the pipeline, and assembles the
/// certificate.
pub fn construct(inst: &HkInstance, budgets: &Budgets) -> Result<Certificate> {
    let report = validate_instance(inst);
    let only_b_norm = report.failures().all(|c| c.name == "b-field-positive-norm");
    let inst = if !report.all_pass() && only_b_norm {
        normalize_brauer(inst, DEFAULT_NORMALIZE_BOUND)?
    } else {
        inst.clone()
    };
    let record = construction::run(&inst, budgets)?;
    let wall = wall_certificate(&record.g, &record.c1, &inst.c0)?;
    let mut checks = validate_instance(&inst);
    checks.extend(record.checks.clone());
    checks.extend(wall_checks(&inst, &record, &wall));
    if let Some(bad) = checks.first_failure() {
        return Err(Error::InvariantViolated(format!("{}: {}", bad.name, bad.details)));
    }
    Ok(Certificate {
        schema_version: SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        instance: inst,
        budgets: *budgets,
        record,
        wall,
        checks,
    })
}

/// Re-evaluates every predicate of a certificate. The certificate is valid
/// iff every entry of the returned report passes.
pub fn verify(cert: &Certificate) -> Report {
    let mut out = Report::default();
    out.push(
        "schema-version",
        cert.schema_version == SCHEMA_VERSION,
        format!("{:?}", cert.schema_version),
    );
    let validation = validate_instance(&cert.instance);
    let pipeline = record_checks(&cert.instance, &cert.record, &cert.budgets);
    let wall = wall_checks(&cert.instance, &cert.record, &cert.wall);
    out.push(
        "record-checks-match",
        pipeline == cert.record.checks,
        mismatch_details(&cert.record.checks, &pipeline.checks),
    );
    let mut recomputed = validation;
    recomputed.extend(pipeline);
    recomputed.extend(wall);
    out.extend(recomputed.clone());
    out.push(
        "certificate-checks-match",
        recomputed == cert.checks,
        mismatch_details(&cert.checks, &recomputed.checks),
    );
    out
}

fn mismatch_details(recorded: &Report, recomputed: &[crate::check::Check]) -> String {
    if recorded.checks.len() != recomputed.len() {
        return format!(
            "{} recorded checks, {} recomputed",
            recorded.checks.len(),
            recomputed.len()
        );
    }
    let diffs: Vec<&str> = recorded
        .checks
        .iter()
        .zip(recomputed)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.name.as_str())
        .collect();
    if diffs.is_empty() {
        String::new()
    } else {
        format!("differs at {}", diffs.join(", "))
    }
}

fn wall_checks(inst: &HkInstance, record: &ConstructionRecord, wall: &WallCertificate) -> Report {
    let mut r = Report::default();
    match wall_certificate(&record.g, &record.c1, &inst.c0) {
        Ok(fresh) => r.push(
            "wall-certificate-recomputed",
            &fresh == wall,
            format!("g = {}, C1 = {}, C0 = {}", fresh.g, fresh.c1, fresh.c0),
        ),
        Err(e) => r.push("wall-certificate-recomputed", false, e.to_string()),
    }
    let remainders_nonzero = wall.tested_a.iter().all(|t| !t.remainder.is_zero());
    r.push(
        "wall-verdict",
        wall.verdict && remainders_nonzero,
        format!("{} coefficients tested", wall.tested_a.len()),
    );
    r
}

struct Ctx<'a> {
    inst: &'a HkInstance,
    lattice: &'a GramLattice,
    r: Report,
}

impl Ctx<'_> {
    fn push(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((verdict, details)) => self.r.push(name, verdict, details),
            Err(e) => self.r.push(name, false, e.to_string()),
        }
    }

    fn rank_ok(&self, v: &LatticeVector) -> Result<()> {
        if v.rank() != LAMBDA_RANK {
            return Err(Error::InvalidArgument(format!("vector of rank {}", v.rank())));
        }
        Ok(())
    }

    fn div_is_one(&self, v: &LatticeVector) -> Result<(bool, String)> {
        self.rank_ok(v)?;
        if v.is_zero() {
            return Ok((false, "zero vector".into()));
        }
        let div = self.lattice.divisibility(v)?;
        Ok((div.is_one(), format!("div = {div}")))
    }

    fn in_pic(&self, v: &LatticeVector, coeffs: &[BigInt]) -> Result<(bool, String)> {
        self.rank_ok(v)?;
        if coeffs.len() != self.inst.pic_rank() {
            return Ok((false, format!("{} coefficients for Picard rank {}", coeffs.len(), self.inst.pic_rank())));
        }
        let combo = self.inst.pic_combination(coeffs);
        Ok((&combo == v, format!("coefficients {}", join(coeffs))))
    }
}

/// The predicates on a construction record, evaluated from the instance
/// and the recorded values only. Construction and verification share this
/// evaluator.
pub fn record_checks(inst: &HkInstance, rec: &ConstructionRecord, budgets: &Budgets) -> Report {
    let ranks_ok = inst
        .pic_basis
        .iter()
        .chain([&inst.wall, &inst.b_field])
        .all(|v| v.rank() == LAMBDA_RANK);
    let lattice = match inst.lattice() {
        Ok(_) if !ranks_ok => {
            let mut r = Report::default();
            r.push("lattice", false, "instance vectors do not have rank 23");
            return r;
        }
        Ok(l) if inst.n <= MAX_N => l,
        Ok(_) => {
            let mut r = Report::default();
            r.push("lattice", false, format!("n = {} exceeds {MAX_N}", inst.n));
            return r;
        }
        Err(e) => {
            let mut r = Report::default();
            r.push("lattice", false, e.to_string());
            return r;
        }
    };
    let mut c = Ctx {
        inst,
        lattice: &lattice,
        r: Report::default(),
    };
    let l = &lattice;
    let two = BigInt::from(2);
    let d = &inst.d;
    let params_positive = rec.g.is_positive() && rec.t.is_positive() && d.is_positive() && rec.u.is_positive();

    c.push("a-in-pic", c.in_pic(&rec.a, &rec.a_coeffs));
    c.push("a-divisibility-1", c.div_is_one(&rec.a));
    c.push(
        "a-pairs-wall-c1",
        c.rank_ok(&rec.a).and_then(|_| {
            let p = l.pair(&rec.a, &inst.wall)?;
            Ok((p == rec.c1 && p.is_positive(), format!("(A, W) = {p}, C1 = {}", rec.c1)))
        }),
    );
    c.push(
        "a-minimal",
        find_a(inst, budgets.coeff_bound).map(|a| {
            (a.vector == rec.a && a.coeffs == rec.a_coeffs, format!("first admissible A = {:?}", a.vector))
        }),
    );
    c.push("omega-in-pic", c.in_pic(&rec.omega, &rec.omega_coeffs));
    c.push(
        "omega-orthogonal-to-wall",
        c.rank_ok(&rec.omega).and_then(|_| {
            let p = l.pair(&rec.omega, &inst.wall)?;
            Ok((p.is_zero(), format!("(omega, W) = {p}")))
        }),
    );
    c.push(
        "omega-positive-norm",
        c.rank_ok(&rec.omega).and_then(|_| {
            let n = l.norm(&rec.omega)?;
            Ok((n.is_positive(), format!("omega^2 = {n}")))
        }),
    );
    c.push(
        "omega-minimal",
        find_omega(inst, budgets.coeff_bound).map(|w| {
            (w.vector == rec.omega && w.coeffs == rec.omega_coeffs, format!("first admissible omega = {:?}", w.vector))
        }),
    );
    c.push(
        "d-equals-a-plus-u-omega",
        c.rank_ok(&rec.d_class).and(c.rank_ok(&rec.omega)).and(c.rank_ok(&rec.a)).map(|_| {
            let expected = &rec.a + &rec.omega.scale(&rec.u);
            (rec.u.is_positive() && expected == rec.d_class, format!("u = {}", rec.u))
        }),
    );
    c.push(
        "d-norm-2g",
        c.rank_ok(&rec.d_class).and_then(|_| {
            let n = l.norm(&rec.d_class)?;
            Ok((n == &two * &rec.g, format!("D^2 = {n}, g = {}", rec.g)))
        }),
    );
    c.push(
        "d-pairs-wall-c1",
        c.rank_ok(&rec.d_class).and_then(|_| {
            let p = l.pair(&rec.d_class, &inst.wall)?;
            Ok((p == rec.c1, format!("(D, W) = {p}")))
        }),
    );
    let c0c1 = &inst.c0 * &rec.c1;
    c.push(
        "g-exceeds-c0-c1",
        Ok((rec.g > c0c1, format!("g = {}, C0*C1 = {c0c1}", rec.g))),
    );
    c.push("d-divisibility-1", c.div_is_one(&rec.d_class));
    c.push(
        "d-orthogonal-to-b",
        c.rank_ok(&rec.d_class).and_then(|_| {
            let p = l.pair(&rec.d_class, &inst.b_field)?;
            Ok((p.is_zero(), format!("(D, B) = {p}")))
        }),
    );
    c.push(
        "u-minimal",
        c.rank_ok(&rec.a).and(c.rank_ok(&rec.omega)).and_then(|_| {
            if !rec.u.is_positive() || rec.u > BigInt::from(budgets.u) {
                return Ok((false, format!("u = {} outside [1, {}]", rec.u, budgets.u)));
            }
            let mut u = BigInt::one();
            while u < rec.u {
                if d_condition(l, &rec.a, &rec.omega, &u, &c0c1)? {
                    return Ok((false, format!("u = {u} already admissible")));
                }
                u += 1;
            }
            Ok((true, format!("no u < {} admissible", rec.u)))
        }),
    );

    let t_condition = |t: &BigInt| -> Result<bool> {
        let v = &rec.d_class + &inst.b_field.scale(&b_multiplier(&rec.g, t, d));
        Ok(!v.is_zero() && l.divisibility(&v)?.is_one())
    };
    c.push(
        "t-divisibility-1",
        c.rank_ok(&rec.d_class).and_then(|_| {
            Ok((rec.t.is_positive() && t_condition(&rec.t)?, format!("t = {}", rec.t)))
        }),
    );
    c.push(
        "t-minimal",
        c.rank_ok(&rec.d_class).and_then(|_| {
            if !rec.t.is_positive() || rec.t > BigInt::from(budgets.t) {
                return Ok((false, format!("t = {} outside [1, {}]", rec.t, budgets.t)));
            }
            let mut t = BigInt::one();
            while t < rec.t {
                if t_condition(&t)? {
                    return Ok((false, format!("t = {t} already admissible")));
                }
                t += 1;
            }
            Ok((true, format!("no t < {} admissible", rec.t)))
        }),
    );
    c.push(
        "e-from-b-norm",
        l.norm(&inst.b_field).map(|n| {
            (n == &two * &rec.e && rec.e.is_positive(), format!("B^2 = {n}, e = {}", rec.e))
        }),
    );

    let n = BigInt::from(inst.n);
    let fresh = mukai_data(&n, &rec.g, &rec.t, d, &rec.e);
    c.push(
        "degree-formula",
        Ok((fresh.h2 == rec.h2, format!("H2 = {}, 2g(1 + 4gt^2d^4(n-1) + 16gt^2d^2e) = {}", rec.h2, fresh.h2))),
    );
    c.push(
        "mukai-formula",
        Ok((
            fresh == rec.v0,
            format!("v0 = ({}, {}, {}), expected ({}, {}, {})", rec.v0.r, rec.v0.m, rec.v0.s, fresh.r, fresh.m, fresh.s),
        )),
    );
    let mut mk = mukai_checks(&rec.v0, &rec.g, &rec.t, d);
    let with_record_h2 = MukaiVector {
        h2: rec.h2.clone(),
        ..rec.v0.clone()
    };
    if let Some(iso) = mk.checks.iter_mut().find(|x| x.name == "mukai-isotropic") {
        let sp = with_record_h2.self_pairing();
        iso.verdict &= sp.is_zero();
        iso.details = format!("{}; with record H2: {sp}", iso.details);
    }
    c.r.extend(mk);
    let dual = dual_mukai_check(&rec.v0, &rec.v0.m, &rec.t, d);
    c.push(
        "dual-mukai-accept",
        Ok((
            dual == rec.dual && dual.verdict.is_accept(),
            format!("k = {}, verdict {:?}", dual.k, dual.verdict),
        )),
    );

    let source = transport_source(&rec.h2, &rec.g, &rec.t, d);
    c.push(
        "source-canonical",
        Ok((source == rec.source, "h - 2gtd^2 delta with h = e1 + (H2/2) f1".into())),
    );
    let target = transport_target(inst, &rec.d_class, &rec.g, &rec.t);
    c.push(
        "target-formula",
        Ok((target == rec.target, "D + 4gtd B".into())),
    );
    c.push(
        "transport-norms-equal",
        c.rank_ok(&rec.source).and(c.rank_ok(&rec.target)).and_then(|_| {
            let (ns, nt) = (l.norm(&rec.source)?, l.norm(&rec.target)?);
            Ok((ns == nt, format!("source^2 = {ns}, target^2 = {nt}")))
        }),
    );
    c.push(
        "transport-divisibility-1",
        c.div_is_one(&rec.source).and_then(|(a, da)| {
            let (b, db) = c.div_is_one(&rec.target)?;
            Ok((a && b, format!("source {da}, target {db}")))
        }),
    );
    let eps_ok = rec.epsilon.abs().is_one();
    c.push("epsilon-sign", Ok((eps_ok, format!("epsilon = {}", rec.epsilon))));

    let m = rec.sigma.matrix();
    let shape_ok = m.is_square() && m.rows() == LAMBDA_RANK;
    c.push("sigma-shape", Ok((shape_ok, format!("{}x{}", m.rows(), m.cols()))));
    if shape_ok {
        let sigma: &Isometry = &rec.sigma;
        c.push("sigma-preserves-gram", Ok((sigma.preserves_gram(l), "sigma^T G sigma = G".into())));
        let det = sigma.determinant();
        c.push("sigma-determinant", Ok((det.abs().is_one(), format!("det = {det}"))));
        c.push(
            "sigma-trivial-on-discriminant",
            Ok((sigma.acts_trivially_on_discriminant(l), String::new())),
        );
        c.push(
            "sigma-maps-source-to-target",
            c.rank_ok(&rec.source).and(c.rank_ok(&rec.target)).map(|_| {
                (sigma.apply(&rec.source) == rec.target.scale(&rec.epsilon), format!("epsilon = {}", rec.epsilon))
            }),
        );
        let alpha = if params_positive {
            pushforward_class(&rec.h2, &rec.g, &rec.t, d, &rec.epsilon).map(|q| sigma.apply_rational(&q).neg())
        } else {
            Err(Error::InvalidArgument("g, t, d, u must be positive".into()))
        };
        c.push(
            "alpha-x-recomputed",
            alpha.as_ref().map_err(Clone::clone).map(|a| {
                (a == &rec.alpha_x, format!("denominator {}", a.denominator()))
            }),
        );
        c.push(
            "alpha-x-equals-b-field",
            (|| -> Result<(bool, String)> {
                if !rec.alpha_x.is_normalized() || rec.alpha_x.rank() != LAMBDA_RANK {
                    return Ok((false, "alpha_X is not a normalized class".into()));
                }
                let ax = BrauerClass::new(rec.alpha_x.clone(), inst.pic_basis.clone());
                Ok((brauer_equal(&ax, &inst.brauer_class()?)?, "[-sigma(q)] = [-B/d]".into()))
            })(),
        );
    }
    let rank = factorial(inst.n) * rec.v0.r.pow(inst.n);
    c.push(
        "bkr-rank",
        Ok((rank == rec.bkr_rank, format!("n! r^n = {rank}"))),
    );
    c.r
}

fn join(xs: &[BigInt]) -> String {
    let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::e2;

    #[test]
    fn worked_certificate_round_trip() {
        let cert = construct(&e2(), &Budgets::default()).unwrap();
        assert!(cert.checks.all_pass());
        let json = cert.to_json();
        let back = Certificate::from_json(&json).unwrap();
        assert_eq!(back, cert);
        let report = verify(&back);
        assert!(report.all_pass(), "{:?}", report.first_failure());
    }

    #[test]
    fn tampered_sigma_is_caught() {
        let mut cert = construct(&e2(), &Budgets::default()).unwrap();
        let mut rows = cert.record.sigma.matrix().to_rows();
        rows[0][0] += 1;
        cert.record.sigma = Isometry::unchecked(crate::matrix::IntMatrix::from_rows(rows).unwrap());
        let r = verify(&cert);
        assert!(!r.get("sigma-preserves-gram").unwrap().verdict);
    }

    #[test]
    fn decremented_degree_breaks_isotropy() {
        let mut cert = construct(&e2(), &Budgets::default()).unwrap();
        cert.record.h2 -= 2;
        let r = verify(&cert);
        assert!(!r.get("mukai-isotropic").unwrap().verdict);
    }

    #[test]
    fn negative_b_field_is_normalized() {
        let mut inst = e2();
        inst.b_field = &LatticeVector::basis(LAMBDA_RANK, 2) - &LatticeVector::basis(LAMBDA_RANK, 3);
        inst.d = BigInt::one();
        let cert = construct(&inst, &Budgets::default()).unwrap();
        assert!(l_norm_positive(&cert));
        assert!(verify(&cert).all_pass());
    }

    fn l_norm_positive(cert: &Certificate) -> bool {
        let l = cert.instance.lattice().unwrap();
        l.norm(&cert.instance.b_field).unwrap().is_positive()
    }
}
