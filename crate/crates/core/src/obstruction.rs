//! Wall obstruction arithmetic: the MBM norm bound, the coefficient bound
//! for proportional MBM classes, and the divisibility certificate showing
//! the transported wall class is not proportional to any MBM class.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GramLattice, LatticeVector};

/// `W` primitive with `0 < −W² < C₀`.
pub fn mbm_bound_check(lattice: &GramLattice, wall: &LatticeVector, c0: &BigInt) -> Result<bool> {
    if !lattice.is_primitive(wall)? {
        return Ok(false);
    }
    let minus_norm = -lattice.norm(wall)?;
    Ok(minus_norm.is_positive() && &minus_norm < c0)
}

/// Positive integers `a` with `1 ≤ a² < C₀`, ascending.
pub fn admissible_coefficients(c0: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut a = BigInt::one();
    while &(&a * &a) < c0 {
        out.push(a.clone());
        a += 1;
    }
    out
}

/// All coprime `(a, b)` with `1 ≤ a² < C₀` and `1 ≤ b² < C₀`, lexicographic.
pub fn proportionality_bound(c0: &BigInt) -> Vec<(BigInt, BigInt)> {
    let coeffs = admissible_coefficients(c0);
    let mut out = Vec::new();
    for a in &coeffs {
        for b in &coeffs {
            if a.gcd(b).is_one() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// The divisor that integrality of a transported class forces on
/// `(H, a·W_K3)`: `r / gcd(r, 4td²·k)` with `r = 16gt²d⁴`.
pub fn wall_divisor(r: &BigInt, k: &BigInt, t: &BigInt, d: &BigInt) -> BigInt {
    let four_t_d2 = BigInt::from(4) * t * d * d;
    r / r.gcd(&(four_t_d2 * k))
}

/// One tested coefficient: `a` and `a·C₁ mod g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestedCoefficient {
    #[serde(with = "crate::dec::int")]
    pub a: BigInt,
    #[serde(with = "crate::dec::int")]
    pub remainder: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallCertificate {
    #[serde(with = "crate::dec::int")]
    pub g: BigInt,
    #[serde(rename = "C1", with = "crate::dec::int")]
    pub c1: BigInt,
    #[serde(rename = "C0", with = "crate::dec::int")]
    pub c0: BigInt,
    pub tested_a: Vec<TestedCoefficient>,
    pub verdict: bool,
}

/// Certifies `g ∤ a·C₁` for every admissible `a`.
///
/// Requires `g > C₀·C₁`; then `0 < a·C₁ < a²·C₁ < C₀·C₁ < g` forces every
/// remainder to be nonzero.
pub fn wall_certificate(g: &BigInt, c1: &BigInt, c0: &BigInt) -> Result<WallCertificate> {
    if !g.is_positive() || !c1.is_positive() || !c0.is_positive() {
        return Err(Error::InvalidParameter("g, C1, C0 must be positive".into()));
    }
    if g <= &(c0 * c1) {
        return Err(Error::InvalidParameter(format!(
            "g = {g} does not exceed C0*C1 = {}",
            c0 * c1
        )));
    }
    let tested_a: Vec<TestedCoefficient> = admissible_coefficients(c0)
        .into_iter()
        .map(|a| {
            let remainder = (&a * c1).mod_floor(g);
            TestedCoefficient { a, remainder }
        })
        .collect();
    let verdict = tested_a.iter().all(|t| !t.remainder.is_zero());
    Ok(WallCertificate {
        g: g.clone(),
        c1: c1.clone(),
        c0: c0.clone(),
        tested_a,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{basis, build_lambda};

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn mbm_bound_examples() {
        let l = build_lambda(2).unwrap();
        let w = &l.basis_vector(basis::E1) + &l.basis_vector(basis::DELTA);
        assert!(mbm_bound_check(&l, &w, &b(3)).unwrap());
        assert!(!mbm_bound_check(&l, &w, &b(2)).unwrap());
        assert!(!mbm_bound_check(&l, &l.basis_vector(basis::E1), &b(3)).unwrap());
        let two_delta = l.basis_vector(basis::DELTA).scale(&b(2));
        assert!(!mbm_bound_check(&l, &two_delta, &b(100)).unwrap());
    }

    #[test]
    fn proportionality_examples() {
        assert_eq!(proportionality_bound(&b(2)), vec![(b(1), b(1))]);
        assert_eq!(
            proportionality_bound(&b(5)),
            vec![(b(1), b(1)), (b(1), b(2)), (b(2), b(1))]
        );
        assert!(proportionality_bound(&b(1)).is_empty());
    }

    #[test]
    fn wall_certificate_examples() {
        let w = wall_certificate(&b(6), &b(1), &b(3)).unwrap();
        assert_eq!(w.tested_a, vec![TestedCoefficient { a: b(1), remainder: b(1) }]);
        assert!(w.verdict);
        let w = wall_certificate(&b(3), &b(1), &b(2)).unwrap();
        assert_eq!(w.tested_a, vec![TestedCoefficient { a: b(1), remainder: b(1) }]);
        assert!(w.verdict);
        assert!(matches!(
            wall_certificate(&b(2), &b(1), &b(3)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn wall_verdict_exhaustive_small() {
        for g in 1..=50i64 {
            for c1 in 1..=50i64 {
                for c0 in 1..=50i64 {
                    if g <= c0 * c1 {
                        assert!(wall_certificate(&b(g), &b(c1), &b(c0)).is_err());
                        continue;
                    }
                    let w = wall_certificate(&b(g), &b(c1), &b(c0)).unwrap();
                    assert!(w.verdict, "g={g} C1={c1} C0={c0}");
                }
            }
        }
    }

    #[test]
    fn divisor_is_g_for_primitive_dual() {
        // r = 16gt²d⁴ with g = 6, t = 1, d = 2; k = 4td²·q, gcd(q, r) = 1.
        let (g, t, d) = (b(6), b(1), b(2));
        let r = b(16) * &g * &t * &t * &d * &d * &d * &d;
        for q in [1, 5, 7, -11] {
            let k = b(16) * b(q);
            assert_eq!(wall_divisor(&r, &k, &t, &d), g);
        }
    }
}
