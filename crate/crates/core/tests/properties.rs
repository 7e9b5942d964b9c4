use hkcert_core::certificate::{construct, verify};
use hkcert_core::construction::{pushforward_brauer, transport_with_sign, Budgets};
use hkcert_core::instance::{brauer_equal, normalize_brauer, random_instance, BrauerClass, DEFAULT_NORMALIZE_BOUND};
use hkcert_core::lattice::{
    build_lambda, in_span_plus_lattice, GramLattice, Isometry, LatticeVector, RationalClass, Transvection,
    DEFAULT_ISOMETRY_BUDGET, LAMBDA_RANK,
};
use hkcert_core::matrix::{is_unimodular, smith_normal_form, IntMatrix};
use hkcert_core::obstruction::proportionality_bound;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn b(x: i64) -> BigInt {
    BigInt::from(x)
}

/// Rank-6 nondegenerate lattices built from U, A₂(−1) and rank-one blocks.
fn small_lattice(kind: u8) -> GramLattice {
    let blocks: Vec<Vec<Vec<i64>>> = match kind % 4 {
        0 => vec![vec![vec![0, 1], vec![1, 0]], vec![vec![0, 1], vec![1, 0]], vec![vec![-2]], vec![vec![-2]]],
        1 => vec![vec![vec![0, 1], vec![1, 0]], vec![vec![-2, 1], vec![1, -2]], vec![vec![-4]], vec![vec![6]]],
        2 => vec![vec![vec![-2, 1], vec![1, -2]], vec![vec![-2, 1], vec![1, -2]], vec![vec![-6]], vec![vec![-2]]],
        _ => vec![vec![vec![0, 1], vec![1, 0]], vec![vec![0, 1], vec![1, 0]], vec![vec![0, 1], vec![1, 0]]],
    };
    let n: usize = blocks.iter().map(Vec::len).sum();
    let mut g = vec![vec![0i64; n]; n];
    let mut off = 0;
    for blk in &blocks {
        for (i, row) in blk.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                g[off + i][off + j] = *x;
            }
        }
        off += blk.len();
    }
    let rows: Vec<&[i64]> = g.iter().map(Vec::as_slice).collect();
    GramLattice::new(IntMatrix::from_i64_rows(&rows).unwrap(), "test").unwrap()
}

fn brute_divisibility(l: &GramLattice, v: &LatticeVector) -> BigInt {
    let n = l.rank();
    let mut g = BigInt::zero();
    let mut x = vec![-2i64; n];
    loop {
        let xv = LatticeVector::from_i64s(&x);
        g = g.gcd(&l.pair(v, &xv).unwrap());
        let mut i = 0;
        while i < n && x[i] == 2 {
            x[i] = -2;
            i += 1;
        }
        if i == n {
            return g;
        }
        x[i] += 1;
    }
}

fn nonzero_vec(rank: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, rank).prop_filter("nonzero", |v| v.iter().any(|x| *x != 0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divisibility_matches_brute_force(kind in 0u8..4, coords in nonzero_vec(6)) {
        let l = small_lattice(kind);
        let v = LatticeVector::from_i64s(&coords);
        prop_assert_eq!(l.divisibility(&v).unwrap(), brute_divisibility(&l, &v));
    }

    #[test]
    fn divisibility_scales(kind in 0u8..4, coords in nonzero_vec(6), k in -7i64..=7) {
        prop_assume!(k != 0);
        let l = small_lattice(kind);
        let v = LatticeVector::from_i64s(&coords);
        prop_assume!(v.content().is_one());
        let kv = v.scale(&b(k));
        prop_assert_eq!(l.divisibility(&kv).unwrap(), b(k.abs()) * l.divisibility(&v).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smith_form_identity(
        (r, c, entries) in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), prop::collection::vec(-9i64..=9, r * c))
        })
    ) {
        let rows: Vec<&[i64]> = entries.chunks(c).collect();
        let m = IntMatrix::from_i64_rows(&rows).unwrap();
        let s = smith_normal_form(&m);
        prop_assert!(is_unimodular(&s.u));
        prop_assert!(is_unimodular(&s.v));
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert!(s.d.is_diagonal());
        let diag: Vec<BigInt> = (0..r.min(c)).map(|i| s.d[(i, i)].clone()).collect();
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!(w[1].is_multiple_of(&w[0]));
            }
        }
    }
}

fn lambda_vec(terms: &[(usize, i64)]) -> LatticeVector {
    let mut c = vec![BigInt::zero(); LAMBDA_RANK];
    for &(i, x) in terms {
        c[i] += x;
    }
    LatticeVector::new(c)
}

fn small_lambda_vec() -> impl Strategy<Value = LatticeVector> {
    prop::collection::vec((0usize..LAMBDA_RANK, -3i64..=3), 1..5).prop_map(|t| lambda_vec(&t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometry_between_maps_and_preserves(
        n in 2u32..=4,
        v in small_lambda_vec(),
        moves in prop::collection::vec((0usize..4, 0usize..LAMBDA_RANK, -2i64..=2), 1..6),
    ) {
        let l = build_lambda(n).unwrap();
        prop_assume!(!v.is_zero() && v.content().is_one());
        prop_assume!(l.divisibility(&v).unwrap().is_one());
        // A random image: transvections with isotropic e from U₁ or U₂ and
        // a orthogonal to it.
        let mut w = v.clone();
        for (ei, ai, k) in moves {
            let e = LatticeVector::basis(LAMBDA_RANK, ei);
            let partner = ei ^ 1;
            if ai == partner || ai == ei || k == 0 {
                continue;
            }
            let a = LatticeVector::basis(LAMBDA_RANK, ai).scale(&b(k));
            let t = Transvection::new(&l, &e, &a).unwrap();
            w = t.apply(&w);
        }
        let sigma = Isometry::between(&l, &v, &w, DEFAULT_ISOMETRY_BUDGET).unwrap();
        prop_assert_eq!(sigma.apply(&v), w.clone());
        prop_assert!(sigma.preserves_gram(&l));
        prop_assert!(sigma.determinant().is_one());
        prop_assert!(sigma.acts_trivially_on_discriminant(&l));
        let x = LatticeVector::basis(LAMBDA_RANK, 22);
        prop_assert_eq!(l.norm(&sigma.apply(&x)).unwrap(), l.norm(&x).unwrap());
        prop_assert_eq!(l.divisibility(&sigma.apply(&v)).unwrap(), l.divisibility(&v).unwrap());
    }

    #[test]
    fn brauer_equality_is_an_equivalence(
        seed in 0u64..500,
        xs in prop::collection::vec(small_lambda_vec(), 3),
        ds in prop::collection::vec(1i64..=4, 3),
        shift in prop::collection::vec(-3i64..=3, 4),
    ) {
        let inst = random_instance(2, 2, &b(3), 3, seed).unwrap();
        let pic = inst.pic_basis.clone();
        let class = |x: &LatticeVector, d: i64| {
            BrauerClass::new(RationalClass::new(x.clone(), b(d)).unwrap(), pic.clone())
        };
        let cls: Vec<BrauerClass> = xs.iter().zip(&ds).map(|(x, d)| class(x, *d)).collect();
        // x₀/d₀ + P/5 + λ, equal to cls[0] by construction.
        let p = inst.pic_combination(&[b(shift[0]), b(shift[1])]);
        let lam = lambda_vec(&[(2, shift[2]), (14, shift[3])]);
        let moved = &(&xs[0].scale(&b(5)) + &p.scale(&b(ds[0]))) + &lam.scale(&b(5 * ds[0]));
        let same = BrauerClass::new(RationalClass::new(moved, b(5 * ds[0])).unwrap(), pic.clone());
        prop_assert!(brauer_equal(&cls[0], &same).unwrap());
        for a in cls.iter().chain([&same]) {
            prop_assert!(brauer_equal(a, a).unwrap());
            for c in cls.iter().chain([&same]) {
                let ab = brauer_equal(a, c).unwrap();
                prop_assert_eq!(ab, brauer_equal(c, a).unwrap());
                for e in cls.iter().chain([&same]) {
                    if ab && brauer_equal(c, e).unwrap() {
                        prop_assert!(brauer_equal(a, e).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn normalize_keeps_class(seed in 0u64..1000, lam in prop::collection::vec(-2i64..=2, 4)) {
        let mut inst = random_instance(2 + (seed % 3) as u32, 2, &b(4), 3, seed).unwrap();
        // Push B to a non-positive norm while keeping it in Pic^⊥: U₂ ⊕ U₃ is
        // orthogonal to every generated Picard class.
        let shift = lambda_vec(&[(2, lam[0]), (3, lam[1]), (4, lam[2]), (5, lam[3])]);
        let candidate = &inst.b_field + &shift.scale(&inst.d);
        prop_assume!(!candidate.is_zero() && candidate.content().is_one());
        let before = inst.clone();
        inst.b_field = candidate;
        if let Ok(out) = normalize_brauer(&inst, DEFAULT_NORMALIZE_BOUND) {
            let l = out.lattice().unwrap();
            prop_assert!(l.norm(&out.b_field).unwrap().is_positive());
            prop_assert!(brauer_equal(&out.brauer_class().unwrap(), &before.brauer_class().unwrap()).unwrap());
        }
    }
}

/// Brute-force membership in `span_ℚ(S) + ℤ^N`: with `Δ` a nonzero maximal
/// minor of `S`, any admissible rational coefficients can be taken in
/// `(1/(den·Δ))·[0, den·Δ)`.
fn brute_in_span(x: &[i64], den: i64, span: &[Vec<i64>]) -> Option<bool> {
    let r = span.len();
    let n = x.len();
    let minor = |rows: &[usize]| -> i64 {
        let m = |i: usize, j: usize| span[j][rows[i]];
        match r {
            1 => m(0, 0),
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            _ => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
        }
    };
    if r == 0 {
        return Some(x.iter().all(|c| c % den == 0));
    }
    let mut delta = 0i64;
    fn combos(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            combos(i + 1, k, n, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    combos(0, r, n, &mut Vec::new(), &mut all);
    for rows in all {
        let m = minor(&rows).abs();
        if m != 0 && (delta == 0 || m < delta) {
            delta = m;
        }
    }
    if delta == 0 {
        return None;
    }
    let modulus = den * delta;
    if modulus.pow(r as u32) > 200_000 {
        return None;
    }
    // q − Σ (kᵢ/modulus)·sᵢ integral ⇔ x·Δ − Σ kᵢ·sᵢ ≡ 0 mod modulus.
    let mut k = vec![0i64; r];
    loop {
        let ok = (0..n).all(|i| {
            let s: i64 = (0..r).map(|j| k[j] * span[j][i]).sum();
            (x[i] * delta - s).rem_euclid(modulus) == 0
        });
        if ok {
            return Some(true);
        }
        let mut j = 0;
        while j < r && k[j] == modulus - 1 {
            k[j] = 0;
            j += 1;
        }
        if j == r {
            return Some(false);
        }
        k[j] += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn in_span_matches_brute_force(
        x in prop::collection::vec(-4i64..=4, 6),
        den in 1i64..=4,
        span in prop::collection::vec(prop::collection::vec(-2i64..=2, 6), 0..=3),
    ) {
        let Some(expected) = brute_in_span(&x, den, &span) else {
            return Ok(());
        };
        let pad = |v: &[i64]| {
            let mut c = v.to_vec();
            c.resize(LAMBDA_RANK, 0);
            LatticeVector::from_i64s(&c)
        };
        let q = RationalClass::new(pad(&x), b(den)).unwrap();
        let s: Vec<LatticeVector> = span.iter().map(|v| pad(v)).collect();
        prop_assert_eq!(in_span_plus_lattice(&q, &s).unwrap(), expected);
    }
}

#[test]
fn proportionality_matches_double_loop() {
    for c0 in 1..=100i64 {
        let mut expected = Vec::new();
        for a in 1..=10i64 {
            for bb in 1..=10i64 {
                if a * a < c0 && bb * bb < c0 && a.gcd(&bb) == 1 {
                    expected.push((b(a), b(bb)));
                }
            }
        }
        assert_eq!(proportionality_bound(&b(c0)), expected, "C0 = {c0}");
    }
}

#[test]
fn pipeline_properties_on_random_instances() {
    for seed in 0..24u64 {
        let n = 2 + (seed % 4) as u32;
        let rho = 2 + (seed % 2) as usize;
        let c0 = b(3 + (seed % 4) as i64);
        let inst = random_instance(n, rho, &c0, 4, seed).unwrap();
        let cert = construct(&inst, &Budgets::default()).unwrap();
        assert!(verify(&cert).all_pass(), "seed {seed}");
        let r = &cert.record;
        let l = inst.lattice().unwrap();
        assert!(r.v0.self_pairing().is_zero());
        assert_eq!(l.norm(&r.source).unwrap(), l.norm(&r.target).unwrap());
        assert!(r.g > &inst.c0 * &r.c1);
        // ε-independence of α_X.
        let mut alphas = Vec::new();
        for eps in [1i8, -1] {
            let tr = transport_with_sign(&inst, &r.d_class, &r.g, &r.t, &r.h2, eps, DEFAULT_ISOMETRY_BUDGET).unwrap();
            let (alpha, ok) = pushforward_brauer(&inst, &tr.sigma, &r.g, &r.t, &r.h2, &tr.epsilon).unwrap();
            assert!(ok);
            alphas.push(alpha);
        }
        assert!(brauer_equal(&alphas[0], &alphas[1]).unwrap());
    }
}
