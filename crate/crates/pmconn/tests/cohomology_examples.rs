use pmconn::cohomology::{
    de_rham_complex, higgs_vanishing, homogeneous_form, koszul, weight_blocks, weight_divisors, Method,
};
use pmconn::linalg::ZMat;
use pmconn::{
    compare_raised_cohomology, compute_h, hom_space, level_raise, rank1_trivial_test, Basis, Connection,
    ExtensionPresentation, FrobLift, LaurentPoly, ModularInt, PolyMatrix, RingCtx, Triviality,
};
use proptest::prelude::*;

fn poly(s: &str, ctx: RingCtx, d: usize) -> LaurentPoly {
    LaurentPoly::parse(s, ctx, d).unwrap()
}

fn nabla(s: &str, ctx: RingCtx, m: u32) -> Connection {
    Connection::nabla_f(ctx, m, poly(s, ctx, 1)).unwrap()
}

fn v_p(k: i64, p: i64) -> u32 {
    if k == 0 {
        return u32::MAX;
    }
    let (mut k, mut v) = (k.abs(), 0);
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}

/// Brute force over `(Z/p^n)^dim`: the divisor multiset of `ker(next)/im(prev)`,
/// recovered from the sizes of its `p^j`-torsion subgroups.
fn brute_subquotient(prev: Option<&ZMat>, next: Option<&ZMat>, p: u64, n: u32, dim: usize) -> Vec<u32> {
    let q = p.pow(n);
    let all: Vec<Vec<u64>> = (0..q.pow(dim as u32))
        .map(|mut x| {
            (0..dim)
                .map(|_| {
                    let r = x % q;
                    x /= q;
                    r
                })
                .collect()
        })
        .collect();
    let apply = |m: &ZMat, v: &[u64]| -> Vec<u64> {
        (0..m.rows())
            .map(|i| {
                v.iter().enumerate().fold(0u64, |acc, (j, x)| {
                    let a = u64::try_from(m.get(i, j).lift()).unwrap();
                    (acc + a * x) % q
                })
            })
            .collect()
    };
    let ker: Vec<&Vec<u64>> = all.iter().filter(|v| next.is_none_or(|m| apply(m, v).iter().all(|&x| x == 0))).collect();
    let mut image: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
    match prev {
        Some(b) => {
            let src = q.pow(b.cols() as u32);
            for mut x in 0..src {
                let v: Vec<u64> = (0..b.cols())
                    .map(|_| {
                        let r = x % q;
                        x /= q;
                        r
                    })
                    .collect();
                image.insert(apply(b, &v));
            }
        }
        None => {
            image.insert(vec![0; dim]);
        }
    }
    // |H[p^j]| = #{x in K : p^j x in I} / |I|, and the number of divisors ≥ j is log_p(|H[p^j]| / |H[p^{j−1}]|).
    let sizes: Vec<u32> = (0..=n)
        .map(|j| {
            let pj = p.pow(j);
            let c = ker.iter().filter(|v| image.contains(&v.iter().map(|x| x * pj % q).collect::<Vec<_>>())).count();
            let mut ratio = c / image.len();
            let mut e = 0;
            while ratio > 1 {
                ratio /= p as usize;
                e += 1;
            }
            e
        })
        .collect();
    let mut out = Vec::new();
    for j in 1..=n as usize {
        let at_least_j = sizes[j] - sizes[j - 1];
        let at_least_next = if j < n as usize { sizes[j + 1] - sizes[j] } else { 0 };
        for _ in 0..(at_least_j - at_least_next) {
            out.push(j as u32);
        }
    }
    out.sort_unstable();
    out
}

#[test]
fn weight_block_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let triv = Connection::trivial(ctx, 1, 0, 1);
    let h = homogeneous_form(&triv).unwrap();
    for k in -5..=5 {
        assert_eq!(weight_blocks(&triv, &h, &[k])[0], ZMat::from_i64(ctx, &[vec![k]]));
    }
    let m = 2;
    let c = nabla("4", ctx, m);
    let h = homogeneous_form(&c).unwrap();
    for k in -5..=5 {
        assert_eq!(weight_blocks(&c, &h, &[k])[0], ZMat::from_i64(ctx, &[vec![9 * k + 4]]));
    }
    let nil = Connection::new(
        ctx,
        1,
        m,
        vec![PolyMatrix::from_rows(vec![
            vec![poly("0", ctx, 1), poly("1", ctx, 1)],
            vec![poly("0", ctx, 1), poly("0", ctx, 1)],
        ])
        .unwrap()],
    )
    .unwrap();
    let h = homogeneous_form(&nil).unwrap();
    for k in -3..=3 {
        assert_eq!(weight_blocks(&nil, &h, &[k])[0], ZMat::from_i64(ctx, &[vec![9 * k, 1], vec![0, 9 * k]]));
    }
    assert!(homogeneous_form(&nabla("t", ctx, 0)).is_none());
    // A shifted off-diagonal entry is still homogeneous.
    let shifted = Connection::new(
        ctx,
        1,
        1,
        vec![PolyMatrix::from_rows(vec![
            vec![poly("0", ctx, 1), poly("t^2", ctx, 1)],
            vec![poly("0", ctx, 1), poly("0", ctx, 1)],
        ])
        .unwrap()],
    )
    .unwrap();
    assert_eq!(
        homogeneous_form(&shifted).unwrap().shifts[0].0[0] - homogeneous_form(&shifted).unwrap().shifts[1].0[0],
        2
    );
}

#[test]
fn trivial_cohomology_examples() {
    let (p, n) = (3u64, 3u32);
    let ctx = RingCtx::new(p, n).unwrap();
    let triv = Connection::trivial(ctx, 1, 0, 1);
    // d(t^k) = k t^k dlog t, so both groups are Z/p^{min(v_p(k), n)} at weight k; only weight 0 is free.
    let h0 = compute_h(&triv, 0, 12).unwrap();
    let h1 = compute_h(&triv, 1, 12).unwrap();
    assert_eq!(h0.free_rank, 1);
    assert_eq!(h0.at(&[0]), &[n]);
    assert_eq!(h0.method, Method::Weight);
    assert!(h0.stable);
    for k in -12..=12i64 {
        let e = v_p(k, p as i64).min(n);
        let expect: Vec<u32> = if e == 0 { vec![] } else { vec![e] };
        assert_eq!(h0.at(&[k]), expect.as_slice(), "H0 weight {k}");
        assert_eq!(h1.at(&[k]), expect.as_slice(), "H1 weight {k}");
    }
    let m = 2;
    let pm = Connection::trivial(ctx, 1, m, 1);
    let h0 = compute_h(&pm, 0, 9).unwrap();
    for k in -9..=9i64 {
        let e = if k == 0 { n } else { (m + v_p(k, p as i64)).min(n) };
        assert_eq!(h0.at(&[k]), &[e], "weight {k}");
    }
}

#[test]
fn per_weight_divisors_match_brute_force() {
    let ctx = RingCtx::new(2, 3).unwrap();
    let cases = [
        Connection::rank1(ctx, 1, vec![poly("3", ctx, 2), poly("2", ctx, 2)]).unwrap(),
        Connection::rank1(ctx, 0, vec![poly("4", ctx, 2), poly("0", ctx, 2)]).unwrap(),
        Connection::new(
            ctx,
            1,
            1,
            vec![PolyMatrix::from_rows(vec![
                vec![poly("2", ctx, 1), poly("t", ctx, 1)],
                vec![poly("0", ctx, 1), poly("2", ctx, 1)],
            ])
            .unwrap()],
        )
        .unwrap(),
    ];
    for c in &cases {
        let h = homogeneous_form(c).unwrap();
        let r = c.rank();
        let d = c.d();
        let dims: Vec<usize> = (0..=d).map(|q| r * binom(d, q)).collect();
        for w in pmconn::cohomology::window_points(d, -2, 2) {
            let maps = koszul(&weight_blocks(c, &h, &w));
            for (i, &dim) in dims.iter().enumerate() {
                let prev = if i == 0 { None } else { maps.get(i - 1) };
                let brute = brute_subquotient(prev, maps.get(i), 2, 3, dim);
                assert_eq!(weight_divisors(c, &h, i, &w), brute, "weight {w:?} degree {i}");
            }
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

#[test]
fn higgs_vanishing_examples() {
    for p in [2u64, 3, 5] {
        assert!(higgs_vanishing(p, &[1], 6).unwrap());
        assert!(higgs_vanishing(p, &[0, 1], 3).unwrap());
        assert!(higgs_vanishing(p, &[1, p as i64 - 1], 3).unwrap());
        assert!(!higgs_vanishing(p, &[0], 3).unwrap());
        assert!(!higgs_vanishing(p, &[p as i64, 0], 2).unwrap());
    }
}

#[test]
fn hom_space_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    assert!(hom_space(&nabla("1", ctx, 1), &nabla("0", ctx, 1), 8).unwrap().is_empty());
    // Besides one free generator there are torsion morphisms t^k with p | k − 1.
    let free = |h: Vec<pmconn::HomGenerator>| -> Vec<Vec<i64>> {
        h.into_iter()
            .filter(|g| g.order == 3)
            .map(|g| g.matrix.get(0, 0).terms().map(|(e, _)| e.0[0]).collect())
            .collect()
    };
    assert_eq!(free(hom_space(&nabla("1", ctx, 0), &nabla("0", ctx, 0), 8).unwrap()), vec![vec![1]]);
    assert_eq!(free(hom_space(&nabla("0", ctx, 0), &nabla("1", ctx, 0), 8).unwrap()), vec![vec![-1]]);
    // The identity is horizontal in Hom(C, C).
    let c = Connection::new(
        ctx,
        1,
        1,
        vec![PolyMatrix::from_rows(vec![
            vec![poly("1", ctx, 1), poly("t", ctx, 1)],
            vec![poly("0", ctx, 1), poly("1", ctx, 1)],
        ])
        .unwrap()],
    )
    .unwrap();
    let ch = c.internal_hom(&c).unwrap();
    let id: Vec<LaurentPoly> = vec![poly("1", ctx, 1), poly("0", ctx, 1), poly("0", ctx, 1), poly("1", ctx, 1)];
    assert!(ch.nabla(0, &id, Basis::Dlog).iter().all(|f| f.is_zero()));
    assert!(!hom_space(&c, &c, 3).unwrap().is_empty());
}

#[test]
fn level_raise_is_injective_on_homs() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let catalog = ["0", "3", "-3", "6", "9", "3*t", "0"];
    for a in catalog {
        for b in catalog {
            let (c1, c2) = (nabla(a, ctx, 1), nabla(b, ctx, 1));
            let (r1, r2) = (level_raise(&c1, &f).unwrap(), level_raise(&c2, &f).unwrap());
            let hom = r1.internal_hom(&r2).unwrap();
            for g in hom_space(&c1, &c2, 4).unwrap() {
                let fg = g.matrix.get(0, 0).frob_substitute(&f).unwrap();
                assert!(!fg.is_zero());
                assert!(hom.nabla(0, &[fg], Basis::Dlog)[0].is_zero(), "{a} -> {b}");
            }
        }
    }
}

#[test]
fn rank1_triviality_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    assert!(matches!(rank1_trivial_test(&poly("1", ctx, 1), 1, ctx).unwrap(), Triviality::NotIso { .. }));
    assert_eq!(rank1_trivial_test(&poly("0", ctx, 1), 1, ctx).unwrap(), Triviality::Iso { witness: poly("1", ctx, 1) });
    assert_eq!(
        rank1_trivial_test(&poly("-3", ctx, 1), 1, ctx).unwrap(),
        Triviality::Iso { witness: poly("t", ctx, 1) }
    );
    assert!(matches!(
        rank1_trivial_test(&poly("3*t^3", ctx, 1), 0, ctx).unwrap(),
        Triviality::NotIso { exponent: 3, .. }
    ));
    let Triviality::Iso { witness } = rank1_trivial_test(&poly("9*t + 9*t^-2 - 3", ctx, 1), 1, ctx).unwrap() else {
        panic!("expected iso")
    };
    assert_eq!(
        nabla("9*t + 9*t^-2 - 3", ctx, 1).gauge(&PolyMatrix::single(witness)).unwrap(),
        Connection::trivial(ctx, 1, 1, 1)
    );
}

/// Units `c t^N (1 + p u)` with `u` supported in `[−2, 2]` and small `N`, over `Z/4`.
fn brute_trivial(f: &LaurentPoly, m: u32, ctx: RingCtx) -> bool {
    let c = Connection::nabla_f(ctx, m, f.clone()).unwrap();
    let target = Connection::trivial(ctx, 1, m, 1);
    for nexp in -4..=4i64 {
        for mask in 0u32..32 {
            let mut g = LaurentPoly::one(ctx, 1);
            for (j, e) in (-2..=2i64).enumerate() {
                if mask & (1 << j) != 0 {
                    g = g.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, 2), &[e]));
                }
            }
            if !g.is_unit() {
                continue;
            }
            let g = g.shift(&pmconn::Exponent::from_slice(&[nexp]));
            if c.gauge(&PolyMatrix::single(g)).unwrap() == target {
                return true;
            }
        }
    }
    false
}

#[test]
fn rank1_triviality_against_brute_force() {
    let ctx = RingCtx::new(2, 2).unwrap();
    let mut found = 0;
    for m in 0..2u32 {
        for code in 0u32..256 {
            let mut f = LaurentPoly::zero(ctx, 1);
            for (j, e) in (-2..=1i64).enumerate() {
                let c = ((code >> (2 * j)) & 3) as i64;
                f = f.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, c), &[e]));
            }
            let verdict = rank1_trivial_test(&f, m, ctx).unwrap();
            let brute = brute_trivial(&f, m, ctx);
            if brute {
                found += 1;
                assert!(matches!(verdict, Triviality::Iso { .. }), "f = {f}, m = {m}");
            }
            if let Triviality::Iso { witness } = &verdict {
                assert_eq!(
                    Connection::nabla_f(ctx, m, f.clone())
                        .unwrap()
                        .gauge(&PolyMatrix::single(witness.clone()))
                        .unwrap(),
                    Connection::trivial(ctx, 1, m, 1)
                );
            }
            assert!(!matches!(verdict, Triviality::Undetermined));
        }
    }
    assert!(found > 0);
}

fn nilpotent_rank2(ctx: RingCtx, m: u32) -> Connection {
    Connection::new(
        ctx,
        1,
        m,
        vec![PolyMatrix::from_rows(vec![
            vec![poly("0", ctx, 1), poly("1", ctx, 1)],
            vec![poly("0", ctx, 1), poly("0", ctx, 1)],
        ])
        .unwrap()],
    )
    .unwrap()
}

#[test]
fn raised_cohomology_examples() {
    let ctx = RingCtx::new(3, 4).unwrap();
    let f = FrobLift::pure(ctx, 1);
    for m in 1..=3u32 {
        let triv = ExtensionPresentation::unipotent(Connection::trivial(ctx, 1, m, 1));
        let r = compare_raised_cohomology(&triv, &f, 6).unwrap();
        assert!(r.passes(), "trivial m={m}: {r:?}");
        assert!(r.h0_untwisted);
        // Twists a ≠ 0 carry H^0 torsion of exponent exactly m − 1.
        let h0_max = r.bounds.iter().filter(|b| b.degree == 0).map(|b| b.max_exponent).max().unwrap();
        assert_eq!(h0_max, m - 1);
    }
    let r = compare_raised_cohomology(&ExtensionPresentation::unipotent(nilpotent_rank2(ctx, 2)), &f, 6).unwrap();
    assert!(r.passes(), "{r:?}");
    assert_eq!(r.length, 2);
    let ctx2 = RingCtx::new(2, 3).unwrap();
    let c2 = Connection::trivial(ctx2, 2, 2, 1);
    let r = compare_raised_cohomology(&ExtensionPresentation::unipotent(c2), &FrobLift::pure(ctx2, 2), 3).unwrap();
    assert!(r.passes(), "{r:?}");
}

#[test]
fn banded_complex_examples() {
    let ctx = RingCtx::new(3, 2).unwrap();
    let c = nabla("t", ctx, 0);
    let h0 = compute_h(&c, 0, 6).unwrap();
    assert_eq!(h0.method, Method::Banded);
    assert!(h0.weights.is_empty());
    assert!(h0.stable);
    let cx = de_rham_complex(&c, 4).unwrap();
    assert_eq!(cx.boundaries.len(), 1);
    assert_eq!(cx.boundaries[0].cols(), 9);
    assert_eq!(cx.boundaries[0].rows(), 11);
}

#[test]
fn banded_blocks_match_brute_force() {
    // ∇_{2t} over Z/4 couples t^k to t^{k+1}; the chain breaks where 4 | k.
    let ctx = RingCtx::new(2, 2).unwrap();
    let c = nabla("2*t", ctx, 0);
    let h0 = compute_h(&c, 0, 8).unwrap();
    assert_eq!(h0.method, Method::Banded);
    assert!(h0.stable);
    for j in -2i64..=1 {
        let k0 = 4 * j;
        let mut count = 0u32;
        for code in 0..256u32 {
            let a: Vec<i64> = (0..4).map(|i| ((code >> (2 * i)) & 3) as i64).collect();
            let at = |k: i64| if (k0..k0 + 4).contains(&k) { a[(k - k0) as usize] } else { 0 };
            if (k0..=k0 + 4).all(|k| (k * at(k) + 2 * at(k - 1)).rem_euclid(4) == 0) {
                count += 1;
            }
        }
        let block = h0.weights.iter().find(|w| w.w == vec![k0]).expect("block at a multiple of 4");
        assert_eq!(2u32.pow(block.divisors.iter().sum()), count, "block at {k0}");
    }
    assert_eq!(h0.weights.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn boundaries_compose_to_zero(c1 in -9i64..9, c2 in -9i64..9, g in prop::collection::vec((-3i64..3, -2i64..3, -2i64..3), 0..3), m in 0u32..3) {
        let ctx = RingCtx::new(3, 2).unwrap();
        let base = Connection::rank1(ctx, m, vec![LaurentPoly::from_i64(ctx, 2, c1), LaurentPoly::from_i64(ctx, 2, c2)]).unwrap();
        let mut u = LaurentPoly::one(ctx, 2);
        for &(c, e1, e2) in &g {
            u = u.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, 3 * c), &[e1, e2]));
        }
        let c = base.gauge(&PolyMatrix::single(u)).unwrap();
        let cx = de_rham_complex(&c, 2).unwrap();
        prop_assert_eq!(cx.boundaries.len(), 2);
        prop_assert!(cx.boundaries[1].mul(&cx.boundaries[0]).is_zero());
        let h = homogeneous_form(&base).unwrap();
        for w in pmconn::cohomology::window_points(2, -3, 3) {
            let maps = koszul(&weight_blocks(&base, &h, &w));
            prop_assert!(maps[1].mul(&maps[0]).is_zero());
        }
    }

    #[test]
    fn divisors_are_gauge_invariant(a in 0i64..27, b in 0i64..27, x in 0i64..27, shift in -3i64..4, m in 0u32..3) {
        let ctx = RingCtx::new(3, 3).unwrap();
        let c = Connection::new(ctx, 1, m, vec![PolyMatrix::from_rows(vec![
            vec![LaurentPoly::from_i64(ctx, 1, a), LaurentPoly::from_i64(ctx, 1, b)],
            vec![LaurentPoly::zero(ctx, 1), LaurentPoly::from_i64(ctx, 1, a)],
        ]).unwrap()]).unwrap();
        // A constant unipotent gauge keeps weights fixed; a monomial gauge t^s shifts them by s.
        let g = PolyMatrix::from_rows(vec![
            vec![LaurentPoly::one(ctx, 1), LaurentPoly::from_i64(ctx, 1, x)],
            vec![LaurentPoly::zero(ctx, 1), LaurentPoly::one(ctx, 1)],
        ]).unwrap();
        let gc = c.gauge(&g).unwrap();
        let mono = PolyMatrix::scalar(&LaurentPoly::monomial(ModularInt::one(ctx), &[shift]), 2);
        let mc = c.gauge(&mono).unwrap();
        for i in 0..=1 {
            let base = compute_h(&c, i, 8).unwrap();
            prop_assert_eq!(compute_h(&gc, i, 8).unwrap().weights, base.weights.clone());
            let shifted = compute_h(&mc, i, 12).unwrap();
            for w in -8..=8i64 {
                prop_assert_eq!(shifted.at(&[w - shift]), base.at(&[w]));
            }
        }
    }

    #[test]
    fn catalog_windows_are_stable(c in -20i64..20, m in 0u32..3, d in 3i64..7) {
        let ctx = RingCtx::new(2, 3).unwrap();
        let conn = nabla(&format!("{c}"), ctx, m);
        for i in 0..=1 {
            let small = compute_h(&conn, i, d).unwrap();
            let big = compute_h(&conn, i, d + 2).unwrap();
            prop_assert!(small.stable);
            for w in -d..=d {
                prop_assert_eq!(small.at(&[w]), big.at(&[w]));
            }
        }
    }
}
