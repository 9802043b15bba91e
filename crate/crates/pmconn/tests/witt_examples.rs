use pmconn::witt::{
    delta, dlog_times, mul_form, parse_component, presentation_check, teichmuller_monomial, witt_weights, WittWeight,
};
use pmconn::{
    drw_d, drw_f, level_raise, witt_compare, witt_level_raise, Connection, Error, FrobLift, LaurentPoly, ModularInt,
    RingCtx, WittConnection, WittNormal, WittOneForm, WittVector,
};
use proptest::prelude::*;

fn fp(p: u64) -> RingCtx {
    RingCtx::new(p, 1).unwrap()
}

fn wv(p: u64, comps: &[&str]) -> WittVector {
    WittVector::from_components(p, comps.iter().map(|s| parse_component(s, p).unwrap()).collect()).unwrap()
}

/// Ghost component of the digit lift at full precision `p^n`, computed independently of the library.
fn ghost_oracle(x: &WittVector, k: u32) -> LaurentPoly {
    let p = x.p();
    let big = RingCtx::new(p, x.n() + 1).unwrap();
    let mut w = LaurentPoly::zero(big, 1);
    for r in 0..=k {
        let lift = x.components()[r as usize].lift_to(big).unwrap();
        let mut term = LaurentPoly::one(big, 1);
        for _ in 0..p.pow(k - r) {
            term = term.mul(&lift);
        }
        w = w.add(&term.mul_p_pow(r));
    }
    w.reduce_to(RingCtx::new(p, k + 1).unwrap()).unwrap()
}

fn component_strategy(p: u64) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((0..p, -2i64..=2), 0..3).prop_map(move |terms| {
        let mut x = LaurentPoly::zero(fp(p), 1);
        for (c, e) in terms {
            x = x.add(&LaurentPoly::monomial(ModularInt::from_u64(fp(p), c), &[e]));
        }
        x
    })
}

fn witt_strategy() -> impl Strategy<Value = (WittVector, WittVector)> {
    (prop::sample::select(vec![2u64, 3, 5]), 1u32..=3).prop_flat_map(|(p, n)| {
        let a = prop::collection::vec(component_strategy(p), n as usize);
        let b = prop::collection::vec(component_strategy(p), n as usize);
        (a, b).prop_map(move |(a, b)| {
            (WittVector::from_components(p, a).unwrap(), WittVector::from_components(p, b).unwrap())
        })
    })
}

fn length_at_least_two() -> impl Strategy<Value = (WittVector, WittVector)> {
    witt_strategy().prop_filter("length ≥ 2", |(x, _)| x.n() >= 2)
}

#[test]
fn ring_examples() {
    let p = 3;
    let x = parse_component("t + 2", p).unwrap();
    let y = parse_component("2*t^-1 + t^2", p).unwrap();
    let tx = WittVector::teichmuller(&x, 3).unwrap();
    let ty = WittVector::teichmuller(&y, 3).unwrap();
    assert_eq!(tx.mul(&ty).unwrap(), WittVector::teichmuller(&x.mul(&y), 3).unwrap());

    let a = wv(p, &["t", "1 + t^2", "2"]);
    let b = wv(p, &["2*t^-1", "t", "0"]);
    let lhs = a.verschiebung().mul(&b.verschiebung()).unwrap();
    let rhs = a.mul(&b).unwrap().verschiebung().scale(p as i64);
    assert_eq!(lhs, rhs);

    let one = wv(p, &["1", "0", "0"]);
    assert!(one.add(&one.neg()).unwrap().is_zero());
    let minus_one = WittVector::from_components(p, one.neg().components().to_vec()).unwrap();
    assert_eq!(minus_one.components()[0], parse_component("2", p).unwrap());
    // In W(F_2), -1 = (1, 1, 1, ...).
    let m2 = wv(2, &["1", "0", "0"]).neg();
    assert_eq!(m2, wv(2, &["1", "1", "1"]));
}

#[test]
fn frobenius_verschiebung_examples() {
    let p = 5;
    let t = teichmuller_monomial(p, 3, 1, 1).unwrap();
    assert_eq!(t.frobenius().unwrap(), teichmuller_monomial(p, 2, 1, 5).unwrap());
    let x = wv(p, &["t + 3", "t^-1", "2*t^2"]);
    assert_eq!(x.verschiebung().frobenius().unwrap(), x.scale(5).truncate(2).unwrap());
    assert!(WittVector::zero(p, 3).unwrap().verschiebung().is_zero());
    // F(V^r[x]) = p V^{r-1}[x].
    let tx = WittVector::teichmuller(&parse_component("t + 1", p).unwrap(), 3).unwrap();
    let v2 = tx.verschiebung().verschiebung();
    let expect = tx.verschiebung().scale(5).truncate(2).unwrap();
    assert_eq!(v2.frobenius().unwrap(), expect);
}

#[test]
fn differential_examples() {
    let p = 3;
    let n = 3;
    let t = teichmuller_monomial(p, n, 1, 1).unwrap();
    let dt = drw_d(&t).unwrap();
    let mut expect = WittOneForm::zero(p, n);
    expect.add_integral(1, &ModularInt::one(RingCtx::new(p, n).unwrap())).unwrap();
    assert_eq!(dt, expect);

    let dvt = drw_d(&t.verschiebung()).unwrap();
    let mut expect = WittOneForm::zero(p, n);
    expect.add_fractional(1, 1, &ModularInt::one(RingCtx::new(p, n - 1).unwrap())).unwrap();
    assert_eq!(dvt, expect);

    let vtp = teichmuller_monomial(p, n, 1, 3).unwrap().verschiebung();
    let mut expect = WittOneForm::zero(p, n);
    expect.add_integral(1, &ModularInt::from_i64(RingCtx::new(p, n).unwrap(), 3)).unwrap();
    assert_eq!(drw_d(&vtp).unwrap(), expect);
}

#[test]
fn frobenius_on_forms_examples() {
    let p = 2;
    let n = 3;
    let ctx = RingCtx::new(p, n).unwrap();
    let mut dlog = WittOneForm::zero(p, n);
    dlog.add_integral(0, &ModularInt::one(ctx)).unwrap();
    assert_eq!(drw_f(&dlog).unwrap(), dlog.truncate(n - 1).unwrap());

    for j in [1i64, -3, 5] {
        let mut dv = WittOneForm::zero(p, n);
        dv.add_fractional(1, j, &ModularInt::one(RingCtx::new(p, n - 1).unwrap())).unwrap();
        let mut expect = WittOneForm::zero(p, n - 1);
        expect.add_integral(j, &ModularInt::from_i64(RingCtx::new(p, n - 1).unwrap(), j)).unwrap();
        assert_eq!(drw_f(&dv).unwrap(), expect);
    }
}

#[test]
fn ghost_oracle_fixed_cases() {
    for (p, n) in [(2u64, 4u32), (3, 4), (5, 3)] {
        let x = wv(p, &["t + 1", "t^-1", "1 + t^2", "t"][..n as usize]);
        let y = wv(p, &["t^-2", "1", "t", "t^-1 + 1"][..n as usize]);
        let s = x.add(&y).unwrap();
        let m = x.mul(&y).unwrap();
        for k in 0..n {
            assert_eq!(ghost_oracle(&s, k), ghost_oracle(&x, k).add(&ghost_oracle(&y, k)));
            assert_eq!(ghost_oracle(&m, k), ghost_oracle(&x, k).mul(&ghost_oracle(&y, k)));
        }
    }
}

#[test]
fn presentations_match_normal_form() {
    for p in [2u64, 3] {
        for n in 1..=3 {
            for degree in [0u8, 1] {
                for w in witt_weights(p, n, 20) {
                    let check = presentation_check(p, n, degree, w).unwrap();
                    assert!(check.matches(), "{check:?}");
                }
            }
        }
    }
}

#[test]
fn level_raise_examples() {
    let p = 3;
    let n = 3;
    let triv = WittConnection::trivial(p, n, 2).unwrap();
    let raised = witt_level_raise(&triv).unwrap();
    assert_eq!(raised.m(), 1);
    assert!(raised.f().is_zero());

    let c = WittConnection::new(1, teichmuller_monomial(p, n, 1, 2).unwrap());
    assert_eq!(witt_level_raise(&c).unwrap().f(), &teichmuller_monomial(p, n, 1, 6).unwrap());

    let g = wv(p, &["t + 1", "2*t^-1", "t"]);
    let c = WittConnection::new(2, g.verschiebung());
    assert_eq!(witt_level_raise(&c).unwrap().f(), &g.scale(3));

    assert!(matches!(witt_level_raise(&WittConnection::trivial(p, n, 0).unwrap()), Err(Error::LevelMismatch(_))));
}

#[test]
fn level_raise_matches_classical_through_delta() {
    for (p, n, m) in [(2u64, 3u32, 1u32), (3, 3, 2), (5, 2, 1)] {
        let ctx = RingCtx::new(p, n).unwrap();
        let g = LaurentPoly::parse("3*t^2 + 7 - 2*t^-1", ctx, 1).unwrap();
        let classical = level_raise(&Connection::nabla_f(ctx, m, g.clone()).unwrap(), &FrobLift::pure(ctx, 1)).unwrap();
        let raised_f = classical.theta()[0].get(0, 0).clone();
        let witt = witt_level_raise(&WittConnection::new(m, delta(&g).unwrap())).unwrap();
        assert_eq!(witt.m(), classical.m());
        assert_eq!(witt.f(), &delta(&raised_f).unwrap());
    }
}

#[test]
fn compare_trivial_example() {
    let c = WittConnection::trivial(3, 3, 2).unwrap();
    let rep = witt_compare(&c, 6).unwrap();
    let w0 = rep.weights.iter().find(|w| w.weight == WittWeight { r: 0, j: 0 }).unwrap();
    assert_eq!((w0.h0_source, w0.h0_target), (3, 3));
    assert!(rep.passes(), "{rep:?}");
}

/// Order of `H⁰` at a weight by brute force: count the multiples `a·e_w` killed by `∇`.
fn brute_h0(c: &WittConnection, w: WittWeight) -> u32 {
    let (p, n) = (c.p(), c.n());
    let len = n - w.r;
    let ctx = RingCtx::new(p, len).unwrap();
    let mut count = 0u64;
    for a in 0..p.pow(len) {
        let x = if w.r == 0 {
            delta(&LaurentPoly::monomial(ModularInt::from_u64(RingCtx::new(p, n).unwrap(), a), &[w.j])).unwrap()
        } else {
            let mut comps = vec![LaurentPoly::zero(fp(p), 1); n as usize];
            let digits = pmconn::arith::teichmuller_digits(&ModularInt::from_u64(ctx, a));
            for (s, dgt) in digits.into_iter().enumerate() {
                let e = w.j * (p as i64).pow(s as u32);
                comps[w.r as usize + s] = LaurentPoly::monomial(ModularInt::from_u64(fp(p), dgt), &[e]);
            }
            WittVector::from_components(p, comps).unwrap()
        };
        if c.apply(&x).unwrap().is_zero() {
            count += 1;
        }
    }
    let mut e = 0;
    while count > 1 {
        assert_eq!(count % p, 0);
        count /= p;
        e += 1;
    }
    e
}

#[test]
fn compare_against_brute_force() {
    for (p, n, m) in [(2u64, 3u32, 1u32), (2, 3, 2), (3, 2, 1), (3, 3, 2)] {
        for u in [0i64, 1, -1] {
            let ctx = RingCtx::new(p, n).unwrap();
            let c0 = LaurentPoly::constant(ModularInt::from_i64(ctx, u * (p as i64).pow(m)), 1);
            let c = WittConnection::new(m, delta(&c0).unwrap());
            let rep = witt_compare(&c, 4).unwrap();
            assert!(rep.passes(), "p={p} n={n} m={m} u={u}: {rep:?}");
            let raised = witt_level_raise(&c).unwrap();
            for w in &rep.weights {
                assert_eq!(brute_h0(&c, w.weight), w.h0_source, "{w:?}");
                assert_eq!(brute_h0(&raised, w.weight.times_p(p)), w.h0_target, "{w:?}");
            }
        }
    }
}

#[test]
fn compare_rejects_non_nilpotent() {
    let c = WittConnection::new(2, teichmuller_monomial(3, 3, 1, 0).unwrap());
    assert!(matches!(witt_compare(&c, 3), Err(Error::Hypothesis(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ghost_oracle_agrees((x, y) in witt_strategy()) {
        let s = x.add(&y).unwrap();
        let m = x.mul(&y).unwrap();
        let neg = x.neg();
        for k in 0..x.n() {
            prop_assert_eq!(ghost_oracle(&s, k), ghost_oracle(&x, k).add(&ghost_oracle(&y, k)));
            prop_assert_eq!(ghost_oracle(&m, k), ghost_oracle(&x, k).mul(&ghost_oracle(&y, k)));
            prop_assert_eq!(ghost_oracle(&neg, k), ghost_oracle(&x, k).neg());
        }
    }

    #[test]
    fn ring_axioms((x, y) in witt_strategy()) {
        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.add(&y).unwrap().sub(&y).unwrap(), x.clone());
        let xy = x.add(&y).unwrap().mul(&x).unwrap();
        prop_assert_eq!(xy, x.mul(&x).unwrap().add(&y.mul(&x).unwrap()).unwrap());
    }

    #[test]
    fn normal_form_round_trip((x, _) in witt_strategy()) {
        let nf = WittNormal::from_witt(&x).unwrap();
        prop_assert_eq!(nf.to_witt().unwrap(), x);
    }

    #[test]
    fn de_rham_witt_identities((x, y) in length_at_least_two()) {
        let p = x.p() as i64;
        let n = x.n();
        prop_assert_eq!(x.verschiebung().frobenius().unwrap(), x.scale(p).truncate(n - 1).unwrap());
        prop_assert_eq!(drw_d(&x.frobenius().unwrap()).unwrap(), drw_f(&drw_d(&x).unwrap()).unwrap().scale(p));
        prop_assert_eq!(drw_f(&drw_d(&x.verschiebung()).unwrap()).unwrap(), drw_d(&x).unwrap().truncate(n - 1).unwrap());
        prop_assert_eq!(drw_d(&x.add(&y).unwrap()).unwrap(), drw_d(&x).unwrap().add(&drw_d(&y).unwrap()).unwrap());
    }

    #[test]
    fn teichmuller_frobenius_on_d(p in prop::sample::select(vec![2u64, 3, 5]), n in 2u32..=4, c in 1u64..5, j in -6i64..=6) {
        let c = c % p;
        prop_assume!(c != 0);
        let x = teichmuller_monomial(p, n, c, j).unwrap();
        let lhs = drw_f(&drw_d(&x).unwrap()).unwrap();
        let xp1 = WittNormal::from_witt(&teichmuller_monomial(p, n, c.pow(p as u32 - 1) % p, (p as i64 - 1) * j).unwrap()).unwrap();
        let rhs = mul_form(&xp1, &drw_d(&x).unwrap()).unwrap().truncate(n - 1).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz_for_integral_factor(g in prop::collection::vec((-4i64..=4, -2i64..=2), 1..3), (x, _) in witt_strategy()) {
        let p = x.p();
        let n = x.n();
        let ctx = RingCtx::new(p, n).unwrap();
        let mut gp = LaurentPoly::zero(ctx, 1);
        for (c, e) in g {
            gp = gp.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, c), &[e]));
        }
        let a = delta(&gp).unwrap();
        let lhs = drw_d(&a.mul(&x).unwrap()).unwrap();
        let an = WittNormal::from_witt(&a).unwrap();
        let xn = WittNormal::from_witt(&x).unwrap();
        let term1 = mul_form(&an, &drw_d(&x).unwrap()).unwrap();
        let term2 = mul_form(&xn, &drw_d(&a).unwrap()).unwrap();
        prop_assert_eq!(lhs, term1.add(&term2).unwrap());
        prop_assert_eq!(dlog_times(&an).truncate(n).unwrap(), mul_form(&an, &dlog_times(&WittNormal::from_witt(&WittVector::teichmuller(&LaurentPoly::one(fp(p), 1), n).unwrap()).unwrap())).unwrap());
    }
}
