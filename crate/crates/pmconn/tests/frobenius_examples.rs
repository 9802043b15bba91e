use pmconn::cohomology::hom_space;
use pmconn::dops::{tau_transition, RingMap};
use pmconn::frobenius::{dlog_pullback_matrix, twist_reassembly_check};
use pmconn::{
    descend_rank1, level_raise, psi, twist_decompose, verify_pullback_iso, Basis, Connection, DescentOutcome, Error,
    FrobLift, LaurentPoly, LiftChain, ModularInt, PolyMatrix, RingCtx,
};
use proptest::prelude::*;

fn poly(s: &str, ctx: RingCtx, d: usize) -> LaurentPoly {
    LaurentPoly::parse(s, ctx, d).unwrap()
}

fn nabla(s: &str, ctx: RingCtx, m: u32) -> Connection {
    Connection::nabla_f(ctx, m, poly(s, ctx, 1)).unwrap()
}

/// Independent dt-basis law: `Θ'_i = Σ_j F(Θ_j) (δ_ij t_i^{p−1} + ∂_i a_j)`.
fn raise_dt_oracle(c: &Connection, f: &FrobLift) -> Vec<PolyMatrix> {
    let (ctx, d, r) = (c.ctx(), c.d(), c.rank());
    let p = ctx.p() as i64;
    let images = f.images();
    (0..d)
        .map(|i| {
            let mut acc = PolyMatrix::zero(ctx, d, r, r);
            for j in 0..d {
                let fj = c.theta_dt(j).try_map(|x| x.substitute(&images)).unwrap();
                let mut w = f.a()[j].partial(i);
                if i == j {
                    let mut e = vec![0i64; d];
                    e[i] = p - 1;
                    w = w.add(&LaurentPoly::monomial(ModularInt::one(ctx), &e));
                }
                acc = acc.add(&fj.scale(&w));
            }
            acc
        })
        .collect()
}

#[test]
fn level_raise_rank1_rule() {
    let ctx = RingCtx::new(3, 4).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let c = nabla("2 + 5*t - t^-2", ctx, 2);
    assert_eq!(level_raise(&c, &f).unwrap(), nabla("2 + 5*t^3 - t^-6", ctx, 1));
    assert_eq!(level_raise(&Connection::trivial(ctx, 1, 2, 1), &f).unwrap(), Connection::trivial(ctx, 1, 1, 1));
    assert!(matches!(level_raise(&nabla("1", ctx, 0), &f), Err(Error::LevelMismatch(_))));
}

#[test]
fn level_raise_matches_dt_law() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = FrobLift::new(ctx, 1, vec![poly("t", ctx, 1)]).unwrap();
    for s in ["1", "t", "2*t^-1 + 4*t^2", "3 + t^5"] {
        let c = nabla(s, ctx, 1);
        let raised = level_raise(&c, &f).unwrap();
        assert_eq!(raised.theta_in(Basis::Dt), raise_dt_oracle(&c, &f), "f = {s}");
        assert_eq!(raised.m(), 0);
    }
    let ctx2 = RingCtx::new(2, 3).unwrap();
    let f2 = FrobLift::new(ctx2, 2, vec![poly("t1*t2", ctx2, 2), poly("t1^-1 + 1", ctx2, 2)]).unwrap();
    let c2 = Connection::rank1(ctx2, 2, vec![poly("1", ctx2, 2), poly("3", ctx2, 2)]).unwrap();
    let raised = level_raise(&c2, &f2).unwrap();
    assert_eq!(raised.theta_in(Basis::Dt), raise_dt_oracle(&c2, &f2));
    assert!(raised.is_integrable());
    let m = dlog_pullback_matrix(&FrobLift::pure(ctx2, 2)).unwrap();
    assert_eq!(m, PolyMatrix::identity(ctx2, 2, 2));
}

#[test]
fn psi_examples() {
    let (p, n) = (2u64, 3u32);
    let ctx = RingCtx::new(p, n).unwrap();
    let c = nabla("1 + t", ctx, n);
    assert!(c.is_higgs());
    let chain = LiftChain::pure(ctx, 1, n as usize);
    assert_eq!(psi(&c, &chain).unwrap(), nabla("1 + t^8", ctx, 0));
    assert_eq!(psi(&Connection::trivial(ctx, 1, n, 2), &chain).unwrap(), Connection::trivial(ctx, 1, 0, 2));
    let single = LiftChain::pure(ctx, 1, 1);
    let c1 = nabla("t^-1", ctx, 1);
    assert_eq!(psi(&c1, &single).unwrap(), level_raise(&c1, &FrobLift::pure(ctx, 1)).unwrap());
    assert!(psi(&c, &single).is_err());
}

#[test]
fn twist_examples() {
    let (p, n, m) = (3u64, 4u32, 2u32);
    let ctx = RingCtx::new(p, n).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let triv = Connection::trivial(ctx, 1, m, 1);
    let parts = twist_decompose(&triv, &f).unwrap();
    assert_eq!(parts.len(), 3);
    for (a, s) in parts.iter().enumerate() {
        assert_eq!(s.a, vec![a as u32]);
        assert_eq!(s.connection, nabla(&format!("{}", 3 * a), ctx, m));
    }
    assert_eq!(parts[0].connection, triv);
    assert!(twist_reassembly_check(&triv, &f, 4).unwrap());
    let nil = Connection::new(
        ctx,
        2,
        m,
        vec![
            PolyMatrix::from_rows(vec![
                vec![poly("0", ctx, 2), poly("1", ctx, 2)],
                vec![poly("0", ctx, 2), poly("0", ctx, 2)],
            ])
            .unwrap(),
            PolyMatrix::zero(ctx, 2, 2, 2),
        ],
    )
    .unwrap();
    let f2 = FrobLift::pure(ctx, 2);
    assert_eq!(twist_decompose(&nil, &f2).unwrap().len(), 9);
    assert!(twist_reassembly_check(&nil, &f2, 2).unwrap());
    let impure = FrobLift::new(ctx, 1, vec![poly("t", ctx, 1)]).unwrap();
    assert!(twist_decompose(&triv, &impure).is_err());
}

#[test]
fn pullback_iso_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let up = nabla("3*t + 9*t^-1", ctx, 1);
    let g = verify_pullback_iso(&up, &level_raise(&up, &f).unwrap(), &f, 3).unwrap().unwrap();
    assert!(g.get(0, 0).is_constant());
    // ∇_1 at level 0 against ∇_0 at level 1: gauge(∇_0, g) = ∇_1 forces g = c·t, the inverse of the t^{-1} gauge.
    let g = verify_pullback_iso(&nabla("0", ctx, 1), &nabla("1", ctx, 0), &f, 3).unwrap().unwrap();
    assert_eq!(g.get(0, 0).len(), 1);
    assert_eq!(g.get(0, 0).terms().next().unwrap().0 .0[0], 1);
    assert_eq!(nabla("1", ctx, 0).gauge(&PolyMatrix::single(poly("t^-1", ctx, 1))).unwrap(), nabla("0", ctx, 0));
    for h in ["0", "1", "t", "t^-1", "3*t", "1 + t^2"] {
        assert_eq!(verify_pullback_iso(&nabla(h, ctx, 1), &nabla("t", ctx, 0), &f, 4).unwrap(), None, "h = {h}");
    }
}

#[test]
fn descent_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let down = |c: &Connection| match descend_rank1(c, &f, 64).unwrap() {
        DescentOutcome::Descended { connection, witness } => (connection, witness),
        DescentOutcome::Obstructed(o) => panic!("unexpected obstruction {o:?}"),
    };
    let (cu, w) = down(&nabla("3*t^3 + 9*t^-6", ctx, 0));
    assert_eq!(cu, nabla("3*t + 9*t^-2", ctx, 1));
    assert!(w.get(0, 0).is_constant());
    let (cu, _) = down(&Connection::trivial(ctx, 1, 0, 1));
    assert_eq!(cu, Connection::trivial(ctx, 1, 1, 1));
    let c = nabla("3*t", ctx, 0);
    let (cu, w) = down(&c);
    assert_eq!(level_raise(&cu, &f).unwrap().gauge(&w).unwrap(), c);
    assert!(verify_pullback_iso(&cu, &c, &f, 16).unwrap().is_some());
    let (cu, _) = down(&nabla("1", ctx, 0));
    assert!(verify_pullback_iso(&cu, &nabla("1", ctx, 0), &f, 4).unwrap().is_some());
    match descend_rank1(&nabla("t", ctx, 0), &f, 64).unwrap() {
        DescentOutcome::Obstructed(o) => {
            assert_eq!((o.exponent, o.coefficient), (1, 1));
            assert!(o.excludes_image(3));
        }
        other => panic!("expected obstruction, got {other:?}"),
    }
}

#[test]
fn hom_spaces_show_non_fullness() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = FrobLift::pure(ctx, 1);
    let (n1, n0) = (nabla("1", ctx, 1), nabla("0", ctx, 1));
    assert!(hom_space(&n1, &n0, 6).unwrap().is_empty());
    assert!(hom_space(&n0, &n1, 6).unwrap().is_empty());
    let (r1, r0) = (level_raise(&n1, &f).unwrap(), level_raise(&n0, &f).unwrap());
    assert!(!hom_space(&r1, &r0, 6).unwrap().is_empty());
}

#[test]
fn tau_intertwines_level_raise() {
    let (p, n, m) = (3u64, 3u32, 1u32);
    let ctx = RingCtx::new(p, n).unwrap();
    let hi = RingCtx::new(p, n + m + 6).unwrap();
    let c = nabla("3 + 3*t", ctx, m);
    for a2 in ["3*t^2", "3*t + 9", "6*t^-1"] {
        let fa = FrobLift::new(hi, 1, vec![poly("0", hi, 1)]).unwrap();
        let fb = FrobLift::new(hi, 1, vec![poly(a2, hi, 1)]).unwrap();
        let t = tau_transition(&c, &RingMap::from_lift(&fa), &RingMap::from_lift(&fb)).unwrap();
        let ra = level_raise(&c, &fa.reduce_to(ctx).unwrap()).unwrap();
        let rb = level_raise(&c, &fb.reduce_to(ctx).unwrap()).unwrap();
        assert_eq!(ra.gauge(&t).unwrap(), rb, "a' = {a2}");
    }
}

fn small_poly(ctx: RingCtx, coeffs: &[(i64, i64)]) -> LaurentPoly {
    let mut f = LaurentPoly::zero(ctx, 1);
    for &(c, e) in coeffs {
        f = f.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, c), &[e]));
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raise_preserves_integrability_and_gauge(
        g_terms in prop::collection::vec((-9i64..9, -3i64..4), 0..3),
        a_terms in prop::collection::vec((-9i64..9, -2i64..3), 0..3),
        c1 in -9i64..9, c2 in -9i64..9,
    ) {
        let ctx = RingCtx::new(3, 3).unwrap();
        let d = 2;
        let mut g = LaurentPoly::one(ctx, d);
        for &(c, e) in &g_terms {
            g = g.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, 3 * c), &[e, 1 - e]));
        }
        let base = Connection::rank1(ctx, 2, vec![LaurentPoly::from_i64(ctx, d, c1), LaurentPoly::from_i64(ctx, d, c2)]).unwrap();
        let c = base.gauge(&PolyMatrix::single(g.clone())).unwrap();
        prop_assert!(c.is_integrable());
        let mut a = LaurentPoly::zero(ctx, d);
        for &(k, e) in &a_terms {
            a = a.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, k), &[e, 0]));
        }
        let f = FrobLift::new(ctx, d, vec![a, LaurentPoly::zero(ctx, d)]).unwrap();
        let raised = level_raise(&c, &f).unwrap();
        prop_assert!(raised.is_integrable());
        // Raising commutes with gauge: F*(gauge(C, g)) = gauge(F*C, F(g)).
        let fg = g.substitute(&f.images()).unwrap();
        prop_assert_eq!(raised, level_raise(&base, &f).unwrap().gauge(&PolyMatrix::single(fg)).unwrap());
    }

    #[test]
    fn descent_round_trip(
        p in prop::sample::select(vec![2u64, 3]),
        n in 1u32..4,
        c0 in 0i64..9,
        rest in prop::collection::vec((-4i64..5, -3i64..4), 0..3),
    ) {
        let ctx = RingCtx::new(p, n).unwrap();
        let mut f = small_poly(ctx, &[(c0, 0)]);
        for &(c, e) in &rest {
            f = f.add(&LaurentPoly::monomial(ModularInt::from_i64(ctx, c * p as i64), &[e]));
        }
        let c = Connection::nabla_f(ctx, 0, f).unwrap();
        let lift = FrobLift::pure(ctx, 1);
        match descend_rank1(&c, &lift, 256).unwrap() {
            DescentOutcome::Descended { connection, witness } => {
                prop_assert_eq!(level_raise(&connection, &lift).unwrap().gauge(&witness).unwrap(), c);
            }
            DescentOutcome::Obstructed(o) => prop_assert!(false, "obstruction {:?}", o),
        }
    }
}
