use pmconn::connection::{check_presentation, Basis, Connection, ExtensionPresentation, LayerClaim, MonomialTransform};
use pmconn::{LaurentPoly, ModularInt, NilpotenceKind, PolyMatrix, QnStatus, RingCtx};

fn poly(s: &str, ctx: RingCtx, d: usize) -> LaurentPoly {
    LaurentPoly::parse(s, ctx, d).unwrap()
}

fn mat(rows: &[&[&str]], ctx: RingCtx, d: usize) -> PolyMatrix {
    PolyMatrix::from_rows(rows.iter().map(|r| r.iter().map(|s| poly(s, ctx, d)).collect()).collect()).unwrap()
}

#[test]
fn curvature_of_noncommuting_higgs_field() {
    let ctx = RingCtx::new(3, 2).unwrap();
    let c = Connection::new(
        ctx,
        2,
        2,
        vec![mat(&[&["0", "1"], &["0", "0"]], ctx, 2), mat(&[&["0", "0"], &["1", "0"]], ctx, 2)],
    )
    .unwrap();
    let k = c.curvature();
    assert_eq!(k.len(), 1);
    assert_eq!(k[0].1, mat(&[&["1", "0"], &["0", "-1"]], ctx, 2));
    assert!(!c.is_integrable());
}

#[test]
fn rank1_curvature_is_derivation_term() {
    let ctx = RingCtx::new(5, 2).unwrap();
    let c = Connection::rank1(ctx, 1, vec![poly("t1*t2", ctx, 2), poly("t1*t2", ctx, 2)]).unwrap();
    assert!(c.is_integrable());
    let c = Connection::rank1(ctx, 1, vec![poly("t2", ctx, 2), poly("0", ctx, 2)]).unwrap();
    assert!(!c.is_integrable());
}

#[test]
fn gauge_trivializes_nabla_one_at_level_zero() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let c = Connection::nabla_f(ctx, 0, poly("1", ctx, 1)).unwrap();
    let g = PolyMatrix::single(poly("t^-1", ctx, 1));
    let c2 = c.gauge(&g).unwrap();
    assert!(c2.theta()[0].is_zero());
    assert_eq!(c2.gauge(&PolyMatrix::single(poly("t", ctx, 1))).unwrap(), c);
}

#[test]
fn theta_powers_of_rank_one_examples() {
    for (p, n, m) in [(3u64, 4u32, 2u32), (2, 5, 2), (5, 3, 1), (3, 3, 3)] {
        let ctx = RingCtx::new(p, n).unwrap();
        let pm1 = ctx.p_pow(m - 1);
        let c = Connection::nabla_f(ctx, m, LaurentPoly::constant(pm1.clone(), 1)).unwrap();
        let one = vec![LaurentPoly::one(ctx, 1)];
        for l in 0..=2 * n {
            let got = c.theta_power_apply(&[l], &one, Basis::Dt).unwrap();
            let mut coeff = ModularInt::one(ctx);
            for i in 0..l {
                coeff = coeff.mul_ref(&pm1.sub_ref(&ctx.p_pow(m).mul_i64(i as i64)));
            }
            assert_eq!(got[0], LaurentPoly::monomial(coeff, &[-(l as i64)]), "p={p} n={n} m={m} l={l}");
        }
        let c = Connection::nabla_f(ctx, m - 1, poly(&format!("{p}*t"), ctx, 1)).unwrap();
        for l in 0..=2 * n {
            let got = c.theta_power_apply(&[l], &one, Basis::Dt).unwrap();
            assert_eq!(got[0], LaurentPoly::constant(ctx.p_pow(l), 1));
        }
    }
}

#[test]
fn quasi_nilpotence_examples() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let c = Connection::nabla_f(ctx, 2, poly("3", ctx, 1)).unwrap();
    let r = c.is_quasi_nilpotent().unwrap();
    assert_eq!(r.n(), Some(3));
    let c = Connection::nabla_f(ctx, 0, poly("3*t", ctx, 1)).unwrap();
    assert!(c.is_quasi_nilpotent().unwrap().is_true());
    let c = Connection::nabla_f(ctx, 0, poly("t", ctx, 1)).unwrap();
    assert!(matches!(c.is_quasi_nilpotent().unwrap().status, QnStatus::False(_)));
    let ctx2 = RingCtx::new(3, 2).unwrap();
    let c = Connection::nabla_f(ctx2, 0, poly("1", ctx2, 1)).unwrap();
    let r = c.is_quasi_nilpotent().unwrap();
    assert!(r.is_true(), "{r:?}");
}

#[test]
fn coordinate_inversion() {
    let ctx = RingCtx::new(5, 2).unwrap();
    let c = Connection::nabla_f(ctx, 1, poly("2*t + 3*t^-2", ctx, 1)).unwrap();
    let tr = MonomialTransform { matrix: vec![vec![-1]], scalars: vec![ModularInt::one(ctx)] };
    let c2 = c.coordinate_change(&tr).unwrap();
    assert_eq!(c2.theta()[0].get(0, 0), &poly("-2*t^-1 - 3*t^2", ctx, 1));
    let tr = MonomialTransform { matrix: vec![vec![1]], scalars: vec![ModularInt::from_i64(ctx, 2)] };
    let c3 = Connection::nabla_f(ctx, 1, poly("7", ctx, 1)).unwrap();
    assert_eq!(c3.coordinate_change(&tr).unwrap(), c3);
}

#[test]
fn functorial_constructions() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let f = poly("t + 2", ctx, 1);
    let g = poly("t^-1", ctx, 1);
    let cf = Connection::nabla_f(ctx, 1, f.clone()).unwrap();
    let cg = Connection::nabla_f(ctx, 1, g.clone()).unwrap();
    assert_eq!(cf.internal_hom(&cg).unwrap(), Connection::nabla_f(ctx, 1, g.sub(&f)).unwrap());
    assert_eq!(cf.dual().dual(), cf);
    assert_eq!(cf.tensor(&Connection::trivial(ctx, 1, 1, 1)).unwrap(), cf);
    assert!(cf.tensor(&Connection::trivial(ctx, 1, 2, 1)).is_err());
}

#[test]
fn presentations() {
    let ctx = RingCtx::new(3, 3).unwrap();
    let r = check_presentation(&ExtensionPresentation::unipotent(Connection::trivial(ctx, 1, 1, 1))).unwrap();
    assert_eq!((r.kind, r.length), (NilpotenceKind::Nilpotent, 1));
    let c = Connection::new(ctx, 1, 1, vec![mat(&[&["0", "1"], &["0", "0"]], ctx, 1)]).unwrap();
    let r = check_presentation(&ExtensionPresentation::unipotent(c)).unwrap();
    assert_eq!((r.kind, r.length), (NilpotenceKind::Nilpotent, 2));
    let c = Connection::nabla_f(ctx, 0, poly("1", ctx, 1)).unwrap();
    let p = ExtensionPresentation {
        connection: c.clone(),
        blocks: vec![1],
        layers: vec![LayerClaim::FConstant { generators: vec![vec![poly("t^-1", ctx, 1)]] }],
    };
    assert_eq!(check_presentation(&p).unwrap().kind, NilpotenceKind::FNilpotent);
    let p = ExtensionPresentation {
        connection: c,
        blocks: vec![1],
        layers: vec![LayerClaim::FConstant { generators: vec![vec![poly("1", ctx, 1)]] }],
    };
    assert!(matches!(check_presentation(&p).unwrap().kind, NilpotenceKind::Invalid(_)));
}
