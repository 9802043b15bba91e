use criterion::{criterion_group, criterion_main, Criterion};
use pmconn::cohomology::compute_h;
use pmconn::dops::cocycle_check;
use pmconn::linalg::{snf, Track, ZMat};
use pmconn::{Connection, DiffOp, LaurentPoly, PolyMatrix, RingCtx, WittVector};
use std::hint::black_box;

fn dense_poly(ctx: RingCtx, d: usize, r: i64) -> LaurentPoly {
    let mut f = LaurentPoly::zero(ctx, d);
    for k in -r..=r {
        let e: Vec<i64> = (0..d as i64).map(|i| (k * (i + 2)) % (r + 1)).collect();
        f = f.add(&LaurentPoly::from_terms(ctx, d, &[(3 * k + 1, &e)]));
    }
    f
}

fn laurent(c: &mut Criterion) {
    let ctx = RingCtx::new(3, 4).unwrap();
    let f = dense_poly(ctx, 2, 20);
    let g = dense_poly(ctx, 2, 15);
    c.bench_function("laurent_mul_d2", |b| b.iter(|| black_box(&f).mul(black_box(&g))));
    let big = RingCtx::new(5, 40).unwrap();
    let (f, g) = (dense_poly(big, 1, 30), dense_poly(big, 1, 30));
    c.bench_function("laurent_mul_bigint", |b| b.iter(|| black_box(&f).mul(black_box(&g))));
}

fn smith(c: &mut Criterion) {
    let ctx = RingCtx::new(2, 8).unwrap();
    let rows: Vec<Vec<i64>> =
        (0..40).map(|i| (0..40).map(|j| ((i * 7 + j * 13) % 17) * (1 << (i % 4))).collect()).collect();
    let m = ZMat::from_i64(ctx, &rows);
    c.bench_function("snf_40x40", |b| b.iter(|| snf(black_box(&m), Track::default())));
}

fn operators(c: &mut Criterion) {
    let ctx = RingCtx::new(3, 3).unwrap();
    let a = DiffOp::term(&dense_poly(ctx, 2, 3), 1, &[2, 1]).add(&DiffOp::basis(ctx, 2, 1, &[0, 3]));
    let b = DiffOp::term(&dense_poly(ctx, 2, 2), 1, &[1, 2]);
    c.bench_function("diffop_mul", |bch| bch.iter(|| black_box(&a).mul(black_box(&b))));
    let theta = PolyMatrix::from_rows(vec![
        vec![LaurentPoly::parse("3*t", ctx, 1).unwrap(), LaurentPoly::parse("t^2 + 2", ctx, 1).unwrap()],
        vec![LaurentPoly::zero(ctx, 1), LaurentPoly::parse("6", ctx, 1).unwrap()],
    ])
    .unwrap();
    let conn = Connection::new(ctx, 1, 1, vec![theta]).unwrap();
    let v = vec![LaurentPoly::one(ctx, 1), LaurentPoly::parse("t^-1", ctx, 1).unwrap()];
    c.bench_function("taylor_cocycle_order6", |b| b.iter(|| cocycle_check(black_box(&conn), &v, 6).unwrap()));
}

fn witt(c: &mut Criterion) {
    let fp = RingCtx::new(5, 1).unwrap();
    let comps: Vec<LaurentPoly> =
        (0..4).map(|k| LaurentPoly::parse(&format!("{} *t^{} + t^-1", k + 1, k), fp, 1).unwrap()).collect();
    let x = WittVector::from_components(5, comps.clone()).unwrap();
    let y = WittVector::from_components(5, comps.into_iter().rev().collect()).unwrap();
    c.bench_function("witt_add_p5_n4", |b| b.iter(|| black_box(&x).add(black_box(&y)).unwrap()));
    c.bench_function("witt_mul_p5_n4", |b| b.iter(|| black_box(&x).mul(black_box(&y)).unwrap()));
}

fn cohomology(c: &mut Criterion) {
    let ctx = RingCtx::new(3, 3).unwrap();
    let triv = Connection::trivial(ctx, 2, 1, 2);
    c.bench_function("cohomology_weight_d2_window8", |b| b.iter(|| compute_h(black_box(&triv), 1, 8).unwrap()));
    let banded = Connection::nabla_f(ctx, 0, LaurentPoly::parse("3*t", ctx, 1).unwrap()).unwrap();
    c.bench_function("cohomology_banded_window8", |b| b.iter(|| compute_h(black_box(&banded), 0, 8).unwrap()));
}

criterion_group!(benches, laurent, smith, operators, witt, cohomology);
criterion_main!(benches);
