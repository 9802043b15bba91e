//! The verification suites.

use num_bigint::BigInt;
use pmconn::cohomology::{compute_h, higgs_vanishing, hom_space};
use pmconn::dops::{
    cocycle_check, pullback, stratification_inverse_check, sub_indices, tau_transition, DiffOp, RingMap,
};
use pmconn::witt::{delta, mul_form, presentation_check, teichmuller_monomial, witt_compare, witt_weights};
use pmconn::{
    compare_raised_cohomology, descend_rank1, drw_d, drw_f, level_raise, psi, witt_level_raise, Basis, Connection,
    DescentOutcome, ExtensionPresentation, FrobLift, LaurentPoly, LiftChain, ModularInt, PolyMatrix, RingCtx,
    WittConnection, WittNormal, WittVector,
};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::gen;
use crate::{Case, Checker, Config};

/// Anchors and cases of a suite, or `None` for an unknown name.
pub fn build(name: &str, cfg: &Config) -> Option<(Vec<&'static str>, Vec<Case>)> {
    Some(match name {
        "prop4" => (PROP4_ANCHORS.to_vec(), prop4(cfg)),
        "taylor-cocycle" => (TAYLOR_ANCHORS.to_vec(), taylor(cfg)),
        "tau" => (TAU_ANCHORS.to_vec(), tau(cfg)),
        "level-raise" => (RAISE_ANCHORS.to_vec(), level_raise_suite(cfg)),
        "descent" => (DESCENT_ANCHORS.to_vec(), descent(cfg)),
        "theorem25" => (RAISED_ANCHORS.to_vec(), raised_cohomology(cfg)),
        "ov-example" => (OV_ANCHORS.to_vec(), ov_example(cfg)),
        "witt-identities" => (WITT_ID_ANCHORS.to_vec(), witt_identities(cfg)),
        "witt-compare" => (WITT_CMP_ANCHORS.to_vec(), witt_compare_suite(cfg)),
        _ => return None,
    })
}

const PROP4_ANCHORS: [&str; 4] = [
    "∂^⟨l⟩(t^i) = l!·C(i,l)·p^{m|l|}·t^{i−l}",
    "∂^⟨l⟩∂^⟨l'⟩ = ∂^⟨l+l'⟩",
    "∂^⟨k⟩f = Σ_{k'+k''=k} C(k,k')·∂^⟨k'⟩(f)·∂^⟨k''⟩",
    "(PQ)R = P(QR); (PQ)(f) = P(Q(f)); ρ(PQ) = ρ(P)ρ(Q)",
];
const TAYLOR_ANCHORS: [&str; 2] = [
    "θ(e) = Σ_k ∂^⟨k⟩(e) ⊗ (τ/p^m)^[k]; δ(τ/p^m) = τ/p^m ⊗ 1 + 1 ⊗ τ/p^m",
    "x ⊗ 1 ↦ Σ (−1)^{|l|}(τ/p^m)^[l] ⊗ ∂^⟨l⟩(x)",
];
const TAU_ANCHORS: [&str; 3] = [
    "τ_{f,f'}(f'*e) = Σ_k ((f'(t)−f(t))/p^m)^[k] f*(∂^⟨k⟩e)",
    "τ_{f,f''} = τ_{f,f'} ∘ τ_{f',f''}",
    "f ≡ f' mod p^{n+m} ⇒ τ_{f,f'} = id",
];
const RAISE_ANCHORS: [&str; 3] = [
    "F*(∇) integrable and quasi-nilpotent when ∇ is",
    "Θ̃'_i = Σ_j F(Θ̃_j)·(δ_ij t_j^p + t_i∂_i a_j)/(t_j^p + p a_j)",
    "Ψ(∇_{f(t)}) = ∇_{f(t^{p^m})} over m pure lifts",
];
const DESCENT_ANCHORS: [&str; 2] = [
    "gauge(F*C', w) = C for quasi-nilpotent rank-1 C at level 0",
    "(O, ∇_t) is not F*C' for any C' (coefficient of t^k, p∤k, in f mod p)",
];
const RAISED_ANCHORS: [&str; 4] = [
    "H^i(F*C) = ⊕_a H^i((C, Θ̃ + p^{m−1}a))",
    "H^0(C) = H^0(F*C) at the pullback weights, and ⊗ Q",
    "p^{min(4l(m−1)(i+1), n)} kills H^i of every twist a ≠ 0",
    "H^i((O, θ_a)) = 0 over Z/pZ for a ≢ 0",
];
const OV_ANCHORS: [&str; 4] = [
    "Hom((O,∇₁),(O,∇₀)) = 0 at level 1; a unit multiple of t^{±1} at level 0",
    "(O,∇_t) at level 0 is not in the image of level raising",
    "∂^l(1) = Π_{i<l}(p^{m−1} − i p^m)·t^{−l} for (O, ∇_{p^{m−1}})",
    "∂^l(1) = p^l for (O, ∇_{pt})",
];
const WITT_ID_ANCHORS: [&str; 4] = [
    "ghost map w_k = Σ_{r≤k} p^r x_r^{p^{k−r}} is a ring homomorphism",
    "FV = p; dF = pFd; FdV = d; Fd[x] = [x]^{p−1}d[x]; d(xy) = x dy + y dx",
    "W_nΩ¹_w ≅ Z/p^{n−r} for w = j/p^r",
    "W_nΩ² = 0 on the one-dimensional torus, so d∘d = 0",
];
const WITT_CMP_ANCHORS: [&str; 3] = [
    "H^0(C) = H^0(F_*C) at integral weights and ⊗ Q",
    "ker/coker of H^1(C) → H^1(F_*C) killed by the transported bound; F∘∇ = ∇'∘F",
    "F_*(W, p^m d + δ(f) dlog) = (W, p^{m−1} d + δ(f(t^p)) dlog)",
];

fn ctx(p: u64, n: u32) -> RingCtx {
    RingCtx::new(p, n).expect("grid context")
}

fn poly(s: &str, c: RingCtx, d: usize) -> LaurentPoly {
    LaurentPoly::parse(s, c, d).expect("catalog polynomial")
}

fn falling(i: i64, l: u32) -> BigInt {
    (0..l as i64).fold(BigInt::from(1), |acc, k| acc * BigInt::from(i - k))
}

fn binom_u(a: u32, b: u32) -> i64 {
    (0..b as i64).fold(1i64, |acc, k| acc * (a as i64 - k) / (k + 1))
}

fn prop4(cfg: &Config) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[1, 2, 3, 4]) {
            for m in cfg.levels(&(0..=n).collect::<Vec<_>>()) {
                for d in cfg.dims(&[1, 2]) {
                    cases.push(Case::new(format!("p={p} n={n} m={m} d={d}"), move |seed, ck| {
                        prop4_case(p, n, m, d, seed, ck)
                    }));
                }
            }
        }
    }
    cases
}

fn prop4_case(p: u64, n: u32, m: u32, d: usize, seed: u64, ck: &mut Checker) {
    const OPS: usize = 501;
    let c = ctx(p, n);
    let mut rng = gen::rng(seed);
    let ops: Vec<DiffOp> = (0..OPS).map(|_| gen::diff_op(&mut rng, c, d, m, 4)).collect();
    for k in 0..OPS / 3 {
        let (a, b, e) = (&ops[3 * k], &ops[3 * k + 1], &ops[3 * k + 2]);
        ck.eq(|| format!("associativity triple {k}"), &a.mul(b).mul(e), &a.mul(&b.mul(e)));
    }
    for (i, pair) in ops.windows(2).enumerate() {
        let f = gen::poly(&mut rng, c, d, 3, 3);
        ck.eq(
            || format!("module compatibility {i}, f = {f}"),
            &pair[0].mul(&pair[1]).apply(&f),
            &pair[0].apply(&pair[1].apply(&f)),
        );
        if m > 0 && i % 5 == 0 {
            let lhs = pair[0].mul(&pair[1]).level_change(m - 1);
            let rhs = pair[0].level_change(m - 1).and_then(|x| Ok(x.mul(&pair[1].level_change(m - 1)?)));
            ck.eq(|| format!("level change is multiplicative {i}"), &lhs, &rhs);
        }
    }
    for (i, op) in ops.iter().enumerate() {
        let l = gen::multi_index(&mut rng, d, 4);
        let l2 = op.terms().next().map(|(k, _)| k.clone()).unwrap_or_else(|| vec![0; d]);
        // Monomial action against the falling-factorial oracle.
        let e = gen::exponent(&mut rng, d, 6);
        let mut coeff = BigInt::from(1);
        for k in 0..d {
            coeff *= falling(e[k], l[k]) * BigInt::from(p).pow(m * l[k]);
        }
        let shifted: Vec<i64> = e.iter().zip(&l).map(|(a, &b)| a - b as i64).collect();
        let expect = LaurentPoly::monomial(ModularInt::from_bigint(c, &coeff), &shifted);
        let got = DiffOp::basis(c, d, m, &l).apply(&LaurentPoly::monomial(ModularInt::one(c), &e));
        ck.eq(|| format!("monomial action op {i}, l = {l:?}, i = {e:?}"), &expect, &got);
        // Composition of basis operators.
        let sum: Vec<u32> = l.iter().zip(&l2).map(|(a, b)| a + b).collect();
        ck.eq(
            || format!("basis product {l:?}·{l2:?}"),
            &DiffOp::basis(c, d, m, &sum),
            &DiffOp::basis(c, d, m, &l).mul(&DiffOp::basis(c, d, m, &l2)),
        );
        // Commutation with a function.
        let f = gen::poly(&mut rng, c, d, 2, 2);
        let lhs = DiffOp::basis(c, d, m, &l).mul(&DiffOp::multiplication(&f, m));
        let mut rhs = DiffOp::zero(c, d, m);
        for k1 in sub_indices(&l) {
            let k2: Vec<u32> = l.iter().zip(&k1).map(|(a, b)| a - b).collect();
            let b: i64 = l.iter().zip(&k1).map(|(&a, &b)| binom_u(a, b)).product();
            let coef = DiffOp::basis(c, d, m, &k1).apply(&f).scalar_mul_i64(b);
            rhs = rhs.add(&DiffOp::term(&coef, m, &k2));
        }
        ck.eq(|| format!("Leibniz rule op {i}, k = {l:?}, f = {f}"), &rhs, &lhs);
    }
}

/// Rank-1 connections `∇_f` on the one-dimensional torus from a fixed list of coefficients.
pub fn rank1_catalog(p: u64, n: u32, m: u32) -> Vec<(String, Connection)> {
    let c = ctx(p, n);
    let (p1, p2) = (p as i64, (p * p) as i64);
    let fs = [
        "0".to_string(),
        "1".to_string(),
        "t".to_string(),
        format!("{p1}"),
        format!("{p1}*t"),
        format!("{p1}*t^-1 + {p2}*t^2"),
        format!("{p2}*t^3 - {p1}"),
        format!("1 + {p1}*t^2"),
        format!("{} + {p1}*t^-2", p1 - 1),
    ];
    fs.iter()
        .map(|f| (format!("∇_{{{f}}} at level {m}"), Connection::nabla_f(c, m, poly(f, c, 1)).expect("rank 1")))
        .collect()
}

fn taylor(cfg: &Config) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[2, 3]) {
            for m in cfg.levels(&[0, 1, 2]) {
                cases.push(Case::new(format!("rank-1 catalog p={p} n={n} m={m}"), move |_, ck| {
                    let c0 = ctx(p, n);
                    let sections = [LaurentPoly::one(c0, 1), poly("t^2 - t^-1", c0, 1)];
                    for (label, c) in rank1_catalog(p, n, m) {
                        let Some(qn) = ck.ok(|| label.clone(), c.is_quasi_nilpotent()) else { continue };
                        if !qn.is_true() {
                            continue;
                        }
                        for v in &sections {
                            taylor_checks(&c, std::slice::from_ref(v), &label, ck);
                        }
                    }
                }));
            }
        }
    }
    let primes = cfg.primes(&[2, 3, 5]);
    let lengths = cfg.lengths(&[2, 3]);
    let levels = cfg.levels(&[0, 1]);
    for k in 0..50 {
        let (primes, lengths, levels) = (primes.clone(), lengths.clone(), levels.clone());
        cases.push(Case::new(format!("random rank-2 object {k}"), move |seed, ck| {
            let mut rng = gen::rng(seed);
            let p = *primes.choose(&mut rng).expect("grid");
            let n = *lengths.choose(&mut rng).expect("grid");
            let m = *levels.choose(&mut rng).expect("grid");
            let c0 = ctx(p, n);
            let c = loop {
                let c = if rng.gen_bool(0.5) {
                    gen::rank2_divisible(&mut rng, c0, m)
                } else {
                    gen::rank2_triangular(&mut rng, c0, m)
                };
                if c.is_quasi_nilpotent().map(|q| q.is_true()).unwrap_or(false) {
                    break c;
                }
            };
            let v = vec![gen::poly(&mut rng, c0, 1, 2, 2), gen::poly(&mut rng, c0, 1, 2, 2)];
            taylor_checks(&c, &v, &format!("p={p} n={n} m={m} Θ̃={:?}", c.theta()[0].to_strings()), ck);
        }));
    }
    cases
}

fn taylor_checks(c: &Connection, v: &[LaurentPoly], label: &str, ck: &mut Checker) {
    for order in [2u32, 6] {
        if let Some(r) = ck.ok(|| format!("{label}, cocycle order {order}"), cocycle_check(c, v, order)) {
            ck.check(
                r.holds(),
                || format!("{label}, cocycle order {order}"),
                "cocycle identity",
                || format!("{:?}", r.failures),
            );
        }
        if let Some(r) = ck.ok(|| format!("{label}, inverse order {order}"), stratification_inverse_check(c, v, order))
        {
            ck.check(
                r.holds(),
                || format!("{label}, inverse order {order}"),
                "closed-form inverse",
                || format!("{:?}", r.failures),
            );
        }
    }
}

fn tau(cfg: &Config) -> Vec<Case> {
    let primes = cfg.primes(&[2, 3]);
    let lengths = cfg.lengths(&[2, 3]);
    let levels = cfg.levels(&[0, 1, 2]);
    (0..100)
        .map(|k| {
            let (primes, lengths, levels) = (primes.clone(), lengths.clone(), levels.clone());
            Case::new(format!("lift pair {k}"), move |seed, ck| {
                let mut rng = gen::rng(seed);
                let p = *primes.choose(&mut rng).expect("grid");
                let n = *lengths.choose(&mut rng).expect("grid");
                let m = *levels.choose(&mut rng).expect("grid");
                tau_case(p, n, m, &mut rng, ck);
            })
        })
        .collect()
}

fn tau_case(p: u64, n: u32, m: u32, rng: &mut rand_chacha::ChaCha8Rng, ck: &mut Checker) {
    let c0 = ctx(p, n);
    let hi = ctx(p, n + m + 8);
    let c = loop {
        let c = match rng.gen_range(0..3) {
            0 => Connection::nabla_f(c0, m, gen::poly(rng, c0, 1, 2, 2).scalar_mul_i64(p as i64)).expect("rank 1"),
            1 => gen::rank2_divisible(rng, c0, m),
            _ => gen::rank2_triangular(rng, c0, m),
        };
        if c.is_quasi_nilpotent().map(|q| q.is_true()).unwrap_or(false) {
            break c;
        }
    };
    let label = format!("p={p} n={n} m={m} rank={} Θ̃={:?}", c.rank(), c.theta()[0].to_strings());
    let base = poly(&format!("t^{p}"), hi, 1).add(&gen::poly(rng, hi, 1, 2, 2).mul_p_pow(1));
    let lo = n.max(m + 1);
    let hi_agree = (n + m).max(lo);
    let k1 = lo;
    let k2 = rng.gen_range(lo..=hi_agree);
    let f = RingMap { images: vec![base.clone()] };
    let f1 = RingMap { images: vec![base.add(&gen::poly(rng, hi, 1, 2, 2).mul_p_pow(k1))] };
    let f2 = RingMap { images: vec![f1.images[0].add(&gen::poly(rng, hi, 1, 2, 2).mul_p_pow(k2))] };
    let f3 = RingMap { images: vec![base.add(&gen::poly(rng, hi, 1, 2, 2).mul_p_pow(n + m))] };
    let Some(t01) = ck.ok(|| format!("{label}, τ(f,f')"), tau_transition(&c, &f, &f1)) else { return };
    let Some(t12) = ck.ok(|| format!("{label}, τ(f',f'')"), tau_transition(&c, &f1, &f2)) else { return };
    let Some(t02) = ck.ok(|| format!("{label}, τ(f,f'')"), tau_transition(&c, &f, &f2)) else { return };
    ck.check(t01.inverse().is_ok(), || format!("{label}, τ(f,f')"), "invertible", || "singular".into());
    let pb = pullback(&c, &f).expect("pullback");
    let pb1 = pullback(&c, &f1).expect("pullback");
    ck.eq(|| format!("{label}, intertwining"), &Ok(pb1.clone()), &pb.gauge(&t01).map_err(|e| e.to_string()));
    ck.eq(|| format!("{label}, composition"), &t02, &t01.mul(&t12));
    if let Some(t03) = ck.ok(|| format!("{label}, τ(f,f) mod p^(n+m)"), tau_transition(&c, &f, &f3)) {
        ck.eq(|| format!("{label}, agreement mod p^(n+m)"), &PolyMatrix::identity(c0, 1, c.rank()), &t03);
    }
}

fn level_raise_suite(cfg: &Config) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[1, 2, 3, 4]) {
            for m in cfg.levels(&(1..=n).collect::<Vec<_>>()) {
                for d in cfg.dims(&[1, 2]) {
                    cases.push(Case::new(format!("p={p} n={n} m={m} d={d}"), move |seed, ck| {
                        raise_case(p, n, m, d, seed, ck)
                    }));
                }
            }
        }
    }
    cases
}

fn raise_case(p: u64, n: u32, m: u32, d: usize, seed: u64, ck: &mut Checker) {
    let c0 = ctx(p, n);
    let mut rng = gen::rng(seed);
    // Each object is tagged with whether it is quasi-nilpotent by construction.
    let mut objects: Vec<(Connection, bool)> = Vec::new();
    for k in 0..4 {
        let qn = k % 2 == 0;
        let scale = if qn { p as i64 } else { 1 };
        if d == 1 {
            let f = gen::poly(&mut rng, c0, 1, 3, 3).scalar_mul_i64(scale);
            objects.push((Connection::nabla_f(c0, m, f).expect("rank 1"), qn));
            objects.push((gen::rank2_triangular(&mut rng, c0, m), true));
        } else {
            let g = gen::poly(&mut rng, c0, 2, 3, 2).scalar_mul_i64(scale);
            let f = (0..2)
                .map(|i| g.log_partial(i).add(&LaurentPoly::constant(gen::scalar(&mut rng, c0).mul_i64(scale), 2)))
                .collect();
            objects.push((Connection::rank1(c0, m, f).expect("rank 1"), qn));
        }
    }
    let lifts = [
        FrobLift::pure(c0, d),
        FrobLift::new(c0, d, (0..d).map(|_| gen::poly(&mut rng, c0, d, 2, 2)).collect()).expect("lift"),
    ];
    for (c, qn_in) in &objects {
        let label = format!("Θ̃={:?}", c.theta().iter().map(|t| t.to_strings()).collect::<Vec<_>>());
        if *qn_in {
            let qn = c.is_quasi_nilpotent().map(|q| q.is_true()).unwrap_or(false);
            ck.check(qn, || label.clone(), "input quasi-nilpotent", || "not established".into());
        }
        for (li, f) in lifts.iter().enumerate() {
            let Some(up) = ck.ok(|| format!("{label}, lift {li}"), level_raise(c, f)) else { continue };
            ck.check(up.is_integrable(), || format!("{label}, lift {li}"), "integrable", || "curvature ≠ 0".into());
            ck.eq(|| format!("{label}, lift {li}, level"), &(m - 1), &up.m());
            if *qn_in {
                let qn_out = up.is_quasi_nilpotent().map(|q| q.is_true()).unwrap_or(false);
                ck.check(qn_out, || format!("{label}, lift {li}"), "quasi-nilpotent", || "not established".into());
            }
        }
    }
    if d == 1 {
        let f = gen::poly(&mut rng, c0, 1, 3, 3);
        let c = Connection::nabla_f(c0, m, f.clone()).expect("rank 1");
        let expect = Connection::nabla_f(c0, 0, f.scale_exponents((p as i64).pow(m))).expect("rank 1");
        let got = psi(&c, &LiftChain::pure(c0, 1, m as usize));
        ck.eq(|| format!("Ψ of ∇_{{{f}}}"), &Ok(expect), &got.map_err(|e| e.to_string()));
    }
}

/// Level-0 rank-1 connections `∇_{c + p·g}` used by the descent suite.
pub fn descent_catalog(p: u64, n: u32) -> Vec<(String, Connection)> {
    let c0 = ctx(p, n);
    let gs = ["0", "1", "t", "t^-1", "t^2 + t^-3", "2*t^3 - t", "t^4 + 3*t^-4 + 1"];
    let mut out = Vec::new();
    for c in 0..p {
        for g in gs {
            let f = LaurentPoly::from_i64(c0, 1, c as i64).add(&poly(g, c0, 1).mul_p_pow(1));
            out.push((format!("∇_{{{f}}}"), Connection::nabla_f(c0, 0, f).expect("rank 1")));
        }
    }
    out
}

fn descent(cfg: &Config) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3]) {
        for n in cfg.lengths(&[2, 3]) {
            for (label, c) in descent_catalog(p, n) {
                cases.push(Case::new(format!("p={p} n={n} {label}"), move |_, ck| {
                    let c0 = c.ctx();
                    let lift = FrobLift::pure(c0, 1);
                    let qn = c.is_quasi_nilpotent().map(|q| q.is_true()).unwrap_or(false);
                    ck.check(qn, String::new, "quasi-nilpotent", || "not established".into());
                    match ck.ok(String::new, descend_rank1(&c, &lift, 64)) {
                        Some(DescentOutcome::Descended { connection, witness }) => {
                            ck.eq(|| "descended level".into(), &1, &connection.m());
                            let back = level_raise(&connection, &lift).and_then(|u| u.gauge(&witness));
                            ck.eq(
                                || format!("round trip via {:?}", witness.to_strings()),
                                &Ok(c.clone()),
                                &back.map_err(|e| e.to_string()),
                            );
                        }
                        Some(DescentOutcome::Obstructed(o)) => {
                            ck.check(false, String::new, "descent", || format!("obstructed: {o:?}"));
                        }
                        None => {}
                    }
                }));
            }
            cases.push(Case::new(format!("p={p} n={n} ∇_t"), move |_, ck| {
                let c0 = ctx(p, n);
                let c = Connection::nabla_f(c0, 0, poly("t", c0, 1)).expect("rank 1");
                match ck.ok(String::new, descend_rank1(&c, &FrobLift::pure(c0, 1), 64)) {
                    Some(DescentOutcome::Obstructed(o)) => {
                        ck.check(
                            o.excludes_image(p),
                            || format!("{o:?}"),
                            "certificate excludes the image",
                            || "p | k".into(),
                        );
                        ck.eq(|| "obstruction exponent".into(), &1, &o.exponent);
                    }
                    Some(DescentOutcome::Descended { .. }) => {
                        ck.check(false, String::new, "obstruction", || "descended".into())
                    }
                    None => {}
                }
            }));
        }
    }
    cases
}

/// Nilpotent, weight-homogeneous presentations on the one-dimensional torus of length 1, 2 and 3.
pub fn nilpotent_catalog(c0: RingCtx, m: u32) -> Vec<(String, ExtensionPresentation)> {
    let z = || LaurentPoly::zero(c0, 1);
    let mut out =
        vec![("trivial rank 1".to_string(), ExtensionPresentation::unipotent(Connection::trivial(c0, 1, m, 1)))];
    for a in ["1", "t", "2*t^-1"] {
        let e = poly(a, c0, 1);
        let th = PolyMatrix::from_rows(vec![vec![z(), e], vec![z(), z()]]).expect("square");
        out.push((
            format!("rank 2 [[0,{a}],[0,0]]"),
            ExtensionPresentation::unipotent(Connection::new(c0, 1, m, vec![th]).expect("valid")),
        ));
    }
    let th = PolyMatrix::from_rows(vec![
        vec![z(), poly("t", c0, 1), poly("3*t^2", c0, 1)],
        vec![z(), z(), poly("t", c0, 1)],
        vec![z(), z(), z()],
    ])
    .expect("square");
    out.push((
        "rank 3 Jordan [[0,t,3t^2],[0,0,t],[0,0,0]]".into(),
        ExtensionPresentation::unipotent(Connection::new(c0, 1, m, vec![th]).expect("valid")),
    ));
    let th = PolyMatrix::from_rows(vec![
        vec![z(), poly("1", c0, 1), z()],
        vec![z(), z(), poly("t^-1", c0, 1)],
        vec![z(), z(), z()],
    ])
    .expect("square");
    out.push((
        "rank 3 [[0,1,0],[0,0,t^-1],[0,0,0]]".into(),
        ExtensionPresentation::unipotent(Connection::new(c0, 1, m, vec![th]).expect("valid")),
    ));
    out
}

fn raised_cohomology(cfg: &Config) -> Vec<Case> {
    let window = cfg.window;
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3]) {
        for n in cfg.lengths(&[2, 3]) {
            for m in cfg.levels(&[1, 2, 3]) {
                if m > n && cfg.m.is_none() {
                    continue;
                }
                for (label, pres) in nilpotent_catalog(ctx(p, n), m) {
                    cases.push(Case::new(format!("p={p} n={n} m={m} {label}"), move |_, ck| {
                        let lift = FrobLift::pure(pres.connection.ctx(), 1);
                        if let Some(r) = ck.ok(String::new, compare_raised_cohomology(&pres, &lift, window)) {
                            ck.check(r.decomposition, String::new, "twist decomposition of H^i", || format!("{r:?}"));
                            ck.check(r.h0_untwisted, String::new, "H^0 divisors at pullback weights", || {
                                format!("{r:?}")
                            });
                            ck.check(r.h0_rational, String::new, "H^0 ⊗ Q", || format!("{r:?}"));
                            ck.check(r.untwisted_matches, String::new, "a = 0 summand is C", || format!("{r:?}"));
                            for b in &r.bounds {
                                ck.check(
                                    b.holds,
                                    || format!("twist {:?} degree {}", b.a, b.degree),
                                    &format!("exponent ≤ {}", b.bound),
                                    || b.max_exponent.to_string(),
                                );
                            }
                        }
                    }));
                }
            }
            let c2 = ctx(p, n);
            if cfg.d.is_none() || cfg.d == Some(2) {
                cases.push(Case::new(format!("p={p} n={n} m=1 trivial d=2"), move |_, ck| {
                    let pres = ExtensionPresentation::unipotent(Connection::trivial(c2, 2, 1, 1));
                    if let Some(r) = ck.ok(String::new, compare_raised_cohomology(&pres, &FrobLift::pure(c2, 2), 3)) {
                        ck.check(r.passes(), String::new, "comparison", || format!("{r:?}"));
                    }
                }));
            }
        }
        cases.push(Case::new(format!("p={p} Higgs vanishing"), move |_, ck| {
            for a in 1..p as i64 {
                ck.eq(|| format!("a = {a}"), &Ok(true), &higgs_vanishing(p, &[a], window).map_err(|e| e.to_string()));
            }
            for a in 0..p as i64 {
                for b in 0..p as i64 {
                    if a != 0 || b != 0 {
                        ck.eq(
                            || format!("a = ({a},{b})"),
                            &Ok(true),
                            &higgs_vanishing(p, &[a, b], 3).map_err(|e| e.to_string()),
                        );
                    }
                }
            }
        }));
    }
    cases
}

fn ov_example(cfg: &Config) -> Vec<Case> {
    let window = cfg.window;
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[2, 3, 4]) {
            cases.push(Case::new(format!("p={p} n={n}"), move |_, ck| ov_case(p, n, window, ck)));
        }
    }
    cases
}

fn is_unit_monomial(g: &PolyMatrix, e: i64) -> bool {
    let f = g.get(0, 0);
    f.len() == 1 && f.terms().all(|(x, c)| x.0[0] == e && c.is_unit())
}

fn ov_case(p: u64, n: u32, window: i64, ck: &mut Checker) {
    let c0 = ctx(p, n);
    let nab = |f: &str, m: u32| Connection::nabla_f(c0, m, poly(f, c0, 1)).expect("rank 1");
    // Non-fullness.
    for (src, dst) in [("1", "0"), ("0", "1")] {
        if let Some(h) = ck.ok(|| "Hom at level 1".into(), hom_space(&nab(src, 1), &nab(dst, 1), window)) {
            ck.eq(|| format!("Hom(∇_{src}, ∇_{dst}) at level 1"), &0, &h.len());
        }
    }
    let n0 = nab("0", 0);
    let n1 = nab("1", 0);
    for (src, dst, e, name) in [(&n0, &n1, -1i64, "Hom(∇₀, ∇₁)"), (&n1, &n0, 1, "Hom(∇₁, ∇₀)")] {
        if let Some(h) = ck.ok(|| format!("{name} at level 0"), hom_space(src, dst, window)) {
            let found = h.iter().find(|g| g.order == n && is_unit_monomial(&g.matrix, e));
            ck.check(
                found.is_some(),
                || format!("{name} at level 0"),
                &format!("free generator u·t^{e}"),
                || format!("{h:?}"),
            );
            if let Some(g) = found {
                let ok = dst.gauge(&g.matrix).map(|x| &x == src).unwrap_or(false);
                ck.check(ok, || format!("{name} witness"), "gauge(target, g) = source", || "mismatch".into());
            }
        }
    }
    // Non-essential-surjectivity.
    let nt = nab("t", 0);
    match ck.ok(|| "descent of ∇_t".into(), descend_rank1(&nt, &FrobLift::pure(c0, 1), 2 * window)) {
        Some(DescentOutcome::Obstructed(o)) => {
            ck.check(o.excludes_image(p), || format!("∇_t certificate {o:?}"), "p ∤ k", || "p | k".into());
        }
        Some(DescentOutcome::Descended { .. }) => {
            ck.check(false, || "∇_t".into(), "obstruction", || "descended".into())
        }
        None => {}
    }
    if let Some(h) = ck.ok(|| "H^0(∇_t)".into(), compute_h(&nt, 0, window)) {
        ck.check(h.weights.is_empty() && h.stable, || "H^0(∇_t) at level 0".into(), "0, stable", || format!("{h:?}"));
    }
    // Theta powers.
    let one = vec![LaurentPoly::one(c0, 1)];
    for m in 1..=n {
        let pm1 = c0.p_pow(m - 1);
        let c = Connection::nabla_f(c0, m, LaurentPoly::constant(pm1.clone(), 1)).expect("rank 1");
        let mut coeff = ModularInt::one(c0);
        for l in 0..=2 * n {
            if l > 0 {
                coeff = coeff.mul_ref(&pm1.sub_ref(&c0.p_pow(m).mul_i64(l as i64 - 1)));
            }
            let expect = LaurentPoly::monomial(coeff.clone(), &[-(l as i64)]);
            let got = c.theta_power_apply(&[l], &one, Basis::Dt).map(|v| v[0].clone());
            ck.eq(
                || format!("∂^{l}(1) for ∇_{{p^{}}} at level {m}", m - 1),
                &Ok(expect),
                &got.map_err(|e| e.to_string()),
            );
        }
        let c = Connection::nabla_f(c0, m - 1, poly(&format!("{p}*t"), c0, 1)).expect("rank 1");
        for l in 0..=2 * n {
            let got = c.theta_power_apply(&[l], &one, Basis::Dt).map(|v| v[0].clone());
            let expect = LaurentPoly::constant(c0.p_pow(l), 1);
            ck.eq(|| format!("∂^{l}(1) for ∇_{{pt}} at level {}", m - 1), &Ok(expect), &got.map_err(|e| e.to_string()));
        }
    }
}

/// The `k`-th ghost component of the digit lift at full precision `p^n`.
pub fn ghost_reference(x: &WittVector, k: u32) -> LaurentPoly {
    let p = x.p();
    let full = ctx(p, x.n());
    let mut w = LaurentPoly::zero(full, 1);
    for r in 0..=k {
        let lift = x.components()[r as usize].lift_to(full).expect("lift");
        w = w.add(&lift.pow(p.pow(k - r)).mul_p_pow(r));
    }
    w.reduce_to(ctx(p, k + 1)).expect("reduce")
}

fn witt_identities(cfg: &Config) -> Vec<Case> {
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[1, 2, 3, 4]) {
            cases.push(Case::new(format!("ghost oracle p={p} n={n}"), move |seed, ck| {
                let mut rng = gen::rng(seed);
                for i in 0..200 {
                    let x = gen::witt_vector(&mut rng, p, n);
                    let y = gen::witt_vector(&mut rng, p, n);
                    let ops = [
                        ("add", x.add(&y).expect("shape")),
                        ("sub", x.sub(&y).expect("shape")),
                        ("mul", x.mul(&y).expect("shape")),
                        ("neg", x.neg()),
                    ];
                    for k in 0..n {
                        let (gx, gy) = (ghost_reference(&x, k), ghost_reference(&y, k));
                        for (name, z) in &ops {
                            let expect = match *name {
                                "add" => gx.add(&gy),
                                "sub" => gx.sub(&gy),
                                "mul" => gx.mul(&gy),
                                _ => gx.neg(),
                            };
                            ck.eq(|| format!("pair {i} {name} ghost {k}"), &expect, &ghost_reference(z, k));
                        }
                    }
                    if n >= 2 {
                        witt_identity_checks(&x, &y, i, ck);
                    }
                }
                if n >= 2 {
                    for c in 1..p {
                        for j in -6..=6 {
                            let x = teichmuller_monomial(p, n, c, j).expect("monomial");
                            let lhs = drw_f(&drw_d(&x).expect("d")).expect("F");
                            let xp = WittNormal::from_witt(
                                &teichmuller_monomial(p, n, c.pow(p as u32 - 1) % p, (p as i64 - 1) * j)
                                    .expect("monomial"),
                            )
                            .expect("normal form");
                            let rhs = mul_form(&xp, &drw_d(&x).expect("d")).and_then(|w| w.truncate(n - 1));
                            ck.eq(|| format!("Fd[x] for x = {c}·t^{j}"), &Ok(lhs), &rhs.map_err(|e| e.to_string()));
                        }
                    }
                }
            }));
        }
    }
    for p in cfg.primes(&[2, 3, 5]) {
        for n in cfg.lengths(&[1, 2, 3]) {
            cases.push(Case::new(format!("presentations p={p} n={n}"), move |_, ck| {
                for degree in [0u8, 1] {
                    for w in witt_weights(p, n, 20) {
                        if let Some(r) = ck.ok(|| format!("weight {w:?}"), presentation_check(p, n, degree, w)) {
                            ck.eq(|| format!("degree {degree} weight {}/p^{}", w.j, w.r), &r.predicted, &r.computed);
                        }
                    }
                }
            }));
        }
    }
    cases
}

fn witt_identity_checks(x: &WittVector, y: &WittVector, i: usize, ck: &mut Checker) {
    let p = x.p() as i64;
    let n = x.n();
    let d = |v: &WittVector| drw_d(v).expect("d");
    ck.eq(|| format!("pair {i} FV = p"), &x.scale(p).truncate(n - 1).ok(), &x.verschiebung().frobenius().ok());
    ck.eq(|| format!("pair {i} dF = pFd"), &drw_f(&d(x)).ok().map(|w| w.scale(p)), &x.frobenius().ok().map(|f| d(&f)));
    ck.eq(|| format!("pair {i} FdV = d"), &d(x).truncate(n - 1).ok(), &drw_f(&d(&x.verschiebung())).ok());
    ck.eq(|| format!("pair {i} d additive"), &d(x).add(&d(y)).ok(), &x.add(y).ok().map(|s| d(&s)));
    // Leibniz with an integral factor δ(x_0 lift).
    let full = ctx(x.p(), n);
    let a = delta(&x.components()[0].lift_to(full).expect("lift")).expect("delta");
    let an = WittNormal::from_witt(&a).expect("normal form");
    let yn = WittNormal::from_witt(y).expect("normal form");
    let lhs = a.mul(y).ok().map(|v| d(&v));
    let rhs = mul_form(&an, &d(y)).and_then(|u| u.add(&mul_form(&yn, &d(&a))?)).ok();
    ck.eq(|| format!("pair {i} Leibniz"), &lhs, &rhs);
}

fn witt_compare_suite(cfg: &Config) -> Vec<Case> {
    let window = cfg.window;
    let mut cases = Vec::new();
    for p in cfg.primes(&[2, 3]) {
        for n in cfg.lengths(&[2, 3]) {
            for m in cfg.levels(&[1, 2]) {
                cases.push(Case::new(format!("p={p} n={n} m={m}"), move |seed, ck| {
                    let c0 = ctx(p, n);
                    for u in -2i64..=2 {
                        let f = LaurentPoly::constant(ModularInt::from_i64(c0, u * (p as i64).pow(m)), 1);
                        let c = WittConnection::new(m, delta(&f).expect("delta"));
                        if let Some(r) = ck.ok(|| format!("f = {f}"), witt_compare(&c, window)) {
                            ck.check(
                                r.h0_exact,
                                || format!("f = {f}"),
                                "H^0 exact at integral weights",
                                || format!("{r:?}"),
                            );
                            ck.check(r.h0_rational, || format!("f = {f}"), "H^0 ⊗ Q", || format!("{r:?}"));
                            ck.check(
                                r.h1_max <= r.h1_bound,
                                || format!("f = {f}"),
                                &format!("H^1 exponents ≤ {}", r.h1_bound),
                                || r.h1_max.to_string(),
                            );
                            ck.check(
                                r.fractional_h1_max <= m,
                                || format!("f = {f}"),
                                "fractional H^1 torsion ≤ m",
                                || r.fractional_h1_max.to_string(),
                            );
                            ck.check(r.chain_map, || format!("f = {f}"), "F∘∇ = ∇'∘F", || "differs".into());
                        }
                    }
                    let mut rng = gen::rng(seed);
                    for k in 0..20 {
                        let g = gen::poly(&mut rng, c0, 1, 3, 3);
                        let classical = level_raise(
                            &Connection::nabla_f(c0, m, g.clone()).expect("rank 1"),
                            &FrobLift::pure(c0, 1),
                        );
                        let via_classical = classical.and_then(|cl| delta(cl.theta()[0].get(0, 0)));
                        let via_witt =
                            delta(&g).and_then(|w| witt_level_raise(&WittConnection::new(m, w))).map(|w| w.f().clone());
                        ck.eq(
                            || format!("δ agreement {k}, g = {g}"),
                            &via_classical.map_err(|e| e.to_string()),
                            &via_witt.map_err(|e| e.to_string()),
                        );
                    }
                }));
            }
        }
    }
    cases
}
