//! Acceptance criteria, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pmconn::{compute_h, RingCtx};
use pmconn_cli::suites::{descent_catalog, nilpotent_catalog, rank1_catalog};
use pmconn_cli::{run_suite, Config, SuiteResult, SUITES};

/// Default weight window of the stability criterion.
const WINDOW: i64 = 8;

/// Suite and time budget of criteria 1 to 9.
const BUDGETS: [(&str, &str, u64); 9] = [
    ("1", "ov-example", 10),
    ("2", "prop4", 30),
    ("3", "taylor-cocycle", 60),
    ("4", "tau", 60),
    ("5", "level-raise", 30),
    ("6", "descent", 60),
    ("7", "theorem25", 120),
    ("8", "witt-identities", 120),
    ("9", "witt-compare", 120),
];

fn report(id: &str, name: &str, ok: bool, detail: &str) -> bool {
    println!("{} criterion {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn timed(name: &str, cfg: &Config) -> (SuiteResult, Duration) {
    let start = Instant::now();
    let r = run_suite(name, cfg).expect("known suite");
    (r, start.elapsed())
}

fn stability() -> Result<usize, String> {
    let mut count = 0;
    let mut conns = Vec::new();
    for p in [2u64, 3, 5] {
        for n in [2u32, 3] {
            for m in [0u32, 1, 2] {
                conns.extend(rank1_catalog(p, n, m));
            }
        }
    }
    for p in [2u64, 3] {
        for n in [2u32, 3] {
            conns.extend(descent_catalog(p, n));
            let ctx = RingCtx::new(p, n).map_err(|e| e.to_string())?;
            for m in 1..=n {
                conns.extend(nilpotent_catalog(ctx, m).into_iter().map(|(l, e)| (l, e.connection)));
            }
        }
    }
    for (label, c) in conns {
        for i in 0..=c.d() {
            let r = compute_h(&c, i, WINDOW).map_err(|e| format!("{label}: {e}"))?;
            if !r.stable {
                return Err(format!("{label}: H^{i} unstable"));
            }
            count += 1;
        }
    }
    Ok(count)
}

fn main() -> ExitCode {
    let cfg = Config::default();
    let mut all = true;
    let mut first = Vec::new();
    for (id, suite, budget) in BUDGETS {
        let (r, t) = timed(suite, &cfg);
        let ok = r.passed() && t < Duration::from_secs(budget);
        let detail = format!(
            "{} cases, {} checks, {} failures, {:.2} s (budget {budget} s)",
            r.cases,
            r.checks,
            r.failures.len(),
            t.as_secs_f64()
        );
        all &= report(id, suite, ok, &detail);
        for f in r.failures.iter().take(5) {
            println!("    case {}: {} expected {} got {}", f.case, f.inputs, f.expected, f.got);
        }
        first.push((suite, r.to_json()));
    }
    let serial = Config { jobs: 1, ..Config::default() };
    let differing: Vec<&str> = SUITES
        .iter()
        .filter(|s| {
            let again = run_suite(s, &serial).expect("known suite").to_json();
            first.iter().find(|(n, _)| n == *s).map(|(_, j)| *j != again).unwrap_or(true)
        })
        .copied()
        .collect();
    let stable = stability();
    let ok = differing.is_empty() && stable.is_ok();
    let detail = match &stable {
        Ok(k) if differing.is_empty() => {
            format!("{} suites byte-identical across runs; {k} reports stable at window {WINDOW}", SUITES.len())
        }
        Ok(_) => format!("nondeterministic suites: {differing:?}"),
        Err(e) => format!("nondeterministic suites: {differing:?}; {e}"),
    };
    all &= report("10", "determinism and stability", ok, &detail);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
