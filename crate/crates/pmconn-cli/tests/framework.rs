use pmconn_cli::{case_seed, run_cases, run_suite, Case, Config, EXIT_FAIL, EXIT_PASS, SUITES};

fn failing_cases() -> Vec<Case> {
    (0..12)
        .map(|i| {
            Case::new(format!("case {i}"), move |seed, ck| {
                ck.eq(|| format!("seed {seed}"), &0, &(i % 3));
                ck.check(true, String::new, "true", String::new);
            })
        })
        .collect()
}

#[test]
fn results_merge_by_case_index() {
    let serial = run_cases("demo", vec![], failing_cases(), &Config { jobs: 1, ..Config::default() });
    let pooled = run_cases("demo", vec![], failing_cases(), &Config { jobs: 3, ..Config::default() });
    assert_eq!(serial, pooled);
    assert_eq!(serial.cases, 12);
    assert_eq!(serial.checks, 24);
    let idx: Vec<usize> = serial.failures.iter().map(|f| f.case).collect();
    assert_eq!(idx, vec![1, 2, 4, 5, 7, 8, 10, 11]);
    assert!(serial.failures[0].inputs.starts_with("case 1; seed "));
    assert_eq!(serial.exit_code(), EXIT_FAIL);
    assert!(serial.to_markdown().contains("| 1 | case 1;"));
}

#[test]
fn case_seeds_are_distinct_and_reproducible() {
    let a: Vec<u64> = (0..1000).map(|i| case_seed(7, i)).collect();
    let mut b = a.clone();
    b.sort_unstable();
    b.dedup();
    assert_eq!(b.len(), 1000);
    assert_eq!(a, (0..1000).map(|i| case_seed(7, i)).collect::<Vec<_>>());
    assert_ne!(case_seed(7, 0), case_seed(8, 0));
}

#[test]
fn grid_overrides_restrict_suites() {
    assert!(run_suite("nope", &Config::default()).is_none());
    let cfg = Config { p: Some(2), n: Some(2), ..Config::default() };
    for s in ["ov-example", "descent", "witt-compare"] {
        let r = run_suite(s, &cfg).unwrap();
        assert_eq!(r.exit_code(), EXIT_PASS, "{s}: {:?}", r.failures);
        assert!(!r.anchors.is_empty());
    }
    assert_eq!(run_suite("ov-example", &cfg).unwrap().cases, 1);
    assert_eq!(SUITES.len(), 9);
}
