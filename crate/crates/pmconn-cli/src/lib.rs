//! Verification suites and file commands behind the `pmconn` binary.

pub mod commands;
pub mod gen;
pub mod suites;

use rayon::prelude::*;
use serde::Serialize;

/// Exit code for a passing run.
pub const EXIT_PASS: i32 = 0;
/// Exit code for a verification failure.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for a usage or input error.
pub const EXIT_USAGE: i32 = 2;

/// Names of the verification suites.
pub const SUITES: [&str; 9] = [
    "prop4",
    "taylor-cocycle",
    "tau",
    "level-raise",
    "descent",
    "theorem25",
    "ov-example",
    "witt-identities",
    "witt-compare",
];

/// Grid overrides and run options shared by all suites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Restrict the prime grid to one value.
    pub p: Option<u64>,
    /// Restrict the truncation grid to one value.
    pub n: Option<u32>,
    /// Restrict the level grid to one value.
    pub m: Option<u32>,
    /// Restrict the dimension grid to one value.
    pub d: Option<usize>,
    /// Seed for every random choice.
    pub seed: u64,
    /// Weight window radius for cohomology.
    pub window: i64,
    /// Worker threads; `0` lets the pool decide.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { p: None, n: None, m: None, d: None, seed: 0, window: 8, jobs: 0 }
    }
}

impl Config {
    /// The default grid restricted by an override.
    pub fn grid<T: Copy + PartialEq>(default: &[T], over: Option<T>) -> Vec<T> {
        match over {
            Some(v) => vec![v],
            None => default.to_vec(),
        }
    }

    /// The primes of a default grid after the `--p` override.
    pub fn primes(&self, default: &[u64]) -> Vec<u64> {
        Config::grid(default, self.p)
    }

    /// The truncation levels of a default grid after the `--n` override.
    pub fn lengths(&self, default: &[u32]) -> Vec<u32> {
        Config::grid(default, self.n)
    }

    /// The levels of a default grid after the `--m` override.
    pub fn levels(&self, default: &[u32]) -> Vec<u32> {
        Config::grid(default, self.m)
    }

    /// The dimensions of a default grid after the `--d` override.
    pub fn dims(&self, default: &[usize]) -> Vec<usize> {
        Config::grid(default, self.d)
    }
}

/// One failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// Index of the case that produced it.
    pub case: usize,
    /// Description of the inputs.
    pub inputs: String,
    /// Expected value.
    pub expected: String,
    /// Computed value.
    pub got: String,
}

/// Collects the checks of one case.
#[derive(Debug, Default)]
pub struct Checker {
    checks: usize,
    failures: Vec<Failure>,
}

impl Checker {
    /// Records a boolean check.
    pub fn check(&mut self, ok: bool, inputs: impl FnOnce() -> String, expected: &str, got: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure { case: 0, inputs: inputs(), expected: expected.to_string(), got: got() });
        }
    }

    /// Records an equality check.
    pub fn eq<T: PartialEq + std::fmt::Debug>(&mut self, inputs: impl FnOnce() -> String, expected: &T, got: &T) {
        self.checks += 1;
        if expected != got {
            self.failures.push(Failure {
                case: 0,
                inputs: inputs(),
                expected: format!("{expected:?}"),
                got: format!("{got:?}"),
            });
        }
    }

    /// Records an operation that had to succeed, returning its value.
    pub fn ok<T, E: std::fmt::Display>(&mut self, inputs: impl FnOnce() -> String, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(Failure {
                    case: 0,
                    inputs: inputs(),
                    expected: "success".into(),
                    got: e.to_string(),
                });
                None
            }
        }
    }

    /// Number of checks recorded.
    pub fn checks(&self) -> usize {
        self.checks
    }
}

type CaseBody = dyn Fn(u64, &mut Checker) + Send + Sync;

/// A unit of work in a suite, run with its own derived seed.
pub struct Case {
    /// Short description of the case parameters.
    pub label: String,
    run: Box<CaseBody>,
}

impl Case {
    /// A case with the given label and body.
    pub fn new(label: impl Into<String>, run: impl Fn(u64, &mut Checker) + Send + Sync + 'static) -> Self {
        Case { label: label.into(), run: Box::new(run) }
    }
}

/// Outcome of a suite run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    /// Suite name.
    pub suite: String,
    /// Formula anchors the suite verifies.
    pub anchors: Vec<String>,
    /// The seed.
    pub seed: u64,
    /// Number of cases run.
    pub cases: usize,
    /// Number of individual checks.
    pub checks: usize,
    /// Failed checks, ordered by case.
    pub failures: Vec<Failure>,
}

impl SuiteResult {
    /// Whether no check failed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The exit code of this result.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Human-readable Markdown.
    pub fn to_markdown(&self) -> String {
        let mut s = format!("# Suite `{}`\n\n", self.suite);
        s += &format!("- status: {}\n", if self.passed() { "PASS" } else { "FAIL" });
        s += &format!(
            "- seed: {}\n- cases: {}\n- checks: {}\n- failures: {}\n",
            self.seed,
            self.cases,
            self.checks,
            self.failures.len()
        );
        s += "\n## Anchors\n\n";
        for a in &self.anchors {
            s += &format!("- {a}\n");
        }
        if !self.failures.is_empty() {
            s += "\n## Failures\n\n| case | inputs | expected | got |\n|---|---|---|---|\n";
            for f in &self.failures {
                s += &format!("| {} | {} | {} | {} |\n", f.case, f.inputs, f.expected, f.got);
            }
        }
        s
    }
}

/// Mixes the run seed with a case index.
pub fn case_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs cases on a worker pool and merges their results by case index.
pub fn run_cases(suite: &str, anchors: Vec<String>, cases: Vec<Case>, cfg: &Config) -> SuiteResult {
    let work = || -> Vec<(usize, Vec<Failure>)> {
        cases
            .par_iter()
            .enumerate()
            .map(|(i, case)| {
                let mut ck = Checker::default();
                (case.run)(case_seed(cfg.seed, i), &mut ck);
                let failures = ck
                    .failures
                    .into_iter()
                    .map(|mut f| {
                        f.case = i;
                        f.inputs = format!("{}; {}", case.label, f.inputs);
                        f
                    })
                    .collect();
                (ck.checks, failures)
            })
            .collect()
    };
    let results = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().expect("thread pool").install(work)
    } else {
        work()
    };
    let checks = results.iter().map(|r| r.0).sum();
    let failures = results.into_iter().flat_map(|r| r.1).collect();
    SuiteResult { suite: suite.to_string(), anchors, seed: cfg.seed, cases: cases.len(), checks, failures }
}

/// Runs a suite by name, or returns `None` for an unknown name.
pub fn run_suite(name: &str, cfg: &Config) -> Option<SuiteResult> {
    let (anchors, cases) = suites::build(name, cfg)?;
    Some(run_cases(name, anchors.into_iter().map(String::from).collect(), cases, cfg))
}
