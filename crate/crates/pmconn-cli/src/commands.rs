//! File-based commands: cohomology, level raising and descent.

use pmconn::{
    compute_h, descend_rank1, level_raise, Basis, Connection, ConnectionFile, DescentOutcome, Error, FrobLift,
    LiftFile, ReportFile,
};
use serde::Serialize;

use crate::{EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

/// Output format of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// Pretty-printed JSON.
    Json,
    /// Markdown.
    Markdown,
}

/// Text written to stdout and stderr, with the exit code.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    /// Standard output.
    pub stdout: String,
    /// Standard error.
    pub stderr: String,
    /// Exit code.
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, stderr: String::new(), code: EXIT_PASS }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Output { stdout: String::new(), stderr: format!("error: {msg}\n"), code: EXIT_USAGE }
    }

    fn error(e: &Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidParameter(_) | Error::ContextMismatch(_) | Error::LevelMismatch(_) => {
                EXIT_USAGE
            }
            _ => EXIT_FAIL,
        };
        Output { stdout: String::new(), stderr: format!("error: {e}\n"), code }
    }
}

fn load_connection(text: &str) -> Result<Connection, Output> {
    let file = ConnectionFile::parse(text).map_err(|e| Output::error(&e))?;
    let c = file.to_connection().map_err(|e| Output::error(&e))?;
    if !c.is_integrable() {
        let mut msg = String::from("error: connection is not integrable\n");
        for ((i, j), k) in c.curvature() {
            msg += &format!("K_{}{} = {:?}\n", i + 1, j + 1, k.to_strings());
        }
        return Err(Output { stdout: String::new(), stderr: msg, code: EXIT_FAIL });
    }
    Ok(c)
}

#[derive(Serialize)]
struct CohomologyOutput {
    h: Vec<ReportFile>,
}

/// Computes `H^i` for every degree `0 ≤ i ≤ d` on the weight window.
pub fn cohomology(conn: &str, window: i64, format: Format) -> Output {
    let c = match load_connection(conn) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let mut reports = Vec::new();
    for i in 0..=c.d() {
        match compute_h(&c, i, window) {
            Ok(r) => reports.push(ReportFile::from_report(&r)),
            Err(e) => return Output::error(&e),
        }
    }
    match format {
        Format::Json => {
            Output::ok(serde_json::to_string_pretty(&CohomologyOutput { h: reports }).expect("serializable") + "\n")
        }
        Format::Markdown => {
            let mut s = format!("# Cohomology (window {window})\n");
            for r in &reports {
                s += &format!("\n## H^{}\n\n- stable: {}\n", r.degree, r.stable);
                if r.weights.is_empty() {
                    s += "- zero on the window\n";
                } else {
                    s += "\n| weight | divisors |\n|---|---|\n";
                    for w in &r.weights {
                        s += &format!("| {:?} | {:?} |\n", w.w, w.divisors);
                    }
                }
            }
            Output::ok(s)
        }
    }
}

/// Raises the level of a connection along a lift, printing the result in the `Θ̃` basis.
pub fn raise(conn: &str, lift: Option<&str>) -> Output {
    let c = match load_connection(conn) {
        Ok(c) => c,
        Err(o) => return o,
    };
    if c.m() == 0 {
        return Output::usage("level raising needs m ≥ 1");
    }
    let f = match lift {
        Some(text) => match LiftFile::parse(text).and_then(|l| l.to_lift()) {
            Ok(f) => f,
            Err(e) => return Output::error(&e),
        },
        None => FrobLift::pure(c.ctx(), c.d()),
    };
    match level_raise(&c, &f) {
        Ok(up) => Output::ok(ConnectionFile::from_connection(&up, Basis::Dlog).to_json() + "\n"),
        Err(e) => Output::error(&e),
    }
}

#[derive(Serialize)]
struct DescentOutput {
    connection: ConnectionFile,
    witness: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct ObstructionOutput {
    obstructed: bool,
    exponent: i64,
    coefficient: u64,
}

/// Descends a rank-1 level-0 connection along the pure lift.
///
/// Prints the level-1 connection with its gauge witness, or the obstruction with exit code 1.
pub fn descend(conn: &str, bound: i64) -> Output {
    let c = match load_connection(conn) {
        Ok(c) => c,
        Err(o) => return o,
    };
    match descend_rank1(&c, &FrobLift::pure(c.ctx(), c.d()), bound) {
        Ok(DescentOutcome::Descended { connection, witness }) => {
            let out = DescentOutput {
                connection: ConnectionFile::from_connection(&connection, Basis::Dlog),
                witness: witness.to_strings(),
            };
            Output::ok(serde_json::to_string_pretty(&out).expect("serializable") + "\n")
        }
        Ok(DescentOutcome::Obstructed(o)) => {
            let out = ObstructionOutput { obstructed: true, exponent: o.exponent, coefficient: o.coefficient };
            Output {
                stdout: serde_json::to_string_pretty(&out).expect("serializable") + "\n",
                stderr: String::new(),
                code: EXIT_FAIL,
            }
        }
        Err(e) => Output::error(&e),
    }
}
