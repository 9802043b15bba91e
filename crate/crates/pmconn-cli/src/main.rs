//! Command-line entry point.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pmconn_cli::commands::{self, Format, Output};
use pmconn_cli::{run_suite, Config, EXIT_USAGE, SUITES};

/// Verification suites and file commands for p^m-connections.
#[derive(Parser)]
#[command(name = "pmconn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Md,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Md => Format::Markdown,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Runs a verification suite.
    Check {
        /// Suite name.
        suite: String,
        /// Restrict the prime grid.
        #[arg(long)]
        p: Option<u64>,
        /// Restrict the truncation grid.
        #[arg(long)]
        n: Option<u32>,
        /// Restrict the level grid.
        #[arg(long)]
        m: Option<u32>,
        /// Restrict the dimension grid.
        #[arg(long)]
        d: Option<usize>,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weight window radius.
        #[arg(long, default_value_t = 8)]
        window: i64,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "PMCONN_JOBS", default_value_t = 0)]
        jobs: usize,
    },
    /// Computes the de Rham cohomology of a connection file.
    Cohomology {
        /// Connection JSON file.
        file: std::path::PathBuf,
        /// Weight window radius.
        #[arg(long, default_value_t = 8)]
        window: i64,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
    },
    /// Raises the level of a connection file along a Frobenius lift.
    Raise {
        /// Connection JSON file.
        file: std::path::PathBuf,
        /// Lift JSON file; the pure-power lift when omitted.
        #[arg(long)]
        lift: Option<std::path::PathBuf>,
    },
    /// Descends a rank-1 level-0 connection file.
    Descend {
        /// Connection JSON file.
        file: std::path::PathBuf,
        /// Largest witness exponent searched.
        #[arg(long, default_value_t = 64)]
        bound: i64,
    },
}

fn read(path: &std::path::Path) -> Result<String, Output> {
    std::fs::read_to_string(path).map_err(|e| Output {
        stdout: String::new(),
        stderr: format!("error: cannot read {}: {e}\n", path.display()),
        code: EXIT_USAGE,
    })
}

fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Check { suite, p, n, m, d, seed, window, format, jobs } => {
            let cfg = Config { p, n, m, d, seed, window, jobs };
            let start = std::time::Instant::now();
            match run_suite(&suite, &cfg) {
                Some(r) => {
                    let stdout = match format {
                        OutFormat::Json => r.to_json() + "\n",
                        OutFormat::Md => r.to_markdown(),
                    };
                    // Wall time stays out of the report so that reports are reproducible.
                    let stderr = format!("wall time: {:.3} s\n", start.elapsed().as_secs_f64());
                    Output { stdout, stderr, code: r.exit_code() }
                }
                None => Output {
                    stdout: String::new(),
                    stderr: format!("error: unknown suite `{suite}`; expected one of {}\n", SUITES.join(", ")),
                    code: EXIT_USAGE,
                },
            }
        }
        Command::Cohomology { file, window, format } => match read(&file) {
            Ok(text) => commands::cohomology(&text, window, format.into()),
            Err(o) => o,
        },
        Command::Raise { file, lift } => {
            let conn = match read(&file) {
                Ok(t) => t,
                Err(o) => return o,
            };
            let lift = match lift.as_deref().map(read).transpose() {
                Ok(l) => l,
                Err(o) => return o,
            };
            commands::raise(&conn, lift.as_deref())
        }
        Command::Descend { file, bound } => match read(&file) {
            Ok(text) => commands::descend(&text, bound),
            Err(o) => o,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let out = run(cli);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
