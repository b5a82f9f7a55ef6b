//! Command-line front end: derive prefactors, reproduce the published
//! tables, verify bounds over real ranges and search thresholds.
//!
//! [`run`] is the whole program minus process exit, so tests can drive it
//! in-process.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poussin::{Error, Exec, PrecisionPolicy, VerifyOptions};

mod commands;
pub mod report;

pub use report::{Format, Record, Report, Value};

/// Exit statuses.
pub mod exit {
    pub const HOLDS: i32 = 0;
    pub const FAILS: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const RANGE: i32 = 65;
    pub const IO: i32 = 74;
}

pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "poussin",
    version,
    about = "Derive and verify effective bounds on the Chebyshev function θ(x)"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for sieving and verification (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Largest x any table may cover; accepts `100000000` or `1e8`.
    #[arg(long, global = true, value_parser = parse_limit, default_value = "1e8")]
    pub sieve_limit: u64,
    #[arg(long, global = true, value_enum, default_value_t = Policy::Fast)]
    pub precision_policy: Policy,
    /// Directory for cached θ tables. When set, tables are built once at
    /// the full sieve limit and reused.
    #[arg(long, global = true, env = "POUSSIN_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Fast,
    /// Decide every comparison in extended precision.
    Rigorous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "III")]
    III,
    #[value(name = "IV")]
    IV,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prefactor ã of the bound with decay c̃ implied by a source bound.
    Derive(DeriveArgs),
    /// Recompute the published derived-bound tables.
    Tables {
        #[arg(long, value_enum, ignore_case = true)]
        which: Which,
    },
    /// Check |θ(x) − x| < g(x) for every real x in [from, to].
    Verify(VerifyArgs),
    /// Least integer threshold from which a bound holds up to x0.
    Xstar {
        #[arg(long, allow_hyphen_values = true)]
        tilde_a: String,
        #[arg(long, allow_hyphen_values = true)]
        tilde_c: String,
        #[arg(long)]
        x0: f64,
    },
    /// Smallest prefactor for which ã·x·exp(−c̃√ln x) holds on [from, to].
    MinPrefactor {
        #[arg(long, allow_hyphen_values = true)]
        tilde_c: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
    },
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Catalog source label, e.g. "Schoenfeld" or "Johnston-Yang exp(10^10)".
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Validity threshold of an explicit family, e.g. `101` or `exp(3000)`.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub ctilde: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tilde_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tilde_c: Option<String>,
    /// Generalized envelope a·x·(ln x)^b·exp(−c√ln x); `--source` fills
    /// whichever of a, b, c are not given.
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,
}

fn parse_limit(s: &str) -> Result<u64, String> {
    let n = match s.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
            if !(x.fract() == 0.0 && (0.0..1.9e19).contains(&x)) {
                return Err(format!("`{s}` is not a whole number"));
            }
            x as u64
        }
    };
    if n < 2 {
        return Err("sieve limit must be at least 2".into());
    }
    Ok(n)
}

impl Global {
    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            precision: match self.precision_policy {
                Policy::Fast => PrecisionPolicy::Fast,
                Policy::Rigorous => PrecisionPolicy::Rigorous,
            },
            exec: self.exec(),
            ..VerifyOptions::default()
        }
    }

    pub fn exec(&self) -> Exec {
        if self.threads == 1 {
            Exec::sequential()
        } else {
            Exec::parallel(self.threads)
        }
    }
}

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A failed command: exit status and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::Domain(_) | Error::Range(_) | Error::Parse(_) | Error::UnknownFamily(_) => {
                exit::USAGE
            }
            Error::Resource(_) => exit::RANGE,
            Error::Inconclusive(_) => exit::INCONCLUSIVE,
            Error::Cache(_) | Error::Io(_) => exit::IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::HOLDS
            };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Output {
                code,
                stdout,
                stderr,
            };
        }
    };
    match commands::execute(&cli) {
        Ok((code, report)) => Output {
            code,
            stdout: report.render(cli.global.format),
            stderr: String::new(),
        },
        Err(f) => Output {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
