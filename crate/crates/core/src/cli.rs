//! Command-line front end.
//!
//! Exit codes: 0 success, 2 validation error, 3 feasibility guard,
//! 4 internal invariant breach.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::exact_count::{self, render_decimal, CountError, ExactValue, Parity, DEFAULT_PRECISION};
use crate::finite_field::{FieldError, FieldSpec};
use crate::oracle::{self, EnumOptions, OracleError, DEFAULT_MAX_COST};
use crate::sampler::{self, SampleError};

pub const WORKERS_ENV: &str = "HOMOLOGY_CENSUS_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "homology-census",
    version,
    about = "Exact counts, limits, sampling and brute-force checks for random chain complexes over F_q"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Decimal places in rendered probabilities.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact counts c_r(q,n) and probabilities p_r(q,n).
    Count {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Limits p_r(q) as n grows, with certified truncation error.
    Limit {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "even")]
        parity: Parity,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Largest homology dimension reported.
        #[arg(long, default_value_t = 10)]
        rmax: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo sampling of uniform differentials with a chi-square check.
    Sample {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        num: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = WORKERS_ENV, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Exhaustive enumeration checked against the counting formulas.
    Verify {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        max_n: usize,
        /// Largest number of matrices a single scan may visit.
        #[arg(long, default_value_t = DEFAULT_MAX_COST)]
        max_cost: u64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = WORKERS_ENV, default_value_t = 0)]
        workers: usize,
        /// Also run the normal-form round trip on every differential found.
        #[arg(long)]
        check_normal_form: bool,
        /// Include wall-clock timings in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep of p_r(q,n) over lists of q and n.
    Table {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        n: Vec<usize>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CountError> for CliError {
    fn from(e: CountError) -> Self {
        match e {
            CountError::Invariant(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::Guard(format!("{e}; raise --max-cost")),
            OracleError::Count(c) => c.into(),
            OracleError::NotBinary(_) => CliError::Validation(e.to_string()),
            OracleError::Pool(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SampleError> for CliError {
    fn from(e: SampleError) -> Self {
        match e {
            SampleError::Count(c) => c.into(),
            SampleError::Linalg(_) | SampleError::RngFailure(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub enum RunConfig {
    Count {
        spec: FieldSpec,
        n: usize,
    },
    Limit {
        q: u64,
        parity: Parity,
        eps: f64,
        rmax: usize,
    },
    Sample {
        spec: FieldSpec,
        n: usize,
        num: u64,
        seed: u64,
        workers: usize,
    },
    Verify {
        spec: FieldSpec,
        max_n: usize,
        options: EnumOptions,
    },
    Table {
        qs: Vec<u64>,
        ns: Vec<usize>,
    },
}

fn positive(name: &str, value: u64) -> Result<(), CliError> {
    if value == 0 {
        return Err(CliError::Validation(format!("--{name} must be at least 1")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_command(command: &Command) -> Result<Self, CliError> {
        Ok(match command {
            Command::Count { q, n, .. } => {
                let spec = FieldSpec::from_order(*q)?;
                positive("n", *n as u64)?;
                RunConfig::Count { spec, n: *n }
            }
            Command::Limit {
                q,
                parity,
                eps,
                rmax,
                ..
            } => {
                FieldSpec::from_order(*q)?;
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(CountError::InvalidTolerance(*eps).into());
                }
                RunConfig::Limit {
                    q: *q,
                    parity: *parity,
                    eps: *eps,
                    rmax: *rmax,
                }
            }
            Command::Sample {
                q,
                n,
                num,
                seed,
                workers,
                ..
            } => {
                let spec = FieldSpec::from_order(*q)?;
                positive("n", *n as u64)?;
                positive("num", *num)?;
                positive("workers", *workers as u64)?;
                RunConfig::Sample {
                    spec,
                    n: *n,
                    num: *num,
                    seed: *seed,
                    workers: *workers,
                }
            }
            Command::Verify {
                q,
                max_n,
                max_cost,
                workers,
                check_normal_form,
                timing,
                ..
            } => {
                let spec = FieldSpec::from_order(*q)?;
                positive("max-n", *max_n as u64)?;
                let mut options = EnumOptions::default()
                    .with_max_cost(*max_cost)
                    .with_workers(*workers);
                options.check_normal_form = *check_normal_form;
                options.record_timing = *timing;
                RunConfig::Verify {
                    spec,
                    max_n: *max_n,
                    options,
                }
            }
            Command::Table { q, n, .. } => {
                if q.is_empty() {
                    return Err(CliError::Validation("--q list is empty".into()));
                }
                if n.is_empty() {
                    return Err(CliError::Validation("--n list is empty".into()));
                }
                for &qq in q {
                    FieldSpec::from_order(qq)?;
                }
                for &nn in n {
                    positive("n", nn as u64)?;
                }
                RunConfig::Table {
                    qs: q.clone(),
                    ns: n.clone(),
                }
            }
        })
    }
}

fn output_of(command: &Command) -> &Output {
    match command {
        Command::Count { output, .. }
        | Command::Limit { output, .. }
        | Command::Sample { output, .. }
        | Command::Verify { output, .. }
        | Command::Table { output, .. } => output,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

#[derive(Serialize)]
struct TableRow {
    q: u64,
    n: usize,
    probs: BTreeMap<usize, ExactValue>,
}

#[derive(Serialize)]
struct TableJson {
    precision: usize,
    rows: Vec<TableRow>,
}

fn table(qs: &[u64], ns: &[usize], format: Format, precision: usize) -> Result<String, CliError> {
    let mut rows: Vec<(u64, usize, BTreeMap<usize, BigRational>)> = Vec::new();
    for &q in qs {
        for &n in ns {
            rows.push((q, n, exact_count::count_report(q, n)?.probs));
        }
    }
    match format {
        Format::Json => to_json(&TableJson {
            precision,
            rows: rows
                .into_iter()
                .map(|(q, n, probs)| TableRow {
                    q,
                    n,
                    probs: probs
                        .iter()
                        .map(|(&r, p)| (r, ExactValue::new(p, precision)))
                        .collect(),
                })
                .collect(),
        }),
        Format::Csv => {
            let max_n = ns.iter().copied().max().unwrap_or(0);
            let mut out = String::from("q,n,precision");
            for r in 0..=max_n {
                out.push_str(&format!(",p_{r}"));
            }
            out.push('\n');
            for (q, n, probs) in rows {
                out.push_str(&format!("{q},{n},{precision}"));
                for r in 0..=max_n {
                    out.push(',');
                    if let Some(p) = probs.get(&r) {
                        out.push_str(&render_decimal(p, precision));
                    }
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Runs a parsed command and returns the rendered report.
pub fn execute(command: &Command) -> Result<String, CliError> {
    let config = RunConfig::from_command(command)?;
    let output = output_of(command);
    let precision = output.precision;
    let default_format = match command {
        Command::Table { .. } => Format::Csv,
        _ => Format::Json,
    };
    let format = output.format.unwrap_or(default_format);
    match config {
        RunConfig::Count { spec, n } => {
            let rep = exact_count::count_report(spec.order() as u64, n)?.with_precision(precision);
            match format {
                Format::Json => to_json(&rep),
                Format::Csv => Ok(rep.to_csv()),
            }
        }
        RunConfig::Limit {
            q,
            parity,
            eps,
            rmax,
        } => {
            let rep = exact_count::limit_probs(q, parity, eps, rmax)?.with_precision(precision);
            match format {
                Format::Json => to_json(&rep),
                Format::Csv => Ok(rep.to_csv()),
            }
        }
        RunConfig::Sample {
            spec,
            n,
            num,
            seed,
            workers,
        } => {
            let rep = sampler::monte_carlo(&spec, n, num, seed, workers)?.with_precision(precision);
            match format {
                Format::Json => to_json(&rep),
                Format::Csv => Ok(rep.to_csv()),
            }
        }
        RunConfig::Verify {
            spec,
            max_n,
            options,
        } => {
            let rep = oracle::verify_all(&spec, max_n, &options)?;
            match format {
                Format::Json => to_json(&rep),
                Format::Csv => {
                    let mut out = String::from("kind,q,n,m,r,observed,expected,agrees\n");
                    for d in &rep.differentials {
                        for (r, exp) in &d.expected {
                            let got = d.counts.get(r).copied().unwrap_or(0);
                            out.push_str(&format!(
                                "differentials,{},{},{},{},{},{},{}\n",
                                d.q,
                                d.n,
                                (d.n - r) / 2,
                                r,
                                got,
                                exp,
                                d.agrees
                            ));
                        }
                    }
                    for c in &rep.centralizers {
                        out.push_str(&format!(
                            "centralizer,{},{},{},{},{},{},{}\n",
                            c.q,
                            2 * c.m + c.r,
                            c.m,
                            c.r,
                            c.count,
                            c.expected,
                            c.agrees
                        ));
                    }
                    for i in &rep.involutions {
                        out.push_str(&format!(
                            "involutions,2,{},,,{},{},{}\n",
                            i.n, i.count, i.differentials, i.agrees
                        ));
                    }
                    Ok(out)
                }
            }
        }
        RunConfig::Table { qs, ns } => table(&qs, &ns, format, precision),
    }
}

/// Parses arguments, runs the command and writes the result. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli.command).and_then(|text| match &output_of(&cli.command).out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
