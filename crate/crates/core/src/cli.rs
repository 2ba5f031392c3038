//! `hlk` command line front end.
//!
//! Exit codes: 0 feasible / success, 1 infeasible (or a failed self-test),
//! 2 usage or validation error, 3 numerical or I/O failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::extremal::{build_phi_r, norm_table, ExtremalParams};
use crate::oracle::{decide, synthesize, Problem4};
use crate::poly::PiecewisePolynomial;
use crate::verify::property_sweep;
use crate::DEFAULT_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Smallest accepted `--tol`.
pub const TOL_FLOOR: f64 = 1e-13;

#[derive(Debug, Parser)]
#[command(name = "hlk", version, about = "Derivative sup-norms of multiply monotone functions on (-inf, 0]")]
pub struct Cli {
    /// Output format for tabular results.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the four norms are attainable.
    Feasible(ProblemArgs),
    /// Build a function attaining the four norms.
    Witness {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Number of sampling intervals on [-a-1, 0].
        #[arg(long)]
        samples: Option<usize>,
        /// Where to write the samples.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print all derivative norms of phi_r(a, b, l).
    Norms(SplineArgs),
    /// Sample phi_r(a, b, l) and its derivatives on [-a-1, 0].
    Sample {
        #[command(flatten)]
        spline: SplineArgs,
        /// Number of sampling intervals.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the three-norm inequality on random class members.
    Selftest {
        /// Members per order r.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        r_min: usize,
        #[arg(long, default_value_t = 8)]
        r_max: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub k2: usize,
    #[arg(long)]
    pub k3: usize,
    #[arg(long = "M0", allow_negative_numbers = true)]
    pub m0: f64,
    #[arg(long = "Mk2", allow_negative_numbers = true)]
    pub m_k2: f64,
    #[arg(long = "Mk3", allow_negative_numbers = true)]
    pub m_k3: f64,
    #[arg(long = "Mr", allow_negative_numbers = true)]
    pub m_r: f64,
    /// Relative feasibility tolerance (clamped below at 1e-13).
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

impl ProblemArgs {
    fn problem(&self) -> Result<Problem4, Error> {
        Problem4::new(self.r, self.k2, self.k3, self.m0, self.m_k2, self.m_k3, self.m_r)
    }

    fn tol(&self) -> Result<f64, Error> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Argument(format!("--tol {} must be positive", self.tol)));
        }
        Ok(self.tol.max(TOL_FLOOR))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SplineArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub l: f64,
}

impl SplineArgs {
    fn params(&self) -> Result<ExtremalParams, Error> {
        ExtremalParams::new(self.r, self.a, self.b, self.l)
    }
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("I/O error: {e}"))
    }
}

/// Rows `t, x(t), x'(t), ..., x^(orders-1)(t)` over `[start, 0]`.
pub fn write_samples<W: Write>(out: &mut W, p: &PiecewisePolynomial, orders: usize, start: f64, n: usize) -> std::io::Result<()> {
    let derivs: Vec<PiecewisePolynomial> = (0..orders).map(|k| p.nth_derivative(k)).collect();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..orders).map(|k| format!("d{k}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..=n {
        let t = if n == 0 { 0.0 } else { start * (1.0 - i as f64 / n as f64) };
        let t = t.min(0.0);
        let mut row = vec![format!("{t}")];
        for d in &derivs {
            row.push(format!("{}", d.evaluate(t).expect("sampling grid stays on the half-line")));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn emit_json<W: Write, T: serde::Serialize>(out: &mut W, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn dispatch<W: Write>(cli: Cli, out: &mut W) -> Result<i32, Failure> {
    match cli.command {
        Command::Feasible(args) => {
            let report = decide(&args.problem()?, args.tol()?)?;
            emit_json(out, &report)?;
            Ok(if report.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Witness { problem, samples, csv } => {
            let tol = problem.tol()?;
            let problem = problem.problem()?;
            if samples.is_some() != csv.is_some() {
                return Err(Failure::Usage("--samples and --csv must be given together".into()));
            }
            let report = decide(&problem, tol)?;
            if !report.feasible {
                emit_json(out, &report)?;
                return Ok(EXIT_INFEASIBLE);
            }
            let witness = synthesize(&problem, tol)?;
            emit_json(out, &witness)?;
            if let (Some(n), Some(path)) = (samples, csv) {
                let mut file = BufWriter::new(File::create(path)?);
                write_samples(&mut file, &witness.function(), problem.r, -witness.params.a - 1.0, n)?;
                file.flush()?;
            }
            Ok(EXIT_OK)
        }
        Command::Norms(args) => {
            let table = norm_table(&args.params()?)?;
            match cli.format {
                Format::Json => emit_json(out, &table)?,
                Format::Csv => {
                    writeln!(out, "order,norm")?;
                    for (k, v) in table.iter() {
                        writeln!(out, "{k},{v}")?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sample { spline, n, out: path } => {
            let params = spline.params()?;
            let phi = build_phi_r(&params)?;
            let start = -params.a - 1.0;
            match path {
                Some(path) => {
                    let mut file = BufWriter::new(File::create(path)?);
                    write_samples(&mut file, &phi, params.r, start, n)?;
                    file.flush()?;
                }
                None => write_samples(out, &phi, params.r, start, n)?,
            }
            Ok(EXIT_OK)
        }
        Command::Selftest { trials, seed, r_min, r_max } => {
            let threads = std::env::var("THREADS").ok().and_then(|s| s.parse::<usize>().ok());
            let run = || property_sweep(r_min..=r_max, trials, seed);
            let report = match threads {
                Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Failure::Numerical(e.to_string()))?
                    .install(run)?,
                _ => run()?,
            };
            out.write_all(report.to_json_lines().as_bytes())?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_INFEASIBLE })
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_NUMERICAL
        }
    }
}
