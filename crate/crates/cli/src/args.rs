use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mu_uncertainty::CountingFunction;

/// Effective-number uncertainties of quantum states.
///
/// Indices in input files are 0-based. Human-readable tables number rows
/// from 1; csv and json output keep 0-based indices.
#[derive(Debug, Parser)]
#[command(name = "muq", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Counting function: `star` or `alpha=<x>` with x in (0, 1].
    #[arg(long, global = true, default_value = "star", value_parser = parse_cf)]
    pub cf: CountingFunction,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Tolerance override `key=value`; keys: norm, hermitian, trace, psd.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    pub tol: Vec<(TolKey, f64)>,

    /// Logarithm base for entropies: `e`, `2` or any base > 1.
    #[arg(long, global = true, default_value = "e", value_parser = parse_log_base)]
    pub log_base: LogBase,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// μ-uncertainty of a pure state for an orthogonal decomposition.
    Mu { state: PathBuf, decomposition: PathBuf },
    /// Quantum effective number of a density matrix.
    Qnum { density: PathBuf },
    /// μ-entanglement of a bipartite pure state, both sides.
    Entangle {
        state: PathBuf,
        /// Factor dimensions `<A>x<B>`.
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize),
    },
    /// Effective volume of a gridded wave function.
    Effvol { grid: PathBuf },
    /// Refinement table and extrapolated relative μ-uncertainty.
    Refine {
        problem: PathBuf,
        /// Number of levels (default 5, or all levels of an explicit problem).
        #[arg(long)]
        levels: Option<usize>,
        /// Exponent of the spacing in the extrapolation fit.
        #[arg(long, default_value_t = 1.0)]
        order: f64,
        /// Fit only the last n levels.
        #[arg(long)]
        fit_last: Option<usize>,
    },
    /// Simulated repeated measurement and plug-in estimates.
    Simulate {
        state: PathBuf,
        decomposition: PathBuf,
        /// Comma-separated trial counts.
        #[arg(long, value_delimiter = ',', required = true)]
        trials: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
    },
    /// Degree-of-freedom density scan over a family of distributions.
    Dfd {
        family: PathBuf,
        #[arg(long)]
        fit_last: Option<usize>,
    },
    /// Validate the counting function and any input files.
    Check { files: Vec<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TolKey {
    Norm,
    Hermitian,
    Trace,
    Psd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogBase {
    Natural,
    Base(f64),
}

impl LogBase {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Base(b) => nats / b.ln(),
        }
    }

    pub fn label(self) -> String {
        match self {
            LogBase::Natural => "e".into(),
            LogBase::Base(b) => format!("{b}"),
        }
    }
}

fn parse_cf(s: &str) -> Result<CountingFunction, String> {
    CountingFunction::from_str(s).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<(TolKey, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let key = match k.trim() {
        "norm" => TolKey::Norm,
        "hermitian" => TolKey::Hermitian,
        "trace" => TolKey::Trace,
        "psd" => TolKey::Psd,
        other => return Err(format!("unknown tolerance key {other:?}")),
    };
    let v: f64 = v.trim().parse().map_err(|_| format!("cannot parse {v:?}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance must be finite and non-negative, got {v}"));
    }
    Ok((key, v))
}

fn parse_log_base(s: &str) -> Result<LogBase, String> {
    if s == "e" {
        return Ok(LogBase::Natural);
    }
    match s.parse::<f64>() {
        Ok(b) if b.is_finite() && b > 1.0 => Ok(LogBase::Base(b)),
        _ => Err(format!("log base must be `e` or a number > 1, got {s:?}")),
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <A>x<B>, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| format!("bad dimension {t:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}
