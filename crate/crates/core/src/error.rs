use num_complex::Complex64;
use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("singular matrix at lambda = {lambda}")]
    Singular { lambda: Complex64 },

    #[error("contour passes too close to the spectrum (node {node})")]
    ContourTooClose { node: Complex64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("rank-deficient regularizer")]
    RankDeficient,

    #[error("grid too coarse: need at least {needed} nodes, got {got}")]
    GridTooCoarse { needed: usize, got: usize },

    #[error("picard iteration did not converge after {iterations} iterations (last distance {last:e})")]
    NoConvergence { iterations: usize, last: f64, distances: Vec<f64> },

    #[error("history truncation insufficient: certified bound {bound:e} exceeds tolerance {tol:e}")]
    TruncationInsufficient { bound: f64, tol: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("empty window")]
    EmptyWindow,

    #[error("window [{start}, {end}] exceeds signal domain [{lo}, {hi}]")]
    WindowExceedsDomain { start: f64, end: f64, lo: f64, hi: f64 },

    #[error("kernel block norms not summable (partial sums {partial:?})")]
    Summability { partial: Vec<f64> },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by malformed input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Parameter(_) | Error::InvalidOperator(_))
    }
}
