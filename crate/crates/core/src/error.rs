use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the range a model was declared for.
    #[error("{quantity} = {value} is outside the valid range [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("no phase-matched wavelength found while scanning {from_nm} nm .. {to_nm} nm")]
    NoSolution { from_nm: f64, to_nm: f64 },

    #[error("no quasi-phase-matching possible: index mismatch {delta_n} <= 0 at {wavelength_nm} nm")]
    NoQuasiPhaseMatching { delta_n: f64, wavelength_nm: f64 },

    #[error(
        "quadrature under-resolved: {panels} panels advance the phase by {advance:.3} rad per panel \
         (limit {limit} rad); use at least {required} panels"
    )]
    Resolution {
        panels: usize,
        advance: f64,
        limit: f64,
        required: usize,
    },

    #[error(transparent)]
    Fit(#[from] FitFailure),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate output: {0}")]
    Degenerate(String),

    #[error("filters remove all spectral amplitude (norm ratio {ratio:e})")]
    AllFiltered { ratio: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, range: [f64; 2]) -> Self {
        Error::Domain {
            quantity,
            value,
            min: range[0],
            max: range[1],
        }
    }

    pub(crate) fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_string(),
            source,
        }
    }
}

/// A least-squares fit that stopped without meeting its convergence test.
///
/// Carries the best parameters seen and the cost after every accepted step
/// so callers can judge how close the fit came.
#[derive(Debug, Clone)]
pub struct FitFailure {
    pub reason: String,
    pub best_parameters: Vec<f64>,
    pub best_cost: f64,
    pub cost_trace: Vec<f64>,
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fit failed: {} (best cost {:e} after {} accepted steps)",
            self.reason,
            self.best_cost,
            self.cost_trace.len()
        )
    }
}

impl std::error::Error for FitFailure {}
