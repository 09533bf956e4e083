use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("Jacobi eigensolve did not converge on the {parity} chain (largest off-diagonal in row {index})")]
    NonConvergence { parity: Parity, index: usize },

    #[error("parity bookkeeping failure for mode {mode}: {detail}")]
    ParityBookkeeping { mode: usize, detail: String },

    #[error(
        "mode {mode}: {bits}-bit working precision cannot resolve lambda; raise precision_bits"
    )]
    InsufficientPrecision { mode: usize, bits: usize },

    #[error("Legendre truncation did not converge up to order {order}")]
    TruncationFailure { order: usize },

    #[error("lambda_{mode} underflows double precision; use fewer modes (L <= {mode})")]
    LambdaUnderflow { mode: usize },

    #[error("signal-to-noise ratio undefined: all retained coefficients vanish")]
    UndefinedSnr,

    #[error("no half-maximum crossing found within the sampled grid")]
    NoCrossing,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error at byte offset {offset}: {detail}")]
    Parse { offset: usize, detail: String },

    #[error("unsupported basis file version: {0}")]
    Version(String),

    #[error("checksum mismatch (stored {stored}, computed {computed})")]
    Checksum { stored: String, computed: String },

    #[error("basis invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure comes from numerics rather than from inputs or files.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::ParityBookkeeping { .. }
                | Error::InsufficientPrecision { .. }
                | Error::TruncationFailure { .. }
                | Error::LambdaUnderflow { .. }
                | Error::UndefinedSnr
                | Error::NoCrossing
                | Error::Quadrature(_)
        )
    }
}

/// Parity of a prolate mode, equal to its index mod 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}
