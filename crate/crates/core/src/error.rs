use thiserror::Error;

/// Errors surfaced by the library. Every fallible operation returns one of these.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined
    /// (divergent moment, k <= m, negative variance, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid power spectrum: {0}")]
    InvalidSpectrum(String),

    /// Malformed text input. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A critical point whose Hessian has an eigenvalue below the degeneracy threshold.
    #[error("degenerate critical point at {location:?} (smallest |eigenvalue| {min_abs_eig:e})")]
    Degenerate {
        location: [f64; 3],
        min_abs_eig: f64,
    },

    /// Derivatives of a chi field requested where |Y| vanishes numerically.
    #[error("chi field too close to its nodal set (|Y| = {0:e})")]
    NodalProximity(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
