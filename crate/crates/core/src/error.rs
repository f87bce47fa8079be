//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Periodic boundary on a single-site side would create self-loop bonds.
    #[error("periodic boundary requires side length >= 2 (L = 1 creates self-loops)")]
    PeriodicSelfLoop,

    #[error("arc label {label} out of range 1..={q}")]
    LabelOutOfRange { label: usize, q: usize },

    #[error("{context}: configuration has {got} values, lattice has {expected} sites")]
    ConfigSizeMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },

    /// The constrained double-well analysis needs South to be an arc midpoint,
    /// which only happens for even q.
    #[error("constrained extrema require even q >= 4, got q = {q} (South is not an arc midpoint)")]
    OddArcCount { q: usize },

    #[error("need at least {min} data points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("degenerate fit: all abscissae coincide")]
    DegenerateFit,

    #[error("state space too large: q^sites = {states:.3e} exceeds the enumeration cap {cap:.1e}")]
    StateSpaceTooLarge { states: f64, cap: f64 },

    #[error("displacement {r} exceeds L/2 = {max} under periodic boundary (aliasing)")]
    DisplacementTooLarge { r: usize, max: usize },

    #[error("site {site} out of range for lattice with {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("initial configuration violates the arc constraint at site {site}")]
    ConstraintViolated { site: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
