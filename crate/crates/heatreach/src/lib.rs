//! Numerical toolkit for reachable states of the heat equation.
//!
//! The observation driving everything here is that a state reachable by
//! boundary controls in time `T` extends holomorphically to a complex
//! neighbourhood of the spatial domain shaped like an "egg": the set of
//! points `x + iy` whose imaginary displacement `|y|` stays below the
//! distance from `x` to the boundary.  The crate provides
//!
//! * geometry for those analyticity domains ([`geometry`]),
//! * complex special functions (exponential integral with monodromy
//!   tracking, complementary error function) and heat kernels ([`special`]),
//! * thermal single/double layer potentials with a first-kind Volterra
//!   solver marching in time ([`layer`]),
//! * an independent Crank–Nicolson reference solver on intervals and
//!   disks ([`fdm`]),
//! * the explicit two-endpoint control construction in one dimension,
//!   solved in the frequency domain ([`onedim`]),
//! * control synthesis for balls via Wick rotation of a complex heat
//!   evolution ([`wick`]),
//! * verification experiments tying the pieces together ([`verify`]),
//! * and a config-driven command line runner ([`cli`]).
//!
//! Everything is deterministic: fixed quadrature rules, fixed grids, no
//! randomness anywhere in the numerical paths.

pub mod cli;
pub mod csvio;
pub mod fdm;
pub mod geometry;
pub mod layer;
pub mod onedim;
pub mod quad;
pub mod special;
pub mod targets;
pub mod verify;
pub mod wick;

/// Unified error type for the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point, grid, or signal has the wrong dimension or length.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A domain description is malformed (empty interval, nonconvex data, ...).
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    /// A parameter is out of its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An evaluation was refused because the complexified heat kernel would
    /// amplify quadrature noise beyond the configured factor.
    #[error("amplification guard: {0}")]
    Guard(String),
    /// A numerical procedure failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Underlying I/O failure (config files, CSV output).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    ///
    /// Guard trips are distinguishable (exit 3) because a tripped guard is
    /// a legitimate, diagnosable outcome of an experiment rather than a bug
    /// in its configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Guard(_) => 3,
            _ => 2,
        }
    }
}
