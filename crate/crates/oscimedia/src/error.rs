//! Error type shared by every module.

use thiserror::Error;

/// All the ways a computation here can refuse or fail.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its physical or documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The ODE integrator could not reach the requested accuracy.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A numerical procedure (root bracketing, maximization, fit) failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A scan or search found no feature where one was requested.
    #[error("not found: {0}")]
    NotFound(String),

    /// Wave vector and oscillation direction too close to parallel to
    /// span the transverse basis.
    #[error("degenerate directions: {0}")]
    DegenerateDirections(String),

    /// An initial field has a longitudinal component where a transverse
    /// one is required.
    #[error("non-transverse field: {0}")]
    NonTransverse(String),

    /// The in/out vacuum split is not defined for these parameters.
    #[error("invalid in/out split: {0}")]
    InvalidSplit(String),

    /// The motion profile lacks the smoothness the operation needs.
    #[error("non-smooth profile: {0}")]
    NonSmoothProfile(String),

    /// Configuration file or command line rejected.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// File system trouble while reading config or writing results.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error class: 1 validation, 2 numerical,
    /// 3 input/output.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::NotFound(_)
            | Error::DegenerateDirections(_)
            | Error::NonTransverse(_)
            | Error::InvalidSplit(_)
            | Error::NonSmoothProfile(_)
            | Error::Config(_) => 1,
            Error::Integration(_) | Error::Numerical(_) => 2,
            Error::Io(_) => 3,
        }
    }
}
