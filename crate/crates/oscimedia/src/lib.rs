//! Numerical laboratory for electromagnetic modes in a medium whose
//! refractive index is fixed while the medium itself oscillates.
//!
//! The crate covers three connected computations on the dimensionless
//! mode equations (time in units of the oscillation period, frequency
//! as the ratio rho = omega/Omega):
//!
//! * locating parametric resonances of the two-component mode amplitude
//!   through the monodromy matrix and its Floquet exponent ([`floquet`]),
//! * reducing the mode equation to a damped-free Hill/Mathieu oscillator
//!   and mapping its stability chart ([`mathieu`]),
//! * evolving Bogoliubov coefficients through a finite oscillation window
//!   to count the photon pairs produced from vacuum ([`photons`]).
//!
//! [`medium`] holds the material response and motion profiles,
//! [`propagation`] the mode bases and the integrators over one or many
//! periods, and [`cli`] a small front end with figure presets. Most
//! entry points are demonstrated one-per-file in `examples/`.

pub mod cli;
pub mod error;
pub mod floquet;
pub mod mathieu;
pub mod medium;
pub mod ode;
pub mod photons;
pub mod propagation;

mod quad;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
