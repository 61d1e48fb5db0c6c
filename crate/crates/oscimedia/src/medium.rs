//! Medium kinematics: velocity profiles in dimensionless time tau, the
//! derived coefficients gamma, alpha, kappa, eta+-, the reference sigma,
//! and the accumulated overall phase phi.

use std::f64::consts::PI;

use crate::{Error, Result};

/// A dispersion-free medium; only the refractive index enters the
/// dimensionless dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec {
    pub n: f64,
}

impl MediumSpec {
    /// n = 1 is the trivial vacuum and is accepted.
    pub fn new(n: f64) -> Result<Self> {
        if !n.is_finite() || n < 1.0 {
            return Err(Error::Domain(format!(
                "refractive index must satisfy n >= 1, got {n}"
            )));
        }
        Ok(MediumSpec { n })
    }
}

/// One Fourier mode: rho = omega/Omega and the angle theta between the wave
/// vector and the oscillation direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub rho: f64,
    pub theta: f64,
}

impl ModeSpec {
    pub fn new(rho: f64, theta: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Domain(format!(
                "frequency ratio rho must be positive, got {rho}"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "angle theta must lie in [0, pi], got {theta}"
            )));
        }
        Ok(ModeSpec { rho, theta })
    }
}

/// Time course of the dimensionless medium velocity beta(tau).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotionProfile {
    /// Uniform motion, beta = b for all tau.
    Constant { b: f64 },
    /// beta(tau) = b cos tau.
    Harmonic { b: f64 },
    /// Harmonic on [0, 2 pi N], frozen at b outside. The joins sit at
    /// cosine extrema, so beta is C1 across them.
    Windowed { b: f64, periods: u32 },
}

impl MotionProfile {
    /// Peak velocity b (for constant motion, the velocity itself).
    pub fn peak_velocity(&self) -> f64 {
        match *self {
            MotionProfile::Constant { b }
            | MotionProfile::Harmonic { b }
            | MotionProfile::Windowed { b, .. } => b,
        }
    }

    /// End of the oscillation window, if there is one.
    pub fn window_end(&self) -> Option<f64> {
        match *self {
            MotionProfile::Windowed { periods, .. } => Some(2.0 * PI * f64::from(periods)),
            _ => None,
        }
    }

    pub fn validate(&self, medium: MediumSpec) -> Result<()> {
        let b = self.peak_velocity();
        if !b.is_finite() || !(0.0..1.0).contains(&b) {
            return Err(Error::Domain(format!(
                "peak velocity must satisfy 0 <= b < 1, got {b}"
            )));
        }
        if b >= medium.n {
            return Err(Error::Domain(format!(
                "peak velocity b = {b} reaches the coefficient pole at n = {}",
                medium.n
            )));
        }
        if let MotionProfile::Windowed { periods: 0, .. } = self {
            return Err(Error::Domain(
                "windowed profile needs at least one period".into(),
            ));
        }
        Ok(())
    }
}

/// beta(tau) for the given profile. Total on valid profiles.
pub fn beta_at(profile: MotionProfile, tau: f64) -> f64 {
    match profile {
        MotionProfile::Constant { b } => b,
        MotionProfile::Harmonic { b } => b * tau.cos(),
        MotionProfile::Windowed { b, periods } => {
            let end = 2.0 * PI * f64::from(periods);
            if (0.0..=end).contains(&tau) {
                b * tau.cos()
            } else {
                b
            }
        }
    }
}

/// The instantaneous coefficients of the mode equations, together with the
/// sigma they were evaluated against.
#[derive(Debug, Clone, Copy)]
pub struct KinematicCoefficients {
    pub gamma: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub sigma: f64,
}

/// gamma = (n^2-1)/(n^2-beta^2), alpha = 1 - gamma beta^2,
/// kappa = 1 - cos^2(theta) gamma beta^2, eta+- = (alpha/sigma^2 +- kappa sigma^2)/2.
pub fn coefficients(
    medium: MediumSpec,
    mode: ModeSpec,
    beta: f64,
    sigma: f64,
) -> Result<KinematicCoefficients> {
    let n = medium.n;
    if beta.abs() >= n.min(1.0) {
        return Err(Error::Domain(format!(
            "velocity beta = {beta} outside |beta| < min(1, n) for n = {n}"
        )));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let n2 = n * n;
    let b2 = beta * beta;
    let gamma = (n2 - 1.0) / (n2 - b2);
    let alpha = 1.0 - gamma * b2;
    let c = mode.theta.cos();
    let kappa = 1.0 - c * c * gamma * b2;
    let s2 = sigma * sigma;
    let eta_plus = 0.5 * (alpha / s2 + kappa * s2);
    let eta_minus = 0.5 * (alpha / s2 - kappa * s2);
    Ok(KinematicCoefficients {
        gamma,
        alpha,
        kappa,
        eta_plus,
        eta_minus,
        sigma,
    })
}

/// sigma = (alpha/kappa)^{1/4} at the reference velocity; with this sigma,
/// eta_minus vanishes at beta = beta_ref.
pub fn sigma_reference(medium: MediumSpec, mode: ModeSpec, beta_ref: f64) -> Result<f64> {
    let c = coefficients(medium, mode, beta_ref, 1.0)?;
    Ok((c.alpha / c.kappa).powf(0.25))
}

/// Rate of the accumulated phase, d phi/d tau = n rho cos(theta) gamma(tau) beta(tau).
pub fn phase_rate(medium: MediumSpec, mode: ModeSpec, profile: MotionProfile, tau: f64) -> f64 {
    let n = medium.n;
    let beta = beta_at(profile, tau);
    let gamma = (n * n - 1.0) / (n * n - beta * beta);
    n * mode.rho * mode.theta.cos() * gamma * beta
}

/// Accumulated phase phi(tau), in closed form.
///
/// Harmonic: phi = n rho cos(theta) (n^2-1)/sqrt(n^2-b^2) * arctan(b sin(tau)/sqrt(n^2-b^2)),
/// periodic with period 2 pi. Constant: phi = n rho gamma beta cos(theta) tau.
/// The windowed profile has no closed form here and is rejected.
pub fn accumulated_phase(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    tau: f64,
) -> Result<f64> {
    profile.validate(medium)?;
    let n = medium.n;
    match profile {
        MotionProfile::Harmonic { b } => {
            let root = (n * n - b * b).sqrt();
            Ok(n * mode.rho * mode.theta.cos() * (n * n - 1.0) / root
                * (b * tau.sin() / root).atan())
        }
        MotionProfile::Constant { b } => {
            let gamma = (n * n - 1.0) / (n * n - b * b);
            Ok(n * mode.rho * gamma * b * mode.theta.cos() * tau)
        }
        MotionProfile::Windowed { .. } => Err(Error::Domain(
            "accumulated phase requires a harmonic or constant profile".into(),
        )),
    }
}
