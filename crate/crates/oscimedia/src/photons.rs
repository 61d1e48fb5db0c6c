//! Photon pair production by a finite oscillation window: Bogoliubov
//! coefficients connecting the in and out mode operators, the photon
//! number density along the window, validity of the in/out frequency
//! split, and photon counts over phase-space regions.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::medium::{self, MediumSpec, ModeSpec, MotionProfile};
use crate::propagation::{self, EvolveOptions, Trajectory};
use crate::{Error, Result};

/// Pointwise bound on ||f1_-|^2 - |f2_+|^2|. The two fundamental solutions
/// share one step sequence, under which the swap symmetry tying them
/// together is exact in floating point, so any excess here is a real
/// defect in the evolution equations.
const PAIR_SYMMETRY_TOL: f64 = 1e-10;

/// Mode mixing across a window of whole oscillation periods. The medium
/// moves at the constant reference velocity b before and after the window,
/// so a single mode frequency is defined on both sides and the out
/// operators are a linear combination of the in operators with these
/// coefficients. |alpha_coeff|^2 - |beta_coeff|^2 = 1 up to integration
/// error; |beta_coeff|^2 is the pair density left behind.
#[derive(Debug, Clone, Copy)]
pub struct BogoliubovCoefficients {
    pub alpha_coeff: C64,
    pub beta_coeff: C64,
    pub window_periods: u32,
    /// Overall phase accumulated by the end of the window. Vanishes (up to
    /// roundoff) over whole periods of the harmonic profile.
    pub global_phase: f64,
}

impl BogoliubovCoefficients {
    /// Photon number density n(k) = |beta_coeff|^2 after the window.
    pub fn pair_density(&self) -> f64 {
        self.beta_coeff.norm_sqr()
    }
}

/// Photon number density n(k, tau) sampled along the window.
#[derive(Debug, Clone)]
pub struct PhotonSeries {
    pub taus: Vec<f64>,
    pub density: Vec<f64>,
}

impl PhotonSeries {
    /// Least-squares slope of ln(density) against tau over the samples with
    /// tau >= from_tau. Needs at least two such samples, all with positive
    /// density.
    pub fn log_slope(&self, from_tau: f64) -> Result<f64> {
        let mut pts = Vec::new();
        for (&tau, &dens) in self.taus.iter().zip(&self.density) {
            if tau < from_tau - 1e-12 {
                continue;
            }
            if dens <= 0.0 {
                return Err(Error::Numerical(format!(
                    "log slope needs positive densities, got {dens:e} at tau = {tau}"
                )));
            }
            pts.push((tau, dens.ln()));
        }
        if pts.len() < 2 {
            return Err(Error::Domain(format!(
                "log slope needs at least two samples past tau = {from_tau}, got {}",
                pts.len()
            )));
        }
        let inv = 1.0 / pts.len() as f64;
        let t_mean = pts.iter().map(|p| p.0).sum::<f64>() * inv;
        let l_mean = pts.iter().map(|p| p.1).sum::<f64>() * inv;
        let mut num = 0.0;
        let mut den = 0.0;
        for (t, l) in pts {
            num += (t - t_mean) * (l - l_mean);
            den += (t - t_mean) * (t - t_mean);
        }
        if den == 0.0 {
            return Err(Error::Numerical("log slope fit is degenerate".into()));
        }
        Ok(num / den)
    }
}

/// Outcome of the in/out frequency split test, with the two competing
/// frequencies for diagnosis.
#[derive(Debug, Clone, Copy)]
pub struct SplitCheck {
    pub valid: bool,
    /// Mode frequency rho sqrt(alpha kappa) in the constant-velocity
    /// regions.
    pub omega1: f64,
    /// Magnitude of the phase drift per unit tau, n rho gamma b |cos theta|.
    pub omega0_abs: f64,
}

/// One wave-vector quadrature node: direction angle theta against the
/// motion, dimensionless magnitude rho, and its solid-angle weight.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSpaceNode {
    pub rho: f64,
    pub theta: f64,
    pub weight: f64,
}

/// Phase-space region: a spatial volume together with wave-vector
/// quadrature nodes.
#[derive(Debug, Clone)]
pub struct PhaseSpaceRegion {
    pub volume: f64,
    pub nodes: Vec<PhaseSpaceNode>,
}

impl PhaseSpaceRegion {
    pub fn new(volume: f64, nodes: Vec<PhaseSpaceNode>) -> Result<Self> {
        let region = PhaseSpaceRegion { volume, nodes };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.volume.is_finite() || self.volume <= 0.0 {
            return Err(Error::Domain(format!(
                "region volume must be positive, got {}",
                self.volume
            )));
        }
        if self.nodes.is_empty() {
            return Err(Error::Domain("region has no quadrature nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.weight.is_finite() || node.weight <= 0.0 {
                return Err(Error::Domain(format!(
                    "node {i}: weight must be positive, got {}",
                    node.weight
                )));
            }
            ModeSpec::new(node.rho, node.theta)
                .map_err(|e| tag_node(i, *node, e))?;
        }
        Ok(())
    }
}

/// Checks that the constant-velocity regions on either side of the window
/// support a clean positive/negative frequency split: the mode frequency
/// omega1 must exceed the magnitude of the phase drift omega0 removed with
/// the overall phase.
pub fn validate_in_out_split(medium: MediumSpec, mode: ModeSpec, b: f64) -> Result<SplitCheck> {
    let sigma = medium::sigma_reference(medium, mode, b)?;
    let c = medium::coefficients(medium, mode, b, sigma)?;
    let omega1 = mode.rho * (c.alpha * c.kappa).sqrt();
    let omega0_abs = (medium.n * mode.rho * c.gamma * b * mode.theta.cos()).abs();
    Ok(SplitCheck { valid: omega1 > omega0_abs, omega1, omega0_abs })
}

/// Windowed evolution shared by the production routines: checks the split,
/// fixes sigma at the reference velocity b, and integrates both fundamental
/// solutions over tau in [0, 2 pi N] with a shared step sequence.
fn window_run(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    periods: u32,
    samples_per_period: usize,
    tolerance: f64,
) -> Result<(Trajectory, Trajectory)> {
    let profile = MotionProfile::Windowed { b, periods };
    profile.validate(medium)?;
    let split = validate_in_out_split(medium, mode, b)?;
    if !split.valid {
        return Err(Error::InvalidSplit(format!(
            "mode frequency omega1 = {:.6e} does not exceed the phase drift \
             |omega0| = {:.6e} at b = {b}; in/out modes are not defined",
            split.omega1, split.omega0_abs
        )));
    }
    let sigma = medium::sigma_reference(medium, mode, b)?;
    let end = profile.window_end().expect("windowed profile has an end");
    let opts = EvolveOptions { tolerance, samples_per_period, fixed_steps_per_period: None };
    propagation::evolve_fpm_pair(medium, mode, profile, sigma, (0.0, end), &opts)
}

/// Evolves the in-vacuum fundamental solution (1, 0) across a window of N
/// whole periods and reads off the mixing coefficients at the end,
/// including the overall-phase factor e^{-i phi}.
pub fn bogoliubov_evolution(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    periods: u32,
    tolerance: f64,
) -> Result<BogoliubovCoefficients> {
    let (traj, _) = window_run(medium, mode, b, periods, 0, tolerance)?;
    let end_tau = *traj.taus.last().expect("trajectory has samples");
    let phase = medium::accumulated_phase(medium, mode, MotionProfile::Harmonic { b }, end_tau)?;
    let rotation = C64::from_polar(1.0, -phase);
    let state = traj.final_state();
    Ok(BogoliubovCoefficients {
        alpha_coeff: rotation * state.first,
        beta_coeff: rotation * state.second,
        window_periods: periods,
        global_phase: phase,
    })
}

/// Photon number density n(k, tau) = |f1_-(tau)|^2 along the window,
/// starting from the in vacuum. The complementary fundamental solution
/// (0, 1) is integrated as well and |f2_+|^2 is required to match
/// pointwise: both photon types appear in equal numbers.
pub fn photon_density_series(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    periods: u32,
    samples_per_period: usize,
    tolerance: f64,
) -> Result<PhotonSeries> {
    let (first, second) = window_run(medium, mode, b, periods, samples_per_period, tolerance)?;
    let mut density = Vec::with_capacity(first.len());
    for (i, (s1, s2)) in first.states.iter().zip(&second.states).enumerate() {
        let d1 = s1.second.norm_sqr();
        let d2 = s2.first.norm_sqr();
        if (d1 - d2).abs() > PAIR_SYMMETRY_TOL {
            return Err(Error::Numerical(format!(
                "pair symmetry broken at tau = {}: |f1_-|^2 = {d1:e} vs |f2_+|^2 = {d2:e}",
                first.taus[i]
            )));
        }
        density.push(d1);
    }
    Ok(PhotonSeries { taus: first.taus, density })
}

/// Total photon number deposited in a phase-space region after N periods:
/// 2 V sum_i w_i n(k_i) / (2 pi)^3, the factor 2 counting both photon
/// types. Node densities are evaluated concurrently; the weighted sum runs
/// in node order, so the result is deterministic. Any node failure aborts
/// the count naming the node.
pub fn phase_space_photon_count(
    region: &PhaseSpaceRegion,
    medium: MediumSpec,
    b: f64,
    periods: u32,
    tolerance: f64,
) -> Result<f64> {
    region.validate()?;
    let densities: Vec<Result<f64>> = region
        .nodes
        .par_iter()
        .map(|node| {
            let mode = ModeSpec::new(node.rho, node.theta)?;
            Ok(bogoliubov_evolution(medium, mode, b, periods, tolerance)?.pair_density())
        })
        .collect();
    let mut weighted = 0.0;
    for (i, result) in densities.into_iter().enumerate() {
        let node = region.nodes[i];
        weighted += node.weight * result.map_err(|e| tag_node(i, node, e))?;
    }
    Ok(2.0 * region.volume * weighted / (TAU * TAU * TAU))
}

fn tag_node(index: usize, node: PhaseSpaceNode, err: Error) -> Error {
    let inner = match &err {
        Error::Domain(m)
        | Error::Integration(m)
        | Error::Numerical(m)
        | Error::NotFound(m)
        | Error::DegenerateDirections(m)
        | Error::NonTransverse(m)
        | Error::InvalidSplit(m)
        | Error::NonSmoothProfile(m)
        | Error::Config(m) => m.clone(),
        Error::Io(e) => e.to_string(),
    };
    let tagged = format!(
        "node {index} (rho = {}, theta = {}): {inner}",
        node.rho, node.theta
    );
    match err {
        Error::InvalidSplit(_) => Error::InvalidSplit(tagged),
        Error::Integration(_) => Error::Integration(tagged),
        Error::Numerical(_) => Error::Numerical(tagged),
        _ => Error::Domain(tagged),
    }
}
