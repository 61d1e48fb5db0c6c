//! Mode geometry and time evolution of the two-component amplitudes, in the
//! linear (f1, f2) and polarization (f+, f-) bases.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Vector3;
use num_complex::Complex64 as C64;

use crate::medium::{self, MediumSpec, ModeSpec, MotionProfile};
use crate::ode;
use crate::{Error, Result};

/// Orthonormal frame attached to a wave vector, plus the elliptic
/// polarization vector e = (sigma n1 - i n2/sigma)/sqrt(2).
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub khat: Vector3<f64>,
    pub n1: Vector3<f64>,
    pub n2: Vector3<f64>,
    pub e: Vector3<C64>,
}

/// Builds the frame from a wave vector and the motion direction:
/// n1 = k x (k x m) / (|k| |k x m|), n2 = k x m / |k x m|.
pub fn mode_basis(
    k_direction: Vector3<f64>,
    m_direction: Vector3<f64>,
    sigma: f64,
) -> Result<ModeBasis> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let k_norm = k_direction.norm();
    let m_norm = m_direction.norm();
    if k_norm == 0.0 || m_norm == 0.0 {
        return Err(Error::DegenerateDirections(
            "wave vector and motion direction must be nonzero".into(),
        ));
    }
    let cross = k_direction.cross(&m_direction);
    let cross_norm = cross.norm();
    if cross_norm < 1e-12 * k_norm * m_norm {
        return Err(Error::DegenerateDirections(format!(
            "wave vector and motion direction are parallel (|k x m| = {cross_norm:.3e})"
        )));
    }
    let khat = k_direction / k_norm;
    let n2 = cross / cross_norm;
    let n1 = k_direction.cross(&cross) / (k_norm * cross_norm);
    let e = n1.map(|x| C64::new(x * sigma / SQRT_2, 0.0))
        + n2.map(|x| C64::new(0.0, -x / (sigma * SQRT_2)));
    Ok(ModeBasis { khat, n1, n2, e })
}

/// Which pair of amplitudes a state holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// (f1, f2) along n1 and n2.
    Linear,
    /// (f+, f-) at a fixed sigma.
    Polarization,
}

/// Two complex amplitudes tagged with their basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub first: C64,
    pub second: C64,
    pub basis: Basis,
}

impl AmplitudePair {
    pub fn linear(f1: C64, f2: C64) -> Self {
        AmplitudePair { first: f1, second: f2, basis: Basis::Linear }
    }

    pub fn polarization(f_plus: C64, f_minus: C64) -> Self {
        AmplitudePair { first: f_plus, second: f_minus, basis: Basis::Polarization }
    }

    /// f+- = (f1/sigma +- i sigma f2)/sqrt(2). Already-converted pairs pass
    /// through unchanged.
    pub fn to_polarization(&self, sigma: f64) -> Result<AmplitudePair> {
        check_sigma(sigma)?;
        match self.basis {
            Basis::Polarization => Ok(*self),
            Basis::Linear => {
                let a = self.first / sigma;
                let b = C64::new(0.0, sigma) * self.second;
                Ok(AmplitudePair::polarization((a + b) / SQRT_2, (a - b) / SQRT_2))
            }
        }
    }

    /// f1 = sigma (f+ + f-)/sqrt(2), f2 = -i (f+ - f-)/(sqrt(2) sigma).
    pub fn to_linear(&self, sigma: f64) -> Result<AmplitudePair> {
        check_sigma(sigma)?;
        match self.basis {
            Basis::Linear => Ok(*self),
            Basis::Polarization => {
                let f1 = (self.first + self.second) * (sigma / SQRT_2);
                let f2 = C64::new(0.0, -1.0) * (self.first - self.second) / (SQRT_2 * sigma);
                Ok(AmplitudePair::linear(f1, f2))
            }
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Sampled evolution of an amplitude pair.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub taus: Vec<f64>,
    pub states: Vec<AmplitudePair>,
    /// Tolerance the integrator was run at.
    pub tolerance: f64,
    pub stats: ode::Stats,
}

impl Trajectory {
    pub fn final_state(&self) -> AmplitudePair {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Controls for the evolution drivers.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Integrator tolerance (relative and absolute).
    pub tolerance: f64,
    /// Dense samples per velocity period 2 pi; 0 keeps endpoints only.
    pub samples_per_period: usize,
    /// Fixed-step integration with this many steps per period, instead of
    /// adaptive stepping.
    pub fixed_steps_per_period: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tolerance: 1e-10,
            samples_per_period: 64,
            fixed_steps_per_period: None,
        }
    }
}

impl EvolveOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        EvolveOptions { tolerance, ..EvolveOptions::default() }
    }
}

pub(crate) fn rhs_f12(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
) -> impl FnMut(f64, &[f64], &mut [f64]) {
    let n2 = medium.n * medium.n;
    let g_num = n2 - 1.0;
    let cos2 = mode.theta.cos().powi(2);
    let rho = mode.rho;
    move |tau, y, dy| {
        let beta = medium::beta_at(profile, tau);
        let gb2 = g_num * beta * beta / (n2 - beta * beta);
        let alpha = rho * (1.0 - gb2);
        let kappa = rho * (1.0 - cos2 * gb2);
        dy[0] = alpha * y[2];
        dy[1] = alpha * y[3];
        dy[2] = -kappa * y[0];
        dy[3] = -kappa * y[1];
    }
}

pub(crate) fn rhs_fpm(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    sigma: f64,
) -> impl FnMut(f64, &[f64], &mut [f64]) {
    let n2 = medium.n * medium.n;
    let g_num = n2 - 1.0;
    let cos2 = mode.theta.cos().powi(2);
    let rho = mode.rho;
    let s2 = sigma * sigma;
    move |tau, y, dy| {
        let beta = medium::beta_at(profile, tau);
        let gb2 = g_num * beta * beta / (n2 - beta * beta);
        let alpha = 1.0 - gb2;
        let kappa = 1.0 - cos2 * gb2;
        let ep = 0.5 * rho * (alpha / s2 + kappa * s2);
        let em = 0.5 * rho * (alpha / s2 - kappa * s2);
        // f+' = -i(ep f+ - em f-), f-' = +i(ep f- - em f+), scaled by rho.
        dy[0] = ep * y[1] - em * y[3];
        dy[1] = -ep * y[0] + em * y[2];
        dy[2] = em * y[1] - ep * y[3];
        dy[3] = -em * y[0] + ep * y[2];
    }
}

fn check_inputs(medium: MediumSpec, mode: ModeSpec, profile: MotionProfile) -> Result<()> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    profile.validate(medium)
}

/// Maps a requested accuracy to the integrator's local tolerance. The local
/// error bound is kept two orders tighter: secular accumulation over long
/// spans (hundreds of periods) eats roughly a factor tau_span into conserved
/// quantities, and this margin keeps them at the requested level.
pub(crate) fn ode_options(tolerance: f64) -> Result<ode::Options> {
    if !(tolerance > 0.0) || !tolerance.is_finite() {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let local = (tolerance / 100.0).clamp(1e-14, tolerance);
    Ok(ode::Options {
        max_steps: 2_000_000,
        ..ode::Options::tol(local)
    })
}

fn sample_grid(t0: f64, t1: f64, samples_per_period: usize) -> Vec<f64> {
    let mut grid = vec![t0];
    if samples_per_period > 0 && t1 != t0 {
        let dir = (t1 - t0).signum();
        let dt = dir * 2.0 * PI / samples_per_period as f64;
        let mut k = 1usize;
        loop {
            let t = t0 + k as f64 * dt;
            if (t - t1) * dir >= -1e-12 {
                break;
            }
            grid.push(t);
            k += 1;
        }
    }
    grid
}

fn run_evolution<F>(
    mut rhs: F,
    y0: [f64; 4],
    tau_span: (f64, f64),
    opts: &EvolveOptions,
    basis: Basis,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (t0, t1) = tau_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Domain(format!("tau span must be finite, got ({t0}, {t1})")));
    }
    let pack = |y: &[f64]| AmplitudePair {
        first: C64::new(y[0], y[1]),
        second: C64::new(y[2], y[3]),
        basis,
    };
    if t0 == t1 {
        return Ok(Trajectory {
            taus: vec![t0],
            states: vec![pack(&y0)],
            tolerance: opts.tolerance,
            stats: ode::Stats::default(),
        });
    }
    let grid = sample_grid(t0, t1, opts.samples_per_period);
    let run = match opts.fixed_steps_per_period {
        Some(spp) => {
            if spp == 0 {
                return Err(Error::Domain("fixed stepping needs at least one step".into()));
            }
            let n_steps = ((t1 - t0).abs() / (2.0 * PI) * spp as f64).ceil().max(1.0) as usize;
            ode::integrate_fixed(&mut rhs, t0, t1, &y0, n_steps, &grid)?
        }
        None => ode::integrate(&mut rhs, t0, t1, &y0, &grid, &ode_options(opts.tolerance)?)?,
    };
    let mut taus = grid;
    let mut states: Vec<AmplitudePair> = run.samples.iter().map(|y| pack(y)).collect();
    taus.push(t1);
    states.push(pack(&run.y));
    Ok(Trajectory { taus, states, tolerance: opts.tolerance, stats: run.stats })
}

/// Integrates f1' = rho alpha f2, f2' = -rho kappa f1 over `tau_span`.
pub fn evolve_f12(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    init: AmplitudePair,
    tau_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_inputs(medium, mode, profile)?;
    if init.basis != Basis::Linear {
        return Err(Error::Domain("evolve_f12 expects the initial pair in the linear basis".into()));
    }
    let y0 = [init.first.re, init.first.im, init.second.re, init.second.im];
    run_evolution(rhs_f12(medium, mode, profile), y0, tau_span, opts, Basis::Linear)
}

/// Integrates the coupled f+- system at a fixed sigma over `tau_span`.
pub fn evolve_fpm(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    sigma: f64,
    init: AmplitudePair,
    tau_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_inputs(medium, mode, profile)?;
    check_sigma(sigma)?;
    if init.basis != Basis::Polarization {
        return Err(Error::Domain(
            "evolve_fpm expects the initial pair in the polarization basis".into(),
        ));
    }
    let y0 = [init.first.re, init.first.im, init.second.re, init.second.im];
    run_evolution(rhs_fpm(medium, mode, profile, sigma), y0, tau_span, opts, Basis::Polarization)
}

/// Evolves the two fundamental solutions (1, 0) and (0, 1) of the f+-
/// system as one joint integration, so both see the same adaptive step
/// sequence. The swap symmetry tying the second solution to the first is
/// then exact in floating point, which keeps the pair comparable even
/// after many e-foldings of growth.
pub(crate) fn evolve_fpm_pair(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    sigma: f64,
    tau_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<(Trajectory, Trajectory)> {
    check_inputs(medium, mode, profile)?;
    check_sigma(sigma)?;
    let (t0, t1) = tau_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Domain(format!("tau span must be finite, got ({t0}, {t1})")));
    }
    let pack = |y: &[f64]| AmplitudePair {
        first: C64::new(y[0], y[1]),
        second: C64::new(y[2], y[3]),
        basis: Basis::Polarization,
    };
    let y0 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    if t0 == t1 {
        let single = |lo: usize| Trajectory {
            taus: vec![t0],
            states: vec![pack(&y0[lo..lo + 4])],
            tolerance: opts.tolerance,
            stats: ode::Stats::default(),
        };
        return Ok((single(0), single(4)));
    }
    let mut base = rhs_fpm(medium, mode, profile, sigma);
    let mut rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        base(t, &y[..4], &mut dy[..4]);
        base(t, &y[4..], &mut dy[4..]);
    };
    let grid = sample_grid(t0, t1, opts.samples_per_period);
    let run = ode::integrate(&mut rhs, t0, t1, &y0, &grid, &ode_options(opts.tolerance)?)?;
    let mut taus = grid;
    taus.push(t1);
    let unpack = |lo: usize| -> Vec<AmplitudePair> {
        let mut states: Vec<AmplitudePair> =
            run.samples.iter().map(|y| pack(&y[lo..lo + 4])).collect();
        states.push(pack(&run.y[lo..lo + 4]));
        states
    };
    let first = Trajectory {
        taus: taus.clone(),
        states: unpack(0),
        tolerance: opts.tolerance,
        stats: run.stats,
    };
    let second =
        Trajectory { taus, states: unpack(4), tolerance: opts.tolerance, stats: run.stats };
    Ok((first, second))
}

/// Wave vector along the motion: the field simply precesses about khat by
/// the angle psi(tau) = rho * integral of alpha. Returns the field at `tau`.
pub fn collinear_evolution(
    medium: MediumSpec,
    profile: MotionProfile,
    rho: f64,
    k_direction: Vector3<f64>,
    init: Vector3<C64>,
    tau: f64,
) -> Result<Vector3<C64>> {
    MediumSpec::new(medium.n)?;
    profile.validate(medium)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let k_norm = k_direction.norm();
    if k_norm == 0.0 {
        return Err(Error::DegenerateDirections("wave vector must be nonzero".into()));
    }
    let khat = k_direction / k_norm;
    let f_norm = init.map(|c| c.norm_sqr()).sum().sqrt();
    let along: C64 = init.iter().zip(khat.iter()).map(|(f, k)| f * *k).sum();
    if along.norm() > 1e-10 * f_norm {
        return Err(Error::NonTransverse(format!(
            "initial field has a longitudinal part |khat . f| = {:.3e}",
            along.norm()
        )));
    }
    let psi = rho * alpha_integral(medium, profile, tau);
    let rotated = khat.map(|x| C64::new(x, 0.0)).cross(&init);
    Ok(init * C64::new(psi.cos(), 0.0) + rotated * C64::new(psi.sin(), 0.0))
}

/// Integral of alpha(s) ds from 0 to tau by composite Gauss panels, split at
/// the window joins where alpha loses smoothness.
fn alpha_integral(medium: MediumSpec, profile: MotionProfile, tau: f64) -> f64 {
    let n2 = medium.n * medium.n;
    let g_num = n2 - 1.0;
    let alpha = |t: f64| {
        let beta = medium::beta_at(profile, t);
        1.0 - g_num * beta * beta / (n2 - beta * beta)
    };
    let mut cuts = vec![0.0, tau];
    if let Some(end) = profile.window_end() {
        let (lo, hi) = if tau >= 0.0 { (0.0, tau) } else { (tau, 0.0) };
        for join in [0.0, end] {
            if lo < join && join < hi {
                cuts.push(join);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if tau < 0.0 {
        cuts.reverse();
    }
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let panels = ((b - a).abs() / 0.25).ceil() as usize + 1;
        total += crate::quad::integral(alpha, a, b, panels);
    }
    total
}

/// Closed-form evolution for uniform motion: in the polarization basis at
/// the natural sigma, f+ and f- rotate with opposite phases omega1 tau.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSolution {
    /// Drag contribution omega_0 / Omega = n rho gamma beta cos(theta).
    pub omega0: f64,
    /// Mode frequency omega_1 / Omega = rho sqrt(alpha kappa).
    pub omega1: f64,
    /// Natural sigma = (alpha/kappa)^{1/4} at this velocity.
    pub sigma: f64,
    /// True when omega1 > |omega0| and the positive/negative frequency
    /// split of the two branches is unambiguous.
    pub split_valid: bool,
    f_plus0: C64,
    f_minus0: C64,
}

impl ConstantSolution {
    /// State at `tau` in the polarization basis at `self.sigma`.
    pub fn at(&self, tau: f64) -> AmplitudePair {
        let ph = C64::from_polar(1.0, -self.omega1 * tau);
        AmplitudePair::polarization(self.f_plus0 * ph, self.f_minus0 * ph.conj())
    }

    /// Same state mapped back to the linear basis.
    pub fn at_linear(&self, tau: f64) -> AmplitudePair {
        self.at(tau).to_linear(self.sigma).expect("sigma is positive")
    }
}

/// Solves the uniform-velocity case in closed form. `init` may be given in
/// either basis; it is converted at the natural sigma.
pub fn constant_velocity_solution(
    medium: MediumSpec,
    mode: ModeSpec,
    beta: f64,
    init: AmplitudePair,
) -> Result<ConstantSolution> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    let c = medium::coefficients(medium, mode, beta, 1.0)?;
    let sigma = (c.alpha / c.kappa).powf(0.25);
    let omega0 = medium.n * mode.rho * c.gamma * beta * mode.theta.cos();
    let omega1 = mode.rho * (c.alpha * c.kappa).sqrt();
    let pol = init.to_polarization(sigma)?;
    Ok(ConstantSolution {
        omega0,
        omega1,
        sigma,
        split_valid: omega1 > omega0.abs(),
        f_plus0: pol.first,
        f_minus0: pol.second,
    })
}
