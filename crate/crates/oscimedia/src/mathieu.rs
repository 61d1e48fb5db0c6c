//! Reduction of the mode dynamics to a Hill oscillator: Mathieu parameters,
//! exact Hill coefficients, stability of the reduced equation, the resonance
//! line, stability charts over (a, q), and reconstruction of the amplitude
//! pair from the oscillator variable.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::floquet::{principal_exponent, CharacteristicExponent};
use crate::medium::{MediumSpec, ModeSpec, MotionProfile};
use crate::ode;
use crate::propagation::{evolve_f12, ode_options, AmplitudePair, EvolveOptions};
use crate::{Error, Result};

/// Parameters of the truncated single-harmonic (Mathieu) form
/// Q'' + (a - 2q cos 2 tau) Q = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuParams {
    pub a: f64,
    pub q: f64,
}

/// Cosine projections of the exact Hill coefficient: H ~ theta0 +
/// 2 sum_l theta_l cos(2 l tau).
#[derive(Debug, Clone)]
pub struct HillCoefficients {
    pub theta0: f64,
    /// theta_l for l = 1..=L.
    pub theta_l: Vec<f64>,
}

/// Per-cell verdict in a stability chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    Unstable,
    /// The cell's integration failed.
    Unknown,
}

/// Gridded stability classification over the (a, q) plane, row-major with a
/// varying slowest: cell (ia, iq) sits at index ia * q_values.len() + iq.
#[derive(Debug, Clone)]
pub struct StabilityChart {
    pub a_values: Vec<f64>,
    pub q_values: Vec<f64>,
    pub half_trace: Vec<f64>,
    pub class: Vec<StabilityClass>,
}

impl StabilityChart {
    pub fn index(&self, ia: usize, iq: usize) -> usize {
        ia * self.q_values.len() + iq
    }

    pub fn class_at(&self, ia: usize, iq: usize) -> StabilityClass {
        self.class[self.index(ia, iq)]
    }

    pub fn half_trace_at(&self, ia: usize, iq: usize) -> f64 {
        self.half_trace[self.index(ia, iq)]
    }
}

/// One sample of the oscillator variable and its derivative.
#[derive(Debug, Clone, Copy)]
pub struct QSample {
    pub tau: f64,
    pub value: C64,
    pub derivative: C64,
}

/// Outcome of running the full mode equations against the reduced Hill
/// oscillator from identical initial data.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonReport {
    /// Largest relative gap between the per-period amplitude envelopes.
    pub max_amplitude_deviation: f64,
    pub growth_rate_full: f64,
    pub growth_rate_reduced: f64,
    /// |full - reduced| / |full|; meaningful at growing (resonant) points.
    pub growth_rate_deviation: f64,
}

fn drive_constants(medium: MediumSpec, theta: f64, b: f64) -> (f64, f64) {
    let n2 = medium.n * medium.n;
    let p = 0.5 * b * b * (n2 - 1.0) / n2;
    let c = 1.0 + theta.cos().powi(2);
    (p, c)
}

/// a = rho^2 (1 - PC), q = rho^2 PC/2 - P with P = (b^2/2)(n^2-1)/n^2 and
/// C = 1 + cos^2 theta.
pub fn mathieu_parameters(medium: MediumSpec, mode: ModeSpec, b: f64) -> Result<MathieuParams> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    MotionProfile::Harmonic { b }.validate(medium)?;
    let (p, c) = drive_constants(medium, mode.theta, b);
    let r2 = mode.rho * mode.rho;
    Ok(MathieuParams { a: r2 * (1.0 - p * c), q: r2 * p * c / 2.0 - p })
}

/// alpha and its first two tau derivatives, via u = cos^2 tau.
fn alpha_derivatives(medium: MediumSpec, profile: MotionProfile, tau: f64) -> (f64, f64, f64) {
    let n2 = medium.n * medium.n;
    let b = profile.peak_velocity();
    let frozen = match profile {
        MotionProfile::Constant { .. } => true,
        MotionProfile::Harmonic { .. } => false,
        MotionProfile::Windowed { periods, .. } => {
            !(0.0..=2.0 * PI * f64::from(periods)).contains(&tau)
        }
    };
    if frozen {
        let alpha = 1.0 - (n2 - 1.0) * b * b / (n2 - b * b);
        return (alpha, 0.0, 0.0);
    }
    let u = tau.cos().powi(2);
    let denom = n2 - b * b * u;
    let alpha = 1.0 - (n2 - 1.0) * b * b * u / denom;
    let da_du = -(n2 - 1.0) * b * b * n2 / (denom * denom);
    let d2a_du2 = -2.0 * (n2 - 1.0) * b.powi(4) * n2 / (denom * denom * denom);
    let du = -(2.0 * tau).sin();
    let d2u = -2.0 * (2.0 * tau).cos();
    (alpha, da_du * du, d2a_du2 * du * du + da_du * d2u)
}

/// The exact Hill coefficient of the reduced oscillator,
/// H = rho^2 alpha kappa + alpha''/(2 alpha) - (3/4)(alpha'/alpha)^2.
pub fn hill_potential(medium: MediumSpec, mode: ModeSpec, b: f64, tau: f64) -> Result<f64> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    let profile = MotionProfile::Harmonic { b };
    profile.validate(medium)?;
    Ok(hill_value(medium, mode, profile, tau))
}

fn hill_value(medium: MediumSpec, mode: ModeSpec, profile: MotionProfile, tau: f64) -> f64 {
    let (alpha, da, d2a) = alpha_derivatives(medium, profile, tau);
    let kappa = 1.0 - mode.theta.cos().powi(2) * (1.0 - alpha);
    let r = da / alpha;
    mode.rho * mode.rho * alpha * kappa + 0.5 * d2a / alpha - 0.75 * r * r
}

/// Projects the exact Hill coefficient onto cosines of 2 l tau over one
/// period: theta_l = (1/pi) * integral of H cos(2 l tau). Uses uniform
/// periodic sampling, which is spectrally accurate here.
pub fn hill_coefficients(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    l_max: usize,
) -> Result<HillCoefficients> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    let profile = MotionProfile::Harmonic { b };
    profile.validate(medium)?;
    if l_max == 0 || l_max > 1024 {
        return Err(Error::Domain(format!("l_max must be in 1..=1024, got {l_max}")));
    }
    const N: usize = 4096;
    let h: Vec<f64> = (0..N)
        .map(|i| hill_value(medium, mode, profile, PI * i as f64 / N as f64))
        .collect();
    let theta0 = h.iter().sum::<f64>() / N as f64;
    let theta_l = (1..=l_max)
        .map(|l| {
            let s: f64 = h
                .iter()
                .enumerate()
                .map(|(i, hi)| hi * (2.0 * l as f64 * PI * i as f64 / N as f64).cos())
                .sum();
            s / N as f64
        })
        .collect();
    Ok(HillCoefficients { theta0, theta_l })
}

/// Half trace and characteristic exponent of the truncated Mathieu form over
/// one period [0, pi].
pub fn mathieu_stability(params: MathieuParams) -> Result<(f64, CharacteristicExponent)> {
    if !params.a.is_finite() || !params.q.is_finite() {
        return Err(Error::Domain(format!(
            "Mathieu parameters must be finite, got a = {}, q = {}",
            params.a, params.q
        )));
    }
    let MathieuParams { a, q } = params;
    let mut rhs = move |tau: f64, y: &[f64], dy: &mut [f64]| {
        let h = a - 2.0 * q * (2.0 * tau).cos();
        dy[0] = y[1];
        dy[1] = -h * y[0];
        dy[2] = y[3];
        dy[3] = -h * y[2];
    };
    let opts = ode_options(1e-10)?;
    let run = ode::integrate(&mut rhs, 0.0, PI, &[1.0, 0.0, 0.0, 1.0], &[], &opts)?;
    let half_trace = 0.5 * (run.y[0] + run.y[3]);
    Ok((half_trace, principal_exponent(half_trace)))
}

/// Locus of the first resonance in the (q, a) plane, a = slope * q +
/// intercept, traced by varying rho at fixed drive.
pub fn resonance_line(medium: MediumSpec, theta: f64, b: f64) -> Result<(f64, f64)> {
    MediumSpec::new(medium.n)?;
    MotionProfile::Harmonic { b }.validate(medium)?;
    let (p, c) = drive_constants(medium, theta, b);
    let pc = p * c;
    if pc < 1e-300 {
        return Err(Error::Domain(
            "resonance line degenerates for a still medium (b = 0 or n = 1)".into(),
        ));
    }
    let slope = 2.0 * (1.0 - pc) / pc;
    Ok((slope, p * slope))
}

/// Classifies every cell of a `resolution` x `resolution` grid over the
/// given (a, q) ranges. Cells within 1e-9 of |half trace| = 1 count as
/// stable; cells whose integration fails are marked unknown.
pub fn stability_chart(
    a_range: (f64, f64),
    q_range: (f64, f64),
    resolution: usize,
) -> Result<StabilityChart> {
    if resolution < 16 {
        return Err(Error::Domain(format!(
            "chart resolution must be at least 16, got {resolution}"
        )));
    }
    for (lo, hi, name) in [(a_range.0, a_range.1, "a"), (q_range.0, q_range.1, "q")] {
        if !lo.is_finite() || !(hi > lo) {
            return Err(Error::Domain(format!("bad {name} range ({lo}, {hi})")));
        }
    }
    let lin = |lo: f64, hi: f64| -> Vec<f64> {
        (0..resolution)
            .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let a_values = lin(a_range.0, a_range.1);
    let q_values = lin(q_range.0, q_range.1);
    let cells: Vec<(f64, StabilityClass)> = a_values
        .par_iter()
        .flat_map_iter(|&a| {
            q_values.iter().map(move |&q| {
                match mathieu_stability(MathieuParams { a, q }) {
                    Ok((h, _)) => {
                        let class = if h.abs() > 1.0 + 1e-9 {
                            StabilityClass::Unstable
                        } else {
                            StabilityClass::Stable
                        };
                        (h, class)
                    }
                    Err(_) => (f64::NAN, StabilityClass::Unknown),
                }
            })
        })
        .collect();
    let (half_trace, class) = cells.into_iter().unzip();
    Ok(StabilityChart { a_values, q_values, half_trace, class })
}

/// Maps oscillator samples back to the amplitude pair:
/// f1 = rho sqrt(alpha) Q, f2 = (alpha' Q / (2 sqrt(alpha)) + sqrt(alpha) Q') / alpha.
///
/// The windowed profile is rejected at its joins, where alpha stops being
/// twice continuously differentiable.
pub fn q_reconstruction(
    medium: MediumSpec,
    mode: ModeSpec,
    profile: MotionProfile,
    samples: &[QSample],
) -> Result<Vec<(f64, AmplitudePair)>> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    profile.validate(medium)?;
    if let Some(end) = profile.window_end() {
        for s in samples {
            if (s.tau - 0.0).abs() < 1e-9 || (s.tau - end).abs() < 1e-9 {
                return Err(Error::NonSmoothProfile(format!(
                    "alpha is not twice differentiable at the window join tau = {:.6}",
                    s.tau
                )));
            }
        }
    }
    Ok(samples
        .iter()
        .map(|s| {
            let (alpha, da, _) = alpha_derivatives(medium, profile, s.tau);
            let root = alpha.sqrt();
            let f1 = s.value * (mode.rho * root);
            let f2 = (s.value * (0.5 * da / root) + s.derivative * root) / alpha;
            (s.tau, AmplitudePair::linear(f1, f2))
        })
        .collect())
}

/// Integrates the exact Hill oscillator and returns (tau, Q, Q') samples on
/// a uniform grid, from initial data matching an f12 pair at tau = 0.
pub fn hill_evolution(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    init: AmplitudePair,
    tau_end: f64,
    samples_per_period: usize,
    tolerance: f64,
) -> Result<Vec<QSample>> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    let profile = MotionProfile::Harmonic { b };
    profile.validate(medium)?;
    if samples_per_period == 0 {
        return Err(Error::Domain("need at least one sample per period".into()));
    }
    let (alpha0, da0, _) = alpha_derivatives(medium, profile, 0.0);
    debug_assert!(da0.abs() < 1e-15, "alpha'(0) vanishes for the harmonic drive");
    let root0 = alpha0.sqrt();
    // Invert the reconstruction at tau = 0, where alpha' = 0.
    let q0 = init.first / (mode.rho * root0);
    let dq0 = init.second * root0;
    let mut rhs = move |tau: f64, y: &[f64], dy: &mut [f64]| {
        let h = hill_value(medium, mode, profile, tau);
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -h * y[0];
        dy[3] = -h * y[1];
    };
    let dt = 2.0 * PI / samples_per_period as f64;
    let count = (tau_end / dt).floor() as usize;
    let mut taus: Vec<f64> = (0..=count).map(|i| i as f64 * dt).collect();
    if *taus.last().unwrap() < tau_end - 1e-12 {
        taus.push(tau_end);
    }
    let y0 = [q0.re, q0.im, dq0.re, dq0.im];
    let run = ode::integrate(&mut rhs, 0.0, tau_end, &y0, &taus, &ode_options(tolerance)?)?;
    Ok(taus
        .iter()
        .zip(&run.samples)
        .map(|(t, y)| QSample {
            tau: *t,
            value: C64::new(y[0], y[1]),
            derivative: C64::new(y[2], y[3]),
        })
        .collect())
}

fn fit_log_slope(taus: &[f64], values: &[f64]) -> f64 {
    let n = taus.len() as f64;
    let xm = taus.iter().sum::<f64>() / n;
    let ym = values.iter().map(|v| v.ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, v) in taus.iter().zip(values) {
        num += (x - xm) * (v.ln() - ym);
        den += (x - xm) * (x - xm);
    }
    num / den
}

/// Runs the full mode equations and the exact Hill oscillator from the same
/// initial data (f1, f2) = (1, 0) and compares per-period amplitude
/// envelopes and fitted exponential growth rates.
pub fn mathieu_vs_full_comparison(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    periods: u32,
    tolerance: f64,
) -> Result<ComparisonReport> {
    if periods < 2 {
        return Err(Error::Domain("comparison needs at least two periods".into()));
    }
    const SPP: usize = 64;
    let profile = MotionProfile::Harmonic { b };
    let init = AmplitudePair::linear(C64::ONE, C64::ZERO);
    let span = (0.0, 2.0 * PI * f64::from(periods));
    let opts = EvolveOptions { tolerance, samples_per_period: SPP, fixed_steps_per_period: None };
    let full = evolve_f12(medium, mode, profile, init, span, &opts)?;

    let qs = hill_evolution(medium, mode, b, init, span.1, SPP, tolerance)?;
    let reduced = q_reconstruction(medium, mode, profile, &qs)?;

    let n_per = periods as usize;
    let mut env_full = Vec::with_capacity(n_per);
    let mut env_red = Vec::with_capacity(n_per);
    let mut centers = Vec::with_capacity(n_per);
    for p in 0..n_per {
        let lo = p * SPP;
        let hi = (p + 1) * SPP;
        let ef = full.states[lo..hi].iter().map(|s| s.first.norm()).fold(0.0, f64::max);
        let er = reduced[lo..hi].iter().map(|(_, s)| s.first.norm()).fold(0.0, f64::max);
        env_full.push(ef);
        env_red.push(er);
        centers.push(2.0 * PI * (p as f64 + 0.5));
    }
    let max_amplitude_deviation = env_full
        .iter()
        .zip(&env_red)
        .map(|(f, r)| (f - r).abs() / f)
        .fold(0.0, f64::max);
    let growth_rate_full = fit_log_slope(&centers, &env_full);
    let growth_rate_reduced = fit_log_slope(&centers, &env_red);
    let growth_rate_deviation =
        (growth_rate_full - growth_rate_reduced).abs() / growth_rate_full.abs().max(f64::MIN_POSITIVE);
    Ok(ComparisonReport {
        max_amplitude_deviation,
        growth_rate_full,
        growth_rate_reduced,
        growth_rate_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn medium(n: f64) -> MediumSpec {
        MediumSpec::new(n).unwrap()
    }

    fn mode(rho: f64, theta: f64) -> ModeSpec {
        ModeSpec::new(rho, theta).unwrap()
    }

    #[test]
    fn parameters_at_the_reference_point() {
        let p = mathieu_parameters(medium(2.0), mode(1.016, PI / 2.0), 0.3).unwrap();
        assert!((p.a - 0.9974170).abs() < 1e-6, "a = {}", p.a);
        assert!((p.q - (-0.0163306)).abs() < 1e-6, "q = {}", p.q);
        assert!((p.a - 0.997417).abs() < 1e-5);
        assert!((p.q - (-0.016331)).abs() < 1e-5);
    }

    #[test]
    fn stability_reproduces_cos_law_at_q_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let a = rng.random::<f64>() * 25.0;
            let (h, nu) = mathieu_stability(MathieuParams { a, q: 0.0 }).unwrap();
            assert!((h - (PI * a.sqrt()).cos()).abs() < 1e-10, "a = {a}: {h}");
            assert_eq!(nu.stable, h.abs() <= 1.0);
        }
        // Negative a: pure exponential growth, h = cosh(pi sqrt(-a)).
        let (h, nu) = mathieu_stability(MathieuParams { a: -2.0, q: 0.0 }).unwrap();
        assert!((h - (PI * 2.0f64.sqrt()).cosh()).abs() < 1e-9, "{h}");
        assert!(!nu.stable);
    }

    #[test]
    fn tongue_edges_match_mathieu_special_values() {
        // First-tongue edge curves evaluated at |q| = 0.0163306.
        let q = -0.0163306;
        for (edge, label) in [(0.9836361319, "b1"), (1.0162971958, "a1")] {
            let (h, _) = mathieu_stability(MathieuParams { a: edge, q }).unwrap();
            assert!((h.abs() - 1.0).abs() < 1e-9, "{label}: |h| - 1 = {:e}", h.abs() - 1.0);
        }
        // Interior of the tongue is unstable, just outside is stable.
        let (h, _) = mathieu_stability(MathieuParams { a: 1.0, q }).unwrap();
        assert!(h.abs() > 1.0);
        let (h, _) = mathieu_stability(MathieuParams { a: 0.97, q }).unwrap();
        assert!(h.abs() < 1.0);
    }

    #[test]
    fn truncated_exponent_near_the_full_system() {
        let p = mathieu_parameters(medium(2.0), mode(1.016, PI / 2.0), 0.3).unwrap();
        let (_, nu) = mathieu_stability(p).unwrap();
        assert!((nu.im - 8.07021399e-3).abs() < 1e-9, "{}", nu.im);
        // Within 10% of the full-system growth rate at the same point.
        let full = 8.7766981700e-3;
        assert!((nu.im - full).abs() / full < 0.10);
    }

    #[test]
    fn hill_projections_frozen_values() {
        let m = medium(2.0);
        let md = mode(1.0, PI / 2.0);
        let hc = hill_coefficients(m, md, 0.1, 4).unwrap();
        assert!((hc.theta0 - 0.9962358340).abs() < 1e-9, "{}", hc.theta0);
        assert!((hc.theta_l[0] - 0.0018938715).abs() < 1e-9, "{}", hc.theta_l[0]);
        assert!((hc.theta_l[1] - 2.607e-5).abs() < 1e-8);
        assert!((hc.theta_l[2] - 1.153e-7).abs() < 1e-9);

        let hc = hill_coefficients(m, md, 0.3, 4).unwrap();
        assert!((hc.theta0 - 0.9650293441).abs() < 1e-9, "{}", hc.theta0);
        assert!((hc.theta_l[0] - 0.0184866323).abs() < 1e-9, "{}", hc.theta_l[0]);
        assert!((hc.theta_l[1] - 2.315e-3).abs() < 1e-6);
        assert!((hc.theta_l[2] - 9.564e-5).abs() < 1e-7);
    }

    #[test]
    fn truncation_error_shrinks_as_fourth_power() {
        let m = medium(2.0);
        let md = mode(1.0, PI / 2.0);
        let gap = |b: f64| {
            let p = mathieu_parameters(m, md, b).unwrap();
            let hc = hill_coefficients(m, md, b, 2).unwrap();
            (hc.theta0 - p.a).abs().max((hc.theta_l[0] + p.q).abs())
        };
        let ratio = gap(0.2) / gap(0.1);
        assert!(ratio > 8.0, "shrink factor {ratio}");
        assert!((ratio - 16.08).abs() < 0.5, "shrink factor {ratio}");
    }

    #[test]
    fn resonance_line_carries_the_parameter_locus() {
        let m = medium(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let b = 0.05 + rng.random::<f64>() * 0.8;
            let theta = rng.random::<f64>() * PI;
            let (slope, intercept) = resonance_line(m, theta, b).unwrap();
            for _ in 0..5 {
                let rho = 0.1 + rng.random::<f64>() * 3.0;
                let p = mathieu_parameters(m, mode(rho, theta), b).unwrap();
                assert!((p.a - (slope * p.q + intercept)).abs() < 1e-12 * p.a.abs().max(1.0));
            }
        }
        assert!(resonance_line(m, 1.0, 0.0).is_err());
        assert!(resonance_line(medium(1.0), 1.0, 0.3).is_err());
    }

    #[test]
    fn chart_grid_shape_and_symmetry() {
        let chart = stability_chart((0.0, 5.0), (-1.0, 1.0), 24).unwrap();
        assert_eq!(chart.a_values.len(), 24);
        assert_eq!(chart.q_values.len(), 24);
        assert_eq!(chart.half_trace.len(), 24 * 24);
        assert!(chart.class.iter().all(|c| *c != StabilityClass::Unknown));
        // Mathieu is symmetric under q -> -q; the grid is too.
        for ia in 0..24 {
            for iq in 0..24 {
                let h1 = chart.half_trace_at(ia, iq);
                let h2 = chart.half_trace_at(ia, 23 - iq);
                assert!((h1 - h2).abs() < 1e-9, "asymmetry at ({ia}, {iq})");
            }
        }
        // Unstable cells exist (tongues) but stable cells dominate.
        let unstable = chart.class.iter().filter(|c| **c == StabilityClass::Unstable).count();
        assert!(unstable > 0);
        assert!(unstable < 24 * 24 / 2);
        assert!(stability_chart((0.0, 5.0), (-1.0, 1.0), 8).is_err());
    }

    #[test]
    fn reconstruction_round_trips_the_full_solution() {
        let m = medium(2.0);
        let md = mode(1.3, PI / 2.0);
        let profile = MotionProfile::Harmonic { b: 0.25 };
        let init = AmplitudePair::linear(C64::new(0.8, -0.1), C64::new(0.2, 0.5));
        let opts = EvolveOptions::default();
        let tr = evolve_f12(m, md, profile, init, (0.0, 8.0 * PI), &opts).unwrap();
        // Invert the substitution on the trajectory, then map back.
        let samples: Vec<QSample> = tr
            .taus
            .iter()
            .zip(&tr.states)
            .map(|(t, s)| {
                let (alpha, da, _) = alpha_derivatives(m, profile, *t);
                let root = alpha.sqrt();
                let q = s.first / (md.rho * root);
                let dq = s.second * root - q * (0.5 * da / alpha);
                QSample { tau: *t, value: q, derivative: dq }
            })
            .collect();
        let rec = q_reconstruction(m, md, profile, &samples).unwrap();
        for ((t, pair), s) in rec.iter().zip(&tr.states) {
            assert!((pair.first - s.first).norm() < 1e-12, "f1 at {t}");
            assert!((pair.second - s.second).norm() < 1e-12, "f2 at {t}");
        }
    }

    #[test]
    fn reconstruction_rejects_window_joins() {
        let m = medium(2.0);
        let md = mode(1.0, PI / 2.0);
        let profile = MotionProfile::Windowed { b: 0.3, periods: 2 };
        let samples = [QSample { tau: 4.0 * PI, value: C64::ONE, derivative: C64::ZERO }];
        let err = q_reconstruction(m, md, profile, &samples).unwrap_err();
        assert!(matches!(err, Error::NonSmoothProfile(_)), "{err}");
        // Interior samples are fine.
        let samples = [QSample { tau: PI, value: C64::ONE, derivative: C64::ZERO }];
        assert!(q_reconstruction(m, md, profile, &samples).is_ok());
    }

    #[test]
    fn comparison_agrees_at_the_resonance_peak() {
        let m = medium(2.0);
        let md = mode(1.0177218305, PI / 2.0);
        let report = mathieu_vs_full_comparison(m, md, 0.3, 50, 1e-10).unwrap();
        assert!(
            report.growth_rate_deviation < 0.01,
            "growth deviation {}",
            report.growth_rate_deviation
        );
        assert!(
            report.max_amplitude_deviation < 0.02,
            "envelope deviation {}",
            report.max_amplitude_deviation
        );
        // The fitted growth tracks the Floquet exponent at the peak.
        assert!(
            (report.growth_rate_full - 8.9382851839e-3).abs() / 8.9382851839e-3 < 0.10,
            "fitted growth {}",
            report.growth_rate_full
        );
    }
}
