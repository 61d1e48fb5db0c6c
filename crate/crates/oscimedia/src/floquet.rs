//! Floquet analysis of the driven mode equations: monodromy over one
//! coefficient period, characteristic exponents with branch tracking, scans
//! over the frequency ratio, and parametric resonance regions.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::medium::{sigma_reference, MediumSpec, ModeSpec, MotionProfile};
use crate::ode;
use crate::propagation::{ode_options, rhs_fpm};
use crate::{Error, Result};

/// Fundamental-solution matrix of the f+- system after one coefficient
/// period [0, pi].
#[derive(Debug, Clone, Copy)]
pub struct MonodromyResult {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
    pub determinant: C64,
    pub half_trace: C64,
}

/// Characteristic exponent nu with cos(pi nu) = half_trace. `stable` mirrors
/// im == 0, i.e. |half_trace| <= 1.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicExponent {
    pub re: f64,
    pub im: f64,
    pub stable: bool,
}

/// Parametric resonance tongue in rho: edges, peak location, peak growth.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceRegion {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub rho_peak: f64,
    pub im_nu_peak: f64,
}

fn integrate_column(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    sigma: f64,
    opts: &ode::Options,
    y0: [f64; 4],
    samples: &[f64],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let profile = MotionProfile::Harmonic { b };
    profile.validate(medium)?;
    let mut rhs = rhs_fpm(medium, mode, profile, sigma);
    let run = ode::integrate(&mut rhs, 0.0, PI, &y0, samples, opts)?;
    Ok((run.y, run.samples))
}

/// Integrates both fundamental solutions of the harmonic drive over [0, pi]
/// and assembles the monodromy matrix, columns ordered by initial condition
/// (1, 0) then (0, 1).
pub fn monodromy(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    sigma: f64,
    tolerance: f64,
) -> Result<MonodromyResult> {
    MediumSpec::new(medium.n)?;
    ModeSpec::new(mode.rho, mode.theta)?;
    let opts = ode_options(tolerance)?;
    let (c1, _) = integrate_column(medium, mode, b, sigma, &opts, [1.0, 0.0, 0.0, 0.0], &[])?;
    let (c2, _) = integrate_column(medium, mode, b, sigma, &opts, [0.0, 0.0, 1.0, 0.0], &[])?;
    build_monodromy(&c1, &c2)
}

fn build_monodromy(c1: &[f64], c2: &[f64]) -> Result<MonodromyResult> {
    let m11 = C64::new(c1[0], c1[1]);
    let m21 = C64::new(c1[2], c1[3]);
    let m12 = C64::new(c2[0], c2[1]);
    let m22 = C64::new(c2[2], c2[3]);
    let determinant = m11 * m22 - m12 * m21;
    let half_trace = 0.5 * (m11 + m22);
    if half_trace.im.abs() > 1e-6 || (determinant - C64::ONE).norm() > 1e-6 {
        return Err(Error::Numerical(format!(
            "monodromy lost its structure: Im half_trace = {:.3e}, det - 1 = {:.3e}",
            half_trace.im,
            (determinant - C64::ONE).norm()
        )));
    }
    Ok(MonodromyResult { m11, m12, m21, m22, determinant, half_trace })
}

/// Winding of the first fundamental solution's f+ phase across [0, pi],
/// in units of pi. Tracks Re nu closely enough to identify the branch.
fn winding_number(
    medium: MediumSpec,
    mode: ModeSpec,
    b: f64,
    sigma: f64,
    opts: &ode::Options,
) -> Result<f64> {
    const SAMPLES: usize = 512;
    let taus: Vec<f64> = (1..SAMPLES)
        .map(|i| PI * i as f64 / SAMPLES as f64)
        .collect();
    let (end, samples) =
        integrate_column(medium, mode, b, sigma, opts, [1.0, 0.0, 0.0, 0.0], &taus)?;
    let mut prev = 0.0; // arg f+(0) with f+(0) = 1
    let mut total = 0.0;
    for y in samples.iter().chain(std::iter::once(&end)) {
        let arg = C64::new(y[0], y[1]).arg();
        let mut d = arg - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = arg;
    }
    Ok(-total / PI)
}

pub(crate) fn principal_exponent(h: f64) -> CharacteristicExponent {
    if h.abs() <= 1.0 {
        CharacteristicExponent { re: h.acos() / PI, im: 0.0, stable: true }
    } else if h > 1.0 {
        CharacteristicExponent { re: 0.0, im: h.acosh() / PI, stable: false }
    } else {
        CharacteristicExponent { re: 1.0, im: (-h).acosh() / PI, stable: false }
    }
}

/// Candidate branch values of Re nu for a given half trace, sorted, covering
/// a window around `center`.
fn branch_candidates(h: f64, center: f64, out: &mut Vec<f64>) {
    out.clear();
    let base = (center / 2.0).floor() * 2.0 - 4.0;
    if h.abs() <= 1.0 {
        let nu0 = h.clamp(-1.0, 1.0).acos() / PI;
        for k in 0..6 {
            let even = base + 2.0 * k as f64;
            out.push(even + nu0);
            out.push(even - nu0);
        }
    } else if h > 1.0 {
        for k in 0..6 {
            out.push(base + 2.0 * k as f64);
        }
    } else {
        for k in 0..6 {
            out.push(base + 2.0 * k as f64 + 1.0);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
}

/// Resolves the half trace into a characteristic exponent. Without a hint
/// the principal branch is returned: Re nu in [0, 1] for stable traces, the
/// root integer 0 or 1 otherwise. With a hint, the branch whose Re nu lies
/// nearest the hint wins.
pub fn characteristic_exponent(
    m: &MonodromyResult,
    branch_hint: Option<f64>,
) -> CharacteristicExponent {
    let h = m.half_trace.re;
    match branch_hint {
        None => principal_exponent(h),
        Some(hint) => {
            let mut cands = Vec::new();
            branch_candidates(h, hint, &mut cands);
            let re = cands
                .iter()
                .copied()
                .min_by(|a, b| {
                    ((a - hint).abs(), *a)
                        .partial_cmp(&((b - hint).abs(), *b))
                        .unwrap()
                })
                .unwrap();
            let p = principal_exponent(h);
            CharacteristicExponent { re, im: p.im, stable: p.stable }
        }
    }
}

/// Scans Re/Im nu over an ascending rho grid, threading the branch so that
/// Re nu is non-decreasing and follows the accumulated phase winding.
///
/// Half traces and windings are computed in parallel; branch resolution then
/// runs once in scan order.
pub fn exponent_scan(
    medium: MediumSpec,
    b: f64,
    theta: f64,
    rho_range: (f64, f64),
    sample_count: usize,
    tolerance: f64,
) -> Result<Vec<(f64, CharacteristicExponent)>> {
    MediumSpec::new(medium.n)?;
    if sample_count < 2 {
        return Err(Error::Domain(format!(
            "scan needs at least two samples, got {sample_count}"
        )));
    }
    let (lo, hi) = rho_range;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Domain(format!(
            "rho range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let sigma = sigma_reference(medium, ModeSpec::new(1.0, theta)?, b)?;
    let opts = ode_options(tolerance)?;
    let step = (hi - lo) / (sample_count - 1) as f64;
    let rhos: Vec<f64> = (0..sample_count).map(|i| lo + step * i as f64).collect();

    let points: Result<Vec<(f64, f64, f64)>> = rhos
        .par_iter()
        .map(|&rho| {
            let mode = ModeSpec::new(rho, theta)?;
            let m = monodromy(medium, mode, b, sigma, tolerance)?;
            let w = winding_number(medium, mode, b, sigma, &opts)?;
            Ok((rho, m.half_trace.re, w))
        })
        .collect();
    let points = points?;

    let mut out = Vec::with_capacity(sample_count);
    let mut prev: Option<f64> = None;
    let mut cands = Vec::new();
    for (rho, h, w) in points {
        branch_candidates(h, w, &mut cands);
        let floor = prev.map_or(f64::NEG_INFINITY, |p| p - 1e-6);
        let re = cands
            .iter()
            .copied()
            .filter(|c| *c >= floor)
            .min_by(|a, b| {
                ((a - w).abs(), *a)
                    .partial_cmp(&((b - w).abs(), *b))
                    .unwrap()
            })
            .expect("candidate ladder is unbounded above");
        prev = Some(re);
        let p = principal_exponent(h);
        out.push((rho, CharacteristicExponent { re, im: p.im, stable: p.stable }));
    }
    Ok(out)
}

/// Golden-section maximization of `f` on [lo, hi].
fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, iters: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    if f1 >= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Locates the parametric resonance tongue of the given order: seeds near
/// the small-amplitude estimate, maximizes |half trace| to get inside,
/// verifies the branch by winding, then bisects |half trace| = 1 for the
/// edges and golden-sections the peak growth.
pub fn resonance_region(
    medium: MediumSpec,
    b: f64,
    theta: f64,
    order: u32,
    tolerance: f64,
) -> Result<ResonanceRegion> {
    MediumSpec::new(medium.n)?;
    if order == 0 {
        return Err(Error::Domain("resonance order starts at 1".into()));
    }
    let n2 = medium.n * medium.n;
    let p = 0.5 * b * b * (n2 - 1.0) / n2;
    let cos = theta.cos();
    let pc = p * (1.0 + cos * cos);
    if pc >= 1.0 {
        return Err(Error::Domain(format!(
            "drive too strong for the seed estimate (PC = {pc})"
        )));
    }
    let sigma = sigma_reference(medium, ModeSpec::new(1.0, theta)?, b)?;
    let rho_c = order as f64 / (1.0 - pc).sqrt();
    let abs_h = |rho: f64| -> Result<f64> {
        let mode = ModeSpec::new(rho, theta)?;
        Ok(monodromy(medium, mode, b, sigma, tolerance)?.half_trace.re.abs())
    };

    // Coarse grid over a generous window around the seed.
    const GRID: usize = 65;
    let lo = 0.65 * rho_c;
    let hi = 1.35 * rho_c;
    let spacing = (hi - lo) / (GRID - 1) as f64;
    let grid: Result<Vec<(f64, f64)>> = (0..GRID)
        .into_par_iter()
        .map(|i| {
            let rho = lo + spacing * i as f64;
            Ok((rho, abs_h(rho)?))
        })
        .collect();
    let grid = grid?;
    let (mut rho_in, mut h_in) = grid
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    if h_in <= 1.0 {
        // The tongue may be narrower than the grid; refine around the argmax.
        let a = (rho_in - 2.0 * spacing).max(lo);
        let c = (rho_in + 2.0 * spacing).min(hi);
        let (r, h) = golden_max(abs_h, a, c, 60)?;
        rho_in = r;
        h_in = h;
        if h_in <= 1.0 {
            return Err(Error::NotFound(format!(
                "no order-{order} resonance found near rho = {rho_c:.4} \
                 (peak |half trace| = {h_in:.6})"
            )));
        }
    }
    // Confirm the tongue's order through the phase winding.
    let opts = ode_options(tolerance)?;
    let w = winding_number(medium, ModeSpec::new(rho_in, theta)?, b, sigma, &opts)?;
    if w.round() as i64 != i64::from(order) {
        return Err(Error::NotFound(format!(
            "tongue near rho = {rho_in:.4} has winding {w:.3}, not order {order}"
        )));
    }

    // Bracket each edge by doubling steps outward, then bisect |h| = 1.
    let edge = |direction: f64| -> Result<f64> {
        let mut step = spacing.max(1e-6);
        let mut inside = rho_in;
        loop {
            let probe = inside + direction * step;
            if probe <= 0.0 {
                return Err(Error::NotFound("tongue edge ran into rho = 0".into()));
            }
            if abs_h(probe)? <= 1.0 {
                // Bisect between the last inside point and this outside one.
                let (mut a, mut c) = (inside, probe);
                for _ in 0..52 {
                    let mid = 0.5 * (a + c);
                    if abs_h(mid)? > 1.0 {
                        a = mid;
                    } else {
                        c = mid;
                    }
                    if (c - a).abs() < 1e-12 * rho_in {
                        break;
                    }
                }
                return Ok(0.5 * (a + c));
            }
            inside = probe;
            step *= 2.0;
        }
    };
    let rho_lo = edge(-1.0)?;
    let rho_hi = edge(1.0)?;
    let (rho_peak, h_peak) = golden_max(abs_h, rho_lo, rho_hi, 70)?;
    Ok(ResonanceRegion {
        rho_lo,
        rho_hi,
        rho_peak,
        im_nu_peak: h_peak.acosh() / PI,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-10;

    fn medium(n: f64) -> MediumSpec {
        MediumSpec::new(n).unwrap()
    }

    fn mode(rho: f64, theta: f64) -> ModeSpec {
        ModeSpec::new(rho, theta).unwrap()
    }

    fn synthetic(h: f64) -> MonodromyResult {
        // Diagonal elliptic/hyperbolic monodromy with the requested trace.
        let m11 = if h.abs() <= 1.0 {
            C64::new(h, -(1.0 - h * h).sqrt())
        } else {
            C64::new(h + (h * h - 1.0).sqrt() * h.signum(), 0.0)
        };
        let m22 = if h.abs() <= 1.0 { m11.conj() } else { C64::new(1.0, 0.0) / m11 };
        MonodromyResult {
            m11,
            m12: C64::ZERO,
            m21: C64::ZERO,
            m22,
            determinant: m11 * m22,
            half_trace: 0.5 * (m11 + m22),
        }
    }

    #[test]
    fn still_medium_monodromy_is_exact() {
        let m = medium(2.0);
        for rho in [0.37, 1.23, 2.7] {
            let md = mode(rho, PI / 2.0);
            let r = monodromy(m, md, 0.0, 1.0, TOL).unwrap();
            assert!((r.half_trace.re - (PI * rho).cos()).abs() < 1e-10, "rho {rho}");
            assert!(r.half_trace.im.abs() < 1e-12);
            assert!((r.determinant - C64::ONE).norm() < 1e-10);
            // Diagonal: no mode mixing in a still medium.
            assert!(r.m12.norm() < 1e-10);
            assert!(r.m21.norm() < 1e-10);
        }
    }

    #[test]
    fn monodromy_structure_at_resonance_point() {
        let m = medium(2.0);
        let md = mode(1.016, PI / 2.0);
        let sigma = sigma_reference(m, md, 0.3).unwrap();
        let r = monodromy(m, md, 0.3, sigma, TOL).unwrap();
        assert!((r.half_trace.re - (-1.000380154023)).abs() < 1e-9, "{}", r.half_trace.re);
        assert!(r.half_trace.im.abs() < 1e-9);
        assert!((r.determinant - C64::ONE).norm() < 1e-9);
        assert!((r.m22 - r.m11.conj()).norm() < 1e-9);
        assert!((r.m21 - r.m12.conj()).norm() < 1e-9);
        // Growth rate on this branch.
        let nu = characteristic_exponent(&r, None);
        assert!(!nu.stable);
        assert_eq!(nu.re, 1.0);
        assert!((nu.im - 8.7766981700e-3).abs() < 1e-9, "{}", nu.im);
    }

    #[test]
    fn exponent_branches_follow_hints() {
        let stable = synthetic((0.3 * PI).cos());
        let p = characteristic_exponent(&stable, None);
        assert!(p.stable);
        assert!(p.im == 0.0);
        assert!((p.re - 0.3).abs() < 1e-12);
        assert!((characteristic_exponent(&stable, Some(2.25)).re - 2.3).abs() < 1e-12);
        assert!((characteristic_exponent(&stable, Some(1.8)).re - 1.7).abs() < 1e-12);
        assert!((characteristic_exponent(&stable, Some(-0.2)).re - (-0.3)).abs() < 1e-12);

        let above = synthetic(1.5);
        let p = characteristic_exponent(&above, None);
        assert!(!p.stable);
        assert_eq!(p.re, 0.0);
        assert!((p.im - 1.5f64.acosh() / PI).abs() < 1e-12);
        assert_eq!(characteristic_exponent(&above, Some(2.2)).re, 2.0);

        let below = synthetic(-1.2);
        let p = characteristic_exponent(&below, None);
        assert_eq!(p.re, 1.0);
        assert_eq!(characteristic_exponent(&below, Some(2.9)).re, 3.0);
        assert!((p.im - 1.2f64.acosh() / PI).abs() < 1e-12);
    }

    #[test]
    fn scan_reduces_to_rho_in_still_medium() {
        // Grid avoids integers, where arccos conditioning blows up.
        let scan = exponent_scan(medium(2.0), 0.0, PI / 2.0, (0.515, 2.485), 42, TOL).unwrap();
        for (rho, nu) in scan {
            assert!(nu.stable);
            assert!((nu.re - rho).abs() < 1e-6, "rho {rho} re {}", nu.re);
            assert_eq!(nu.im, 0.0);
        }
    }

    #[test]
    fn scan_is_monotone_with_integer_plateaus() {
        let scan = exponent_scan(medium(2.0), 0.3, PI / 2.0, (0.5, 2.5), 161, TOL).unwrap();
        let mut prev = f64::NEG_INFINITY;
        let mut unstable_seen = 0;
        for (rho, nu) in &scan {
            assert!(nu.re >= prev - 1e-6, "re dropped at rho {rho}");
            prev = nu.re;
            assert_eq!(nu.stable, nu.im == 0.0);
            if !nu.stable {
                unstable_seen += 1;
                assert!(
                    (nu.re - nu.re.round()).abs() < 1e-6,
                    "plateau off integer at rho {rho}: {}",
                    nu.re
                );
            }
        }
        // The m=1 tongue is wide enough to be caught by this grid.
        assert!(unstable_seen >= 1, "no unstable points seen");
        // Endpoints bracket the first two plateaus.
        assert!(scan.first().unwrap().1.re < 1.0);
        assert!(scan.last().unwrap().1.re > 2.0);
    }

    #[test]
    fn first_resonance_region_is_frozen() {
        let r = resonance_region(medium(2.0), 0.3, PI / 2.0, 1, TOL).unwrap();
        assert!((r.rho_lo - 1.0086254129).abs() < 1e-6, "lo {}", r.rho_lo);
        assert!((r.rho_hi - 1.0268182430).abs() < 1e-6, "hi {}", r.rho_hi);
        assert!((r.rho_peak - 1.0177218305).abs() < 1e-6, "peak {}", r.rho_peak);
        assert!((r.im_nu_peak - 8.9382851839e-3).abs() < 1e-9, "im {}", r.im_nu_peak);
    }

    #[test]
    fn second_resonance_region_is_frozen() {
        let r = resonance_region(medium(2.0), 0.3, PI / 2.0, 2, TOL).unwrap();
        assert!((r.rho_lo - 2.0350286041).abs() < 1e-6, "lo {}", r.rho_lo);
        assert!((r.rho_hi - 2.0358860945).abs() < 1e-6, "hi {}", r.rho_hi);
        assert!((r.rho_peak - 2.0354573554).abs() < 1e-6, "peak {}", r.rho_peak);
        assert!((r.im_nu_peak - 4.2130647450e-4).abs() < 1e-9, "im {}", r.im_nu_peak);
    }

    #[test]
    fn still_medium_has_no_resonance() {
        let err = resonance_region(medium(2.0), 0.0, PI / 2.0, 1, TOL).unwrap_err();
        assert!(matches!(err, Error::NotFound(_)), "{err}");
    }
}
