//! Explicit Runge-Kutta integration.
//!
//! The workhorse is an 8th-order Dormand-Prince pair with embedded 5th and
//! 3rd order error estimates and a 7th-order continuous extension, driven
//! either adaptively ([`integrate`]) or with a fixed step
//! ([`integrate_fixed`]). Both drivers can evaluate the dense interpolant
//! at caller-supplied sample times without constraining step placement.
//!
//! States are flat `&[f64]` slices; complex systems pack re/im pairs.

use crate::{Error, Result};

mod tableau;

use tableau::{A, B, BHH, C, D, E};

/// Tolerances and limits for the adaptive driver.
#[derive(Debug, Clone)]
pub struct Options {
    /// Relative tolerance per component.
    pub rtol: f64,
    /// Absolute tolerance per component.
    pub atol: f64,
    /// Cap on attempted steps (accepted + rejected).
    pub max_steps: usize,
    /// Initial step size; `None` lets the driver pick one.
    pub first_step: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 100_000,
            first_step: None,
        }
    }
}

impl Options {
    /// Same tolerance for the relative and absolute parts.
    pub fn tol(tol: f64) -> Self {
        Options {
            rtol: tol,
            atol: tol,
            ..Options::default()
        }
    }
}

/// Work counters from one integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub n_eval: usize,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

/// Final state plus any dense samples, in the order requested.
#[derive(Debug, Clone)]
pub struct Integration {
    pub y: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub stats: Stats,
}

const SAFETY: f64 = 0.9;
// Bounds on the step divisor: growth at most 6x, shrink at most ~3x per step.
const DIV_MIN: f64 = 1.0 / 6.0;
const DIV_MAX: f64 = 1.0 / 0.333;

struct Stepper<F> {
    f: F,
    n: usize,
    k: [Vec<f64>; 17],
    yt: Vec<f64>,
    ksum: Vec<f64>,
    y5: Vec<f64>,
    rcont: [Vec<f64>; 8],
    n_eval: usize,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Stepper<F> {
    fn new(f: F, n: usize) -> Self {
        Stepper {
            f,
            n,
            k: std::array::from_fn(|_| vec![0.0; n]),
            yt: vec![0.0; n],
            ksum: vec![0.0; n],
            y5: vec![0.0; n],
            rcont: std::array::from_fn(|_| vec![0.0; n]),
            n_eval: 0,
        }
    }

    fn eval_into_slot(&mut self, x: f64, s: usize) {
        (self.f)(x, &self.yt, &mut self.k[s]);
        self.n_eval += 1;
    }

    /// y + h * (A-row combination of earlier stages) into the scratch state.
    fn build_stage_state(&mut self, y: &[f64], h: f64, s: usize) {
        let a = &A[s];
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, kj) in self.k.iter().enumerate().take(s).skip(1) {
                acc += a[j] * kj[i];
            }
            self.yt[i] = y[i] + h * acc;
        }
    }

    /// One trial step from (x, y) with size h; k[1] must already hold
    /// f(x, y). Leaves the high-order result in y5 and returns the scaled
    /// error (acceptable when <= 1).
    fn try_step(&mut self, x: f64, y: &[f64], h: f64, rtol: f64, atol: f64) -> f64 {
        for s in 2..=12 {
            self.build_stage_state(y, h, s);
            self.eval_into_slot(x + C[s] * h, s);
        }
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, kj) in self.k.iter().enumerate().take(13).skip(1) {
                acc += B[j] * kj[i];
            }
            self.ksum[i] = acc;
            self.y5[i] = y[i] + h * acc;
        }
        // Combined 5th/3rd order estimate, as in the published dop853 code.
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..self.n {
            let sc = atol + rtol * y[i].abs().max(self.y5[i].abs());
            let mut e5 = 0.0;
            for (j, kj) in self.k.iter().enumerate().take(13).skip(1) {
                e5 += E[j] * kj[i];
            }
            let e3 = self.ksum[i]
                - BHH[1] * self.k[1][i]
                - BHH[2] * self.k[9][i]
                - BHH[3] * self.k[12][i];
            err5 += (e5 / sc) * (e5 / sc);
            err3 += (e3 / sc) * (e3 / sc);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err5 * (1.0 / (deno * self.n as f64)).sqrt()
    }

    /// Builds the interpolant for the accepted step. Needs k[13] = f(x+h, y5)
    /// already evaluated and costs three more evaluations; call only when a
    /// sample actually falls inside this step.
    fn prepare_dense(&mut self, x: f64, y: &[f64], h: f64) {
        for i in 0..self.n {
            let ydiff = self.y5[i] - y[i];
            let bspl = h * self.k[1][i] - ydiff;
            self.rcont[0][i] = y[i];
            self.rcont[1][i] = ydiff;
            self.rcont[2][i] = bspl;
            self.rcont[3][i] = ydiff - h * self.k[13][i] - bspl;
        }
        for s in 14..=16 {
            self.build_stage_state(y, h, s);
            self.eval_into_slot(x + C[s] * h, s);
        }
        for r in 4..=7 {
            let d = &D[r];
            for i in 0..self.n {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().enumerate().skip(1) {
                    acc += d[j] * kj[i];
                }
                self.rcont[r][i] = acc * h;
            }
        }
    }

    /// Interpolant value at fraction theta of the prepared step.
    fn dense_at(&self, theta: f64, out: &mut [f64]) {
        let t1 = 1.0 - theta;
        let r = &self.rcont;
        for i in 0..self.n {
            out[i] = r[0][i]
                + theta
                    * (r[1][i]
                        + t1 * (r[2][i]
                            + theta
                                * (r[3][i]
                                    + t1 * (r[4][i]
                                        + theta
                                            * (r[5][i] + t1 * (r[6][i] + theta * r[7][i]))))));
        }
    }
}

/// Serves every pending sample that falls inside the step just accepted
/// (x_old, x_new]. Exact hits on x_new copy the step result.
#[allow(clippy::too_many_arguments)]
fn serve_samples<F: FnMut(f64, &[f64], &mut [f64])>(
    st: &mut Stepper<F>,
    x_old: f64,
    y_old: &[f64],
    h: f64,
    x_new: f64,
    posneg: f64,
    sample_times: &[f64],
    next: &mut usize,
    out: &mut Vec<Vec<f64>>,
) {
    let mut prepared = false;
    while *next < sample_times.len() && (sample_times[*next] - x_new) * posneg <= 0.0 {
        let t = sample_times[*next];
        if t == x_new {
            out.push(st.y5.clone());
        } else {
            if !prepared {
                st.prepare_dense(x_old, y_old, h);
                prepared = true;
            }
            let mut row = vec![0.0; st.n];
            st.dense_at((t - x_old) / h, &mut row);
            out.push(row);
        }
        *next += 1;
    }
}

fn validate_samples(t0: f64, t_end: f64, posneg: f64, sample_times: &[f64]) -> Result<()> {
    let span = (t_end - t0).abs().max(t0.abs()).max(t_end.abs());
    let slack = 1e-12 * span.max(1.0);
    let mut prev = t0;
    for (i, &t) in sample_times.iter().enumerate() {
        if (t - prev) * posneg < -slack {
            return Err(Error::Domain(format!(
                "sample times must be ordered along the integration direction \
                 (sample {i} at {t} after {prev})"
            )));
        }
        if (t - t_end) * posneg > slack || (t - t0) * posneg < -slack {
            return Err(Error::Domain(format!(
                "sample time {t} outside the integration span [{t0}, {t_end}]"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Adaptive integration of y' = f(t, y) from `t0` to `t_end`.
///
/// `sample_times` asks for dense-output states at those times; it must be
/// ordered along the integration direction and stay within the span.
/// Backward integration (`t_end < t0`) works.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    sample_times: &[f64],
    opts: &Options,
) -> Result<Integration>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(opts.rtol > 0.0) || !(opts.atol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerances must be positive (rtol {}, atol {})",
            opts.rtol, opts.atol
        )));
    }
    if t_end == t0 {
        return Ok(Integration {
            y: y0.to_vec(),
            samples: sample_times.iter().map(|_| y0.to_vec()).collect(),
            stats: Stats::default(),
        });
    }
    let posneg = (t_end - t0).signum();
    validate_samples(t0, t_end, posneg, sample_times)?;

    let n = y0.len();
    let mut st = Stepper::new(&mut f, n);
    let h_max = (t_end - t0).abs();
    let (rtol, atol) = (opts.rtol, opts.atol);

    let mut y = y0.to_vec();
    let mut x = t0;
    st.yt.copy_from_slice(&y);
    st.eval_into_slot(x, 1);

    let mut samples_out: Vec<Vec<f64>> = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0usize;
    while next_sample < sample_times.len() && (sample_times[next_sample] - t0) * posneg <= 0.0 {
        samples_out.push(y.clone());
        next_sample += 1;
    }

    let mut h = match opts.first_step {
        Some(h0) => {
            if !(h0.abs() > 0.0) {
                return Err(Error::Domain("first step must be nonzero".into()));
            }
            h0.abs().min(h_max) * posneg
        }
        None => initial_step(&mut st, x, &y, posneg, rtol, atol, h_max),
    };

    let mut stats = Stats::default();
    let mut rejected_last = false;
    let mut last = false;

    loop {
        if stats.n_accepted + stats.n_rejected >= opts.max_steps {
            return Err(Error::Integration(format!(
                "no convergence within {} steps (reached t = {x})",
                opts.max_steps
            )));
        }
        if 0.1 * h.abs() <= x.abs() * f64::EPSILON {
            return Err(Error::Integration(format!(
                "step size underflow at t = {x} (h = {h:e})"
            )));
        }
        if (x + 1.01 * h - t_end) * posneg > 0.0 {
            h = t_end - x;
            last = true;
        }

        let err = st.try_step(x, &y, h, rtol, atol);
        let fac11 = err.powf(0.125);

        if err <= 1.0 {
            stats.n_accepted += 1;
            let x_new = if last { t_end } else { x + h };
            // First-same-as-last evaluation, also the base of the interpolant.
            st.yt.copy_from_slice(&st.y5);
            st.eval_into_slot(x_new, 13);
            serve_samples(
                &mut st,
                x,
                &y,
                h,
                x_new,
                posneg,
                sample_times,
                &mut next_sample,
                &mut samples_out,
            );
            y.copy_from_slice(&st.y5);
            let (head, tail) = st.k.split_at_mut(13);
            std::mem::swap(&mut head[1], &mut tail[0]);
            x = x_new;
            if last {
                break;
            }
            let mut h_new = h / (fac11 / SAFETY).clamp(DIV_MIN, DIV_MAX);
            if h_new.abs() > h_max {
                h_new = posneg * h_max;
            }
            if rejected_last {
                h_new = posneg * h_new.abs().min(h.abs());
            }
            rejected_last = false;
            h = h_new;
        } else {
            stats.n_rejected += 1;
            rejected_last = true;
            last = false;
            h /= (fac11 / SAFETY).min(DIV_MAX);
        }
    }

    while next_sample < sample_times.len() {
        samples_out.push(y.clone());
        next_sample += 1;
    }
    stats.n_eval = st.n_eval;
    Ok(Integration {
        y,
        samples: samples_out,
        stats,
    })
}

/// Starting step size from the two standard trial derivatives.
fn initial_step<F>(
    st: &mut Stepper<F>,
    x: f64,
    y: &[f64],
    posneg: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = st.n;
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let sk = atol + rtol * y[i].abs();
        dnf += (st.k[1][i] / sk) * (st.k[1][i] / sk);
        dny += (y[i] / sk) * (y[i] / sk);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max) * posneg;

    // Explicit Euler probe for the second derivative scale.
    for i in 0..n {
        st.yt[i] = y[i] + h * st.k[1][i];
    }
    (st.f)(x + h, &st.yt, &mut st.k[2]);
    st.n_eval += 1;
    let mut der2 = 0.0;
    for i in 0..n {
        let sk = atol + rtol * y[i].abs();
        let d = (st.k[2][i] - st.k[1][i]) / sk;
        der2 += d * d;
    }
    der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        1e-6_f64.max(h.abs() * 1e-3)
    } else {
        (0.01 / der12).powf(0.125)
    };
    (100.0 * h.abs()).min(h1).min(h_max) * posneg
}

/// Fixed-step integration with `n_steps` equal steps and no error control.
/// The dense interpolant still serves `sample_times`.
pub fn integrate_fixed<F>(
    mut f: F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    n_steps: usize,
    sample_times: &[f64],
) -> Result<Integration>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if n_steps == 0 {
        return Err(Error::Domain("fixed-step integration needs n_steps >= 1".into()));
    }
    if t_end == t0 {
        return Ok(Integration {
            y: y0.to_vec(),
            samples: sample_times.iter().map(|_| y0.to_vec()).collect(),
            stats: Stats::default(),
        });
    }
    let posneg = (t_end - t0).signum();
    validate_samples(t0, t_end, posneg, sample_times)?;

    let n = y0.len();
    let mut st = Stepper::new(&mut f, n);
    let h_nominal = (t_end - t0) / n_steps as f64;

    let mut y = y0.to_vec();
    let mut x = t0;
    st.yt.copy_from_slice(&y);
    st.eval_into_slot(x, 1);

    let mut samples_out: Vec<Vec<f64>> = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0usize;
    while next_sample < sample_times.len() && (sample_times[next_sample] - t0) * posneg <= 0.0 {
        samples_out.push(y.clone());
        next_sample += 1;
    }

    let mut stats = Stats::default();
    for step in 0..n_steps {
        // Pin the final endpoint to kill accumulated roundoff in x.
        let x_new = if step + 1 == n_steps {
            t_end
        } else {
            t0 + (step + 1) as f64 * h_nominal
        };
        let h = x_new - x;
        st.try_step(x, &y, h, 1.0, 1.0);
        stats.n_accepted += 1;
        st.yt.copy_from_slice(&st.y5);
        st.eval_into_slot(x_new, 13);
        serve_samples(
            &mut st,
            x,
            &y,
            h,
            x_new,
            posneg,
            sample_times,
            &mut next_sample,
            &mut samples_out,
        );
        y.copy_from_slice(&st.y5);
        let (head, tail) = st.k.split_at_mut(13);
        std::mem::swap(&mut head[1], &mut tail[0]);
        x = x_new;
    }

    while next_sample < sample_times.len() {
        samples_out.push(y.clone());
        next_sample += 1;
    }
    stats.n_eval = st.n_eval;
    Ok(Integration {
        y,
        samples: samples_out,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_row_sums_match_nodes() {
        for s in 2..=16 {
            if s == 13 {
                continue;
            }
            let sum: f64 = A[s].iter().sum();
            assert!(
                (sum - C[s]).abs() < 1e-13,
                "row {s}: sum {sum} vs node {}",
                C[s]
            );
        }
        let b_sum: f64 = B.iter().sum();
        assert!((b_sum - 1.0).abs() < 1e-14, "B sum {b_sum}");
        let bhh_sum: f64 = BHH.iter().sum();
        assert!((bhh_sum - 1.0).abs() < 1e-14, "BHH sum {bhh_sum}");
        let e_sum: f64 = E.iter().sum();
        assert!(e_sum.abs() < 1e-14, "E sum {e_sum}");
    }

    // y' = y cos t, y(0) = 1, exact y = exp(sin t); nonautonomous on purpose.
    fn rhs_expsin(t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[0] * t.cos();
    }

    #[test]
    fn fixed_step_is_eighth_order() {
        let exact = f64::exp(f64::sin(3.0));
        let err_at = |steps: usize| {
            let r = integrate_fixed(rhs_expsin, 0.0, 3.0, &[1.0], steps, &[]).unwrap();
            (r.y[0] - exact).abs()
        };
        let e8 = err_at(8);
        let e16 = err_at(16);
        let e32 = err_at(32);
        // Order 8 means each halving gains ~2^8; demand a safe 2^7.
        assert!(e8 / e16 > 128.0, "e8 {e8:e} e16 {e16:e}");
        assert!(e16 / e32 > 128.0, "e16 {e16:e} e32 {e32:e}");
        assert!(e32 < 1e-9, "e32 {e32:e}");
    }

    #[test]
    fn adaptive_meets_tolerance() {
        let r = integrate(
            rhs_expsin,
            0.0,
            20.0 * std::f64::consts::PI,
            &[1.0],
            &[],
            &Options::tol(1e-12),
        )
        .unwrap();
        assert!((r.y[0] - 1.0).abs() < 1e-9, "end error {:e}", (r.y[0] - 1.0).abs());
        assert!(r.stats.n_accepted > 10);
        assert!(r.stats.n_eval > 12 * r.stats.n_accepted);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let times: Vec<f64> = (0..=128).map(|i| 3.0 * i as f64 / 128.0).collect();
        let r = integrate(rhs_expsin, 0.0, 3.0, &[1.0], &times, &Options::tol(1e-11)).unwrap();
        assert_eq!(r.samples.len(), times.len());
        let mut worst = 0.0_f64;
        for (t, row) in times.iter().zip(&r.samples) {
            worst = worst.max((row[0] - f64::exp(f64::sin(*t))).abs());
        }
        // The interpolant is one order below the step; allow the usual gap.
        assert!(worst < 1e-9, "worst dense error {worst:e}");
        // Endpoint sample is the step result itself.
        assert_eq!(r.samples.last().unwrap()[0], r.y[0]);
    }

    #[test]
    fn dense_output_fixed_step() {
        let times: Vec<f64> = (0..=64).map(|i| 3.0 * i as f64 / 64.0).collect();
        let r = integrate_fixed(rhs_expsin, 0.0, 3.0, &[1.0], 30, &times).unwrap();
        let mut worst = 0.0_f64;
        for (t, row) in times.iter().zip(&r.samples) {
            worst = worst.max((row[0] - f64::exp(f64::sin(*t))).abs());
        }
        assert!(worst < 1e-10, "worst dense error {worst:e}");
    }

    #[test]
    fn backward_integration() {
        let r = integrate(
            rhs_expsin,
            3.0,
            0.0,
            &[f64::exp(f64::sin(3.0))],
            &[],
            &Options::tol(1e-12),
        )
        .unwrap();
        assert!((r.y[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let r = integrate(rhs_expsin, 1.0, 1.0, &[2.5], &[1.0, 1.0], &Options::default()).unwrap();
        assert_eq!(r.y, vec![2.5]);
        assert_eq!(r.samples.len(), 2);
    }

    #[test]
    fn rejects_bad_sample_order() {
        let err = integrate(
            rhs_expsin,
            0.0,
            1.0,
            &[1.0],
            &[0.8, 0.2],
            &Options::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
        let err = integrate(rhs_expsin, 0.0, 1.0, &[1.0], &[1.5], &Options::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn rejects_zero_fixed_steps() {
        let err = integrate_fixed(rhs_expsin, 0.0, 1.0, &[1.0], 0, &[]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn step_budget_is_enforced() {
        let opts = Options {
            max_steps: 5,
            ..Options::tol(1e-13)
        };
        let err = integrate(
            |t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * (40.0 * t).cos() * 40.0,
            0.0,
            100.0,
            &[1.0],
            &[],
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Integration(_)), "{err}");
    }

    #[test]
    fn two_component_oscillator_conserves_norm() {
        // y'' = -y as a system; norm y0^2 + y1^2 is conserved.
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let r = integrate(
            rhs,
            0.0,
            200.0 * std::f64::consts::PI,
            &[1.0, 0.0],
            &[],
            &Options::tol(1e-12),
        )
        .unwrap();
        let norm = r.y[0] * r.y[0] + r.y[1] * r.y[1];
        assert!((norm - 1.0).abs() < 1e-9, "norm drift {:e}", (norm - 1.0).abs());
    }
}
