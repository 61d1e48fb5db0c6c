//! Composite Gauss-Legendre quadrature for the smooth 1-d integrals here
//! (accumulated phase, rotation angles, Fourier projections).

// 10-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL_X: [f64; 5] = [
    0.14887433898163122,
    0.4333953941292472,
    0.6794095682990244,
    0.8650633666889845,
    0.9739065285171717,
];
const GL_W: [f64; 5] = [
    0.29552422471475287,
    0.26926671930999635,
    0.21908636251598204,
    0.14945134915058059,
    0.06667134430868814,
];

/// Integral of `f` over `[a, b]` split into `panels` equal panels with a
/// 10-point rule on each; exact for polynomials up to degree 19 per panel.
pub(crate) fn integral<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut acc = 0.0;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            acc += w * (f(mid + half * x) + f(mid - half * x));
        }
        total += acc * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_cosine_exactly_enough() {
        let v = integral(|x| x.cos(), 0.0, PI / 2.0, 4);
        assert!((v - 1.0).abs() < 1e-15, "{v}");
    }

    #[test]
    fn high_degree_polynomial_is_exact_per_panel() {
        // degree 19 on one panel
        let v = integral(|x| x.powi(19), 0.0, 1.0, 1);
        assert!((v - 0.05).abs() < 1e-14, "{v}");
    }

    #[test]
    fn composite_handles_oscillation() {
        let v = integral(|x| (10.0 * x).sin(), 0.0, PI, 32);
        let exact = (1.0 - f64::cos(10.0 * PI)) / 10.0;
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }
}
