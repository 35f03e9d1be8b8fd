//! Adaptive Simpson quadrature and Gaussian box probabilities.
//!
//! These integrators are the independent numerical truth that the
//! closed-form brackets in [`crate::analytics`] are validated against;
//! they never call the functions they check.

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_step(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P[|Z| <= z] for Z ~ N(0,1), by quadrature.
pub fn normal_abs_box(z: f64) -> f64 {
    assert!(z >= 0.0);
    2.0 * adaptive_simpson(&normal_pdf, 0.0, z, 1e-16 * (1.0 + z))
}

/// P[|Z| <= z1, |Z_rho| <= z2] for a correlated standard normal pair,
/// by nested quadrature of the bivariate density.
pub fn bivariate_abs_box(z1: f64, z2: f64, rho: f64) -> f64 {
    assert!(z1 >= 0.0 && z2 >= 0.0 && (0.0..1.0).contains(&rho));
    let det = 1.0 - rho * rho;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * det.sqrt());
    let scale = (z1 * z2 * norm).max(1e-300);
    let outer = |x: f64| {
        let inner =
            |y: f64| (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det)).exp();
        adaptive_simpson(&inner, -z2, z2, 1e-13 * z2.max(1e-300))
    };
    norm * adaptive_simpson(&outer, -z1, z1, 1e-11 * scale / norm.max(1.0))
}
