//! Deterministic error analysis on noiseless functions.

use fdstep::problems::UnivariateFunction;
use fdstep::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("derivative of order {0} vanishes at t; relative error is undefined")]
    ZeroDerivative(u32),
}

fn weights_l1(scheme: &Scheme) -> f64 {
    scheme.weight_values().iter().map(|w| w.abs()).sum()
}

/// `|D_S φ(t; h) − φ^(d)(t)| + ‖w‖₁ ε_f / h^d`.
pub fn worst_case_absolute_error(
    f: &UnivariateFunction,
    t: f64,
    scheme: &Scheme,
    eps_f: f64,
    h: f64,
) -> f64 {
    let d = scheme.order();
    let estimate = scheme.apply_fn(|x| f.value(x), t, h);
    (estimate - f.derivative(d, t)).abs() + weights_l1(scheme) * eps_f / h.powi(d as i32)
}

/// `δ_S(h)`, the worst-case error relative to `|φ^(d)(t)|`.
pub fn worst_case_relative_error(
    f: &UnivariateFunction,
    t: f64,
    scheme: &Scheme,
    eps_f: f64,
    h: f64,
) -> Result<f64, AnalysisError> {
    let d = scheme.order();
    let exact = f.derivative(d, t).abs();
    if exact == 0.0 {
        return Err(AnalysisError::ZeroDerivative(d));
    }
    Ok(worst_case_absolute_error(f, t, scheme, eps_f, h) / exact)
}

/// `n` points log-spaced over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

pub const GRID_LO: f64 = 1e-10;
pub const GRID_HI: f64 = 1e4;
pub const GRID_POINTS: usize = 200;

pub fn default_grid() -> Vec<f64> {
    log_grid(GRID_LO, GRID_HI, GRID_POINTS)
}

/// Golden-section search for a minimizer of `g` on `[a, b]`.
pub fn golden_section(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..iterations {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    (a + b) / 2.0
}

/// Minimum of `δ_S` over the default grid.
pub fn grid_minimum(
    f: &UnivariateFunction,
    t: f64,
    scheme: &Scheme,
    eps_f: f64,
) -> Result<(f64, f64), AnalysisError> {
    let mut best = (f64::NAN, f64::INFINITY);
    for h in default_grid() {
        let delta = worst_case_relative_error(f, t, scheme, eps_f, h)?;
        if delta < best.1 {
            best = (h, delta);
        }
    }
    Ok(best)
}

/// The better of the grid minimizer and a 200-step golden section on
/// `log₁₀ h ∈ [−10, 4]`.
pub fn reference_optimal_h(
    f: &UnivariateFunction,
    t: f64,
    scheme: &Scheme,
    eps_f: f64,
) -> Result<f64, AnalysisError> {
    let (h_grid, delta_grid) = grid_minimum(f, t, scheme, eps_f)?;
    let delta = |log_h: f64| {
        worst_case_relative_error(f, t, scheme, eps_f, 10f64.powf(log_h)).unwrap_or(f64::INFINITY)
    };
    let log_h = golden_section(delta, GRID_LO.log10(), GRID_HI.log10(), 200);
    let h_golden = 10f64.powf(log_h);
    if delta(log_h) < delta_grid {
        Ok(h_golden)
    } else {
        Ok(h_grid)
    }
}
