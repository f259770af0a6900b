//! Reference interval rules: the Moré–Wild second-derivative heuristic and
//! fixed intervals from known curvature.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::oracle::Oracle1d;
use crate::problems::Problem;

/// Floor applied to curvature scales.
pub const CURVATURE_FLOOR: f64 = 0.1;
pub const DEFAULT_TAU1: f64 = 100.0;
pub const DEFAULT_TAU2: f64 = 0.1;

/// Outcome of the Moré–Wild heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwResult {
    /// Estimate of `|φ″(t)|`, or `None` on failure.
    pub mu: Option<f64>,
    /// Number of trial steps examined (1 to 3).
    pub trials: u32,
    pub evaluations: u64,
}

impl MwResult {
    /// `8^{1/4} √(ε_f/μ)`, the interval that minimizes the mean-squared error
    /// of forward differences given the estimate.
    pub fn h_more_wild(&self, eps_f: f64) -> Option<f64> {
        self.mu.map(|mu| 8f64.powf(0.25) * (eps_f / mu).sqrt())
    }

    /// `L₂ = max{0.1, μ}`, or the floor on failure.
    pub fn curvature(&self) -> f64 {
        self.mu
            .map_or(CURVATURE_FLOOR, |mu| mu.max(CURVATURE_FLOOR))
    }

    /// `2√(ε_f/L₂)` with the floored curvature.
    pub fn h_forward(&self, eps_f: f64) -> f64 {
        fixed_forward_interval(self.curvature(), eps_f)
    }
}

struct Trial {
    mu: f64,
    accepted: bool,
}

fn trial<O: Oracle1d + ?Sized>(
    oracle: &mut O,
    t: f64,
    f0: f64,
    h: f64,
    eps_f: f64,
    tau1: f64,
    tau2: f64,
) -> Trial {
    let (fp, fm) = (oracle.sample(t + h), oracle.sample(t - h));
    let delta = fp - 2.0 * f0 + fm;
    let noise_ok = delta.abs() >= tau1 * eps_f;
    let side_ok = |fs: f64| (fs - f0).abs() <= tau2 * f0.abs().max(fs.abs());
    Trial {
        mu: (delta / (h * h)).abs(),
        accepted: noise_ok && side_ok(fp) && side_ok(fm),
    }
}

/// The two-trial Moré–Wild estimate of `|φ″(t)|`.
pub fn more_wild<O: Oracle1d + ?Sized>(oracle: &mut O, t: f64, tau1: f64, tau2: f64) -> MwResult {
    let eps = oracle.noise_level();
    let start = oracle.evaluations();
    let f0 = oracle.sample(t);
    let done = |oracle: &O, mu: Option<f64>, trials| MwResult {
        mu,
        trials,
        evaluations: oracle.evaluations() - start,
    };

    let h1 = eps.powf(0.25);
    let first = trial(oracle, t, f0, h1, eps, tau1, tau2);
    if first.accepted {
        return done(oracle, Some(first.mu), 1);
    }
    if !(first.mu > 0.0 && first.mu.is_finite()) {
        return done(oracle, None, 1);
    }
    let h2 = (eps / first.mu).powf(0.25);
    let second = trial(oracle, t, f0, h2, eps, tau1, tau2);
    if second.accepted {
        return done(oracle, Some(second.mu), 2);
    }
    if (first.mu - second.mu).abs() <= 0.5 * second.mu {
        return done(oracle, Some(second.mu), 3);
    }
    done(oracle, None, 3)
}

/// `h = 2√(ε_f / max{0.1, L₂})`.
pub fn fixed_forward_interval(l2: f64, eps_f: f64) -> f64 {
    2.0 * (eps_f / l2.max(CURVATURE_FLOOR)).sqrt()
}

/// `h = ∛(3ε_f / max{0.1, L₃})`.
pub fn fixed_central_interval(l3: f64, eps_f: f64) -> f64 {
    (3.0 * eps_f / l3.max(CURVATURE_FLOOR)).cbrt()
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// `L₂ = max{0.1, RMS(diag ∇²φ(x₀))}`.
pub fn hessian_diag_scale<P: Problem + ?Sized>(problem: &P, x0: &[f64]) -> Result<f64, Error> {
    Ok(rms(&problem.hessian_diagonal(x0)?).max(CURVATURE_FLOOR))
}

/// `L₃ = max{0.1, RMS_i |∂_i H_ii|}`, with the third derivatives taken by
/// forward differences of the Hessian diagonal at step
/// `max{1, |x₀ᵢ|}·√ε_M`.
pub fn third_derivative_scale<P: Problem + ?Sized>(problem: &P, x0: &[f64]) -> Result<f64, Error> {
    let base = problem.hessian_diagonal(x0)?;
    let mut x = x0.to_vec();
    let mut third = Vec::with_capacity(x0.len());
    for i in 0..x0.len() {
        let h = x0[i].abs().max(1.0) * f64::EPSILON.sqrt();
        x[i] = x0[i] + h;
        let shifted = problem.hessian_diagonal(&x)?;
        third.push((shifted[i] - base[i]) / (x[i] - x0[i]));
        x[i] = x0[i];
    }
    Ok(rms(&third).max(CURVATURE_FLOOR))
}

/// `ε_g = 2√(n L₂ ε_f)`.
pub fn fixed_gradient_error(n: usize, l2: f64, eps_f: f64) -> f64 {
    2.0 * (n as f64 * l2 * eps_f).sqrt()
}

/// `ε_g = 2√(ε_f Σ L₂,ᵢ)`.
pub fn mw_gradient_error(curvatures: &[f64], eps_f: f64) -> f64 {
    2.0 * (eps_f * curvatures.iter().sum::<f64>()).sqrt()
}
