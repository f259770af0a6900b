use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::baselines::{
    self, fixed_central_interval, fixed_forward_interval, fixed_gradient_error, mw_gradient_error,
};
use crate::error::Error;
use crate::oracle::{CachedOracle, NoisyObjective, Oracle1d, WithNoiseLevel};
use crate::problems::Problem;
use crate::ratio::TestingRatio;
use crate::scheme::{builtin_scheme, Scheme};
use crate::search::{Interval, IntervalSearch, SearchConfig, SearchStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceKind {
    Forward,
    Central,
}

impl DifferenceKind {
    pub fn scheme(&self) -> Scheme {
        let label = match self {
            DifferenceKind::Forward => "FD",
            DifferenceKind::Central => "CD",
        };
        builtin_scheme(label).expect("builtin scheme")
    }
}

/// How per-coordinate differencing intervals are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// One interval for all coordinates from the curvature of the analytic
    /// Hessian diagonal at the start point.
    Fixed,
    /// `h_i = h · max{1, |x_i|}`, independent of the noise level.
    FixedStep(f64),
    /// Moré–Wild curvature estimate per coordinate (forward differences only).
    MoreWild,
    /// Bisection search on the testing ratio per coordinate.
    Adaptive { warm_start: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub gradient: Vec<f64>,
    pub intervals: Vec<f64>,
    /// A priori bound on `‖g − ∇φ‖`.
    pub eps_g: f64,
    /// Coordinates whose interval search failed and used a fallback interval.
    pub search_fallbacks: usize,
}

#[derive(Debug, Clone)]
enum Rule {
    Fixed {
        h: f64,
        eps_g: f64,
    },
    Step(f64),
    MoreWild,
    Adaptive {
        warm_start: bool,
        ratio: TestingRatio,
    },
}

/// `ε_g = 2 √(Σ_i (‖w‖₁ ε_f / h_i^d)²)`.
pub fn measurement_gradient_error(scheme: &Scheme, intervals: &[f64], eps_f: f64) -> f64 {
    let l1 = crate::scheme::to_f64(&scheme.weights_l1());
    let d = scheme.order() as i32;
    let sum: f64 = intervals
        .iter()
        .map(|h| (l1 * eps_f / h.powi(d)).powi(2))
        .sum();
    2.0 * sum.sqrt()
}

/// Per-coordinate gradient estimation with state carried across iterations.
#[derive(Debug, Clone)]
pub struct GradientEstimator {
    rule: Rule,
    scheme: Scheme,
    eps_f: f64,
    warm: Vec<Option<f64>>,
    last: Vec<Option<f64>>,
    max_iter: usize,
}

impl GradientEstimator {
    /// `eps_f` must already be positive; [`effective_noise`] supplies a floor
    /// for noiseless objectives.
    pub fn new<P: Problem + ?Sized>(
        strategy: Strategy,
        difference: DifferenceKind,
        eps_f: f64,
        problem: &P,
        x0: &[f64],
    ) -> Result<Self, Error> {
        let n = problem.dim();
        let scheme = difference.scheme();
        let rule = match strategy {
            Strategy::Fixed => match difference {
                DifferenceKind::Forward => {
                    let l2 = baselines::hessian_diag_scale(problem, x0)?;
                    Rule::Fixed {
                        h: fixed_forward_interval(l2, eps_f),
                        eps_g: fixed_gradient_error(n, l2, eps_f),
                    }
                }
                DifferenceKind::Central => {
                    let l3 = baselines::third_derivative_scale(problem, x0)?;
                    let h = fixed_central_interval(l3, eps_f);
                    let per_coordinate = scheme.leading_term_bound().evaluate(l3, eps_f, h);
                    Rule::Fixed {
                        h,
                        eps_g: (n as f64).sqrt() * per_coordinate,
                    }
                }
            },
            Strategy::FixedStep(h) => {
                if !(h > 0.0) {
                    return Err(Error::InvalidConfig("fixed step must be positive"));
                }
                Rule::Step(h)
            }
            Strategy::MoreWild => {
                if difference != DifferenceKind::Forward {
                    return Err(Error::InvalidConfig(
                        "the Moré–Wild heuristic only supports forward differences",
                    ));
                }
                Rule::MoreWild
            }
            Strategy::Adaptive { warm_start } => {
                let ratio = match difference {
                    DifferenceKind::Forward => TestingRatio::forward(),
                    DifferenceKind::Central => TestingRatio::with_default_alpha(&scheme, 2.0)?,
                };
                Rule::Adaptive { warm_start, ratio }
            }
        };
        Ok(Self {
            rule,
            scheme,
            eps_f,
            warm: vec![None; n],
            last: vec![None; n],
            max_iter: crate::search::DEFAULT_MAX_ITER,
        })
    }

    pub fn with_search_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn noise_level(&self) -> f64 {
        self.eps_f
    }

    /// Estimates `∇φ(x)` given the already-evaluated `f(x)`.
    pub fn estimate<F: Fn(&[f64]) -> f64>(
        &mut self,
        objective: &mut NoisyObjective<F>,
        x: &[f64],
        fx: f64,
    ) -> Result<GradientEstimate, Error> {
        let n = x.len();
        let mut gradient = vec![0.0; n];
        let mut intervals = vec![0.0; n];
        let mut fallbacks = 0;
        let mut curvatures = Vec::new();
        let eps = self.eps_f;

        for i in 0..n {
            let slice = objective.coordinate_slice(x, i)?;
            match &self.rule {
                Rule::Fixed { h, .. } | Rule::Step(h) => {
                    let h = match self.rule {
                        Rule::Step(_) => h * x[i].abs().max(1.0),
                        _ => *h,
                    };
                    let mut search = IntervalSearch::new(slice, 0.0);
                    search.preseed(0.0, fx);
                    let est = search.finite_difference(&self.scheme, &Interval::new(h));
                    gradient[i] = est.map_or(0.0, |e| e.derivative);
                    intervals[i] = h;
                }
                Rule::MoreWild => {
                    let mut cached = CachedOracle::new(WithNoiseLevel::new(slice, eps));
                    cached.preseed(0.0, fx);
                    let mw = baselines::more_wild(
                        &mut cached,
                        0.0,
                        baselines::DEFAULT_TAU1,
                        baselines::DEFAULT_TAU2,
                    );
                    if mw.mu.is_none() {
                        fallbacks += 1;
                    }
                    let h = mw.h_forward(eps);
                    gradient[i] = (cached.sample(h) - fx) / h;
                    intervals[i] = h;
                    curvatures.push(mw.curvature());
                }
                Rule::Adaptive { warm_start, ratio } => {
                    let mut search = IntervalSearch::new(WithNoiseLevel::new(slice, eps), 0.0);
                    search.preseed(0.0, fx);
                    let mut config = if ratio.base().label() == "FD" {
                        SearchConfig::forward(eps)
                    } else {
                        SearchConfig::for_ratio(ratio, eps)?
                    };
                    config.max_iter = self.max_iter;
                    let default_h0 = config.h0;
                    if *warm_start {
                        if let Some(h) = self.warm[i] {
                            config.h0 = h;
                        }
                    }
                    let interval = match search.run(ratio, &config) {
                        // Noise-dominated: truncation is still negligible at
                        // the returned interval.
                        Ok(r)
                            if r.status == SearchStatus::Converged
                                || r.status == SearchStatus::NoiseDominatedWarning =>
                        {
                            self.last[i] = Some(r.h_dagger);
                            r.interval
                        }
                        _ => {
                            fallbacks += 1;
                            Interval::new(self.last[i].unwrap_or(default_h0))
                        }
                    };
                    self.warm[i] = Some(interval.value());
                    let est = search.finite_difference(&self.scheme, &interval);
                    gradient[i] = est.map_or(0.0, |e| e.derivative);
                    intervals[i] = interval.value();
                }
            }
        }

        let eps_g = match &self.rule {
            Rule::Fixed { eps_g, .. } => *eps_g,
            Rule::MoreWild => mw_gradient_error(&curvatures, eps),
            Rule::Step(_) | Rule::Adaptive { .. } => {
                measurement_gradient_error(&self.scheme, &intervals, eps)
            }
        };
        Ok(GradientEstimate {
            gradient,
            intervals,
            eps_g,
            search_fallbacks: fallbacks,
        })
    }
}

/// `ε_f` itself when positive, else `1e-16 · max{1, |f(x₀)|}`.
pub fn effective_noise(eps_f: f64, f0: f64) -> f64 {
    if eps_f > 0.0 {
        eps_f
    } else {
        1e-16 * f0.abs().max(1.0)
    }
}
