use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::lbfgs::norm;
use crate::oracle::{NoisyObjective, WithNoiseLevel};
use crate::ratio::TestingRatio;
use crate::scheme::builtin_scheme;
use crate::search::{Interval, IntervalSearch, SearchConfig, SearchStatus};

/// Which sufficient-decrease test accepted a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptanceCase {
    /// Armijo on the first trial.
    Standard,
    /// Armijo relaxed by `2ε_f` on later trials.
    Relaxed,
    /// Unreliable gradient, strict decrease only.
    SimpleDecrease,
}

impl AcceptanceCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            AcceptanceCase::Standard => "standard",
            AcceptanceCase::Relaxed => "relaxed",
            AcceptanceCase::SimpleDecrease => "simple_decrease",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Step {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
    pub case: AcceptanceCase,
    pub wolfe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Accepted(Step),
    /// The trial cap or budget was hit; the step is the last Armijo trial,
    /// else the best simple decrease seen.
    Fallback(Step),
    Failed,
}

pub(crate) struct Params {
    pub c1: f64,
    pub c2: f64,
    pub max_trials: usize,
    pub eps_f: f64,
    pub eps_g: f64,
    pub budget: u64,
}

/// Carries the warm-start interval for directional derivatives.
#[derive(Debug, Clone, Default)]
pub(crate) struct LineSearch {
    warm: Option<f64>,
}

impl LineSearch {
    fn directional_derivative<F: Fn(&[f64]) -> f64>(
        &mut self,
        objective: &mut NoisyObjective<F>,
        x: &[f64],
        fx: f64,
        p: &[f64],
        eps: f64,
    ) -> Option<f64> {
        let slice = objective.directional_slice(x, p).ok()?;
        let mut search = IntervalSearch::new(WithNoiseLevel::new(slice, eps), 0.0);
        search.preseed(0.0, fx);
        let mut config = SearchConfig::forward(eps);
        if let Some(h) = self.warm {
            config.h0 = h;
        }
        let interval = match search.run(&TestingRatio::forward(), &config) {
            Ok(r) if r.status == SearchStatus::Converged => {
                self.warm = Some(r.h_dagger);
                r.interval
            }
            _ => {
                self.warm = None;
                Interval::new(2.0 * eps.sqrt() / norm(p))
            }
        };
        let fd = builtin_scheme("FD").expect("builtin scheme");
        search
            .finite_difference(&fd, &interval)
            .ok()
            .map(|e| e.derivative)
    }

    pub fn run<F: Fn(&[f64]) -> f64>(
        &mut self,
        objective: &mut NoisyObjective<F>,
        x: &[f64],
        f0: f64,
        p: &[f64],
        gp: f64,
        params: &Params,
    ) -> Outcome {
        let reliable = gp < -params.eps_g * norm(p);
        let (mut lo, mut hi, mut alpha) = (0.0, f64::INFINITY, 1.0);
        let mut last_armijo: Option<Step> = None;
        let mut best_decrease: Option<Step> = None;

        for j in 0..params.max_trials {
            if objective.evaluations() >= params.budget {
                break;
            }
            let xt: Vec<f64> = x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect();
            let ft = objective.value(&xt);
            let (case, armijo) = if !ft.is_finite() {
                (AcceptanceCase::SimpleDecrease, false)
            } else if !reliable {
                (AcceptanceCase::SimpleDecrease, ft < f0)
            } else if j == 0 {
                (AcceptanceCase::Standard, ft <= f0 + params.c1 * alpha * gp)
            } else {
                (
                    AcceptanceCase::Relaxed,
                    ft <= f0 + params.c1 * alpha * gp + 2.0 * params.eps_f,
                )
            };
            let step = Step {
                alpha,
                x: xt,
                f: ft,
                case,
                wolfe: false,
            };
            if ft.is_finite() && ft < f0 && best_decrease.as_ref().is_none_or(|b| ft < b.f) {
                best_decrease = Some(step.clone());
            }
            if !armijo {
                hi = alpha;
                alpha = (lo + hi) / 2.0;
                continue;
            }
            if !reliable {
                return Outcome::Accepted(step);
            }
            let curvature_ok = self
                .directional_derivative(objective, &step.x, ft, p, params.eps_f)
                .is_some_and(|dphi| dphi >= params.c2 * gp);
            if curvature_ok {
                return Outcome::Accepted(Step {
                    wolfe: true,
                    ..step
                });
            }
            last_armijo = Some(step);
            lo = alpha;
            alpha = if hi.is_finite() {
                (lo + hi) / 2.0
            } else {
                2.0 * alpha
            };
        }

        match (last_armijo, best_decrease) {
            (Some(step), _) => Outcome::Fallback(step),
            (None, Some(step)) => Outcome::Fallback(Step {
                case: AcceptanceCase::SimpleDecrease,
                ..step
            }),
            (None, None) => Outcome::Failed,
        }
    }
}
