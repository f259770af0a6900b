//! Bisection search for a finite-difference interval whose testing ratio lies
//! in `[r_l, r_u]`.
//!
//! Intervals are carried as `base × multiplier` with an exact rational
//! multiplier. Stencil points are always computed as
//! `t + base · f64(multiplier · s̃)`, so when the search dilates by a factor
//! that matches the ratio's own dilation the evaluation points of successive
//! iterations coincide bit for bit and are served from the cache.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::One;

use crate::error::Error;
use crate::oracle::Oracle1d;
use crate::ratio::{RatioBounds, TestingRatio};
use crate::scheme::{to_f64, Rational, Scheme};

pub const DEFAULT_MAX_ITER: usize = 20;
const NON_FINITE_LIMIT: usize = 3;
/// Multipliers are rebased before their parts grow past this, keeping the
/// conversion to `f64` exact.
const MULTIPLIER_LIMIT: i128 = 1 << 40;

fn checked_mul(a: Rational, b: Rational) -> Option<Rational> {
    let g1 = a.numer().gcd(b.denom());
    let g2 = b.numer().gcd(a.denom());
    let numer = (a.numer() / g1).checked_mul(b.numer() / g2)?;
    let denom = (a.denom() / g2).checked_mul(b.denom() / g1)?;
    Some(Rational::new(numer, denom))
}

/// An interval `h = base · multiplier`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub base: f64,
    pub multiplier: Rational,
}

impl Interval {
    pub fn new(h: f64) -> Self {
        Self {
            base: h,
            multiplier: Rational::one(),
        }
    }

    pub fn value(&self) -> f64 {
        self.base * to_f64(&self.multiplier)
    }

    /// `t + h s`, computed in the canonical operation order.
    pub fn point(&self, t: f64, shift: &Rational) -> f64 {
        match checked_mul(self.multiplier, *shift) {
            Some(m) => t + self.base * to_f64(&m),
            None => t + self.value() * to_f64(shift),
        }
    }

    fn scaled(&self, factor: Rational) -> Self {
        match checked_mul(self.multiplier, factor) {
            Some(m) if m.numer().abs() < MULTIPLIER_LIMIT && *m.denom() < MULTIPLIER_LIMIT => {
                Self {
                    base: self.base,
                    multiplier: m,
                }
            }
            _ => Self::new(self.value() * to_f64(&factor)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub h0: f64,
    pub scale_eta: f64,
    pub bounds: RatioBounds,
    pub max_iter: usize,
    /// Use `√(l u)` instead of `(l + u)/2` once a bracket exists.
    pub geometric_midpoint: bool,
}

impl SearchConfig {
    /// Forward-difference defaults: `h0 = (2/√3)√ε_f`, `η = 4`, band `(1.5, 6)`.
    pub fn forward(eps_f: f64) -> Self {
        Self {
            h0: 2.0 / 3.0f64.sqrt() * eps_f.sqrt(),
            scale_eta: 4.0,
            bounds: RatioBounds::explicit(1.5, 6.0).expect("valid bounds"),
            max_iter: DEFAULT_MAX_ITER,
            geometric_midpoint: false,
        }
    }

    /// Defaults for a generated ratio: `h0` from [`default_h0`], `η = α`,
    /// band from `r*` with `β = 2`.
    pub fn for_ratio(ratio: &TestingRatio, eps_f: f64) -> Result<Self, Error> {
        Ok(Self {
            h0: default_h0(ratio.base(), eps_f),
            scale_eta: to_f64(&ratio.alpha()),
            bounds: RatioBounds::for_ratio(ratio)?,
            max_iter: DEFAULT_MAX_ITER,
            geometric_midpoint: false,
        })
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(Error::InvalidConfig("h0 must be positive and finite"));
        }
        if !(self.scale_eta > 1.0 && self.scale_eta.is_finite()) {
            return Err(Error::InvalidConfig("scaling factor must exceed 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        Ok(())
    }

    fn eta(&self) -> Rational {
        let eta = self.scale_eta;
        if eta.fract() == 0.0 && eta < 1e15 {
            Rational::from_integer(eta as i128)
        } else {
            Rational::approximate_float(eta)
                .filter(|r| r.numer().abs() < MULTIPLIER_LIMIT && *r.denom() < MULTIPLIER_LIMIT)
                .unwrap_or_else(|| Rational::from_integer(2))
        }
    }
}

/// `(d/(q−d) · ‖w‖₁/|c_q| · ε_f)^{1/q}`, the balanced interval when
/// `|φ^(q)| ≈ 1`.
pub fn default_h0(scheme: &Scheme, eps_f: f64) -> f64 {
    scheme.leading_term_bound().optimal_interval(1.0, eps_f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Converged,
    /// The ratio stayed below `r_l` with no upper bracket.
    NoiseDominatedWarning,
    MaxIterFailure,
}

impl SearchStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchStatus::Converged => "Converged",
            SearchStatus::NoiseDominatedWarning => "NoiseDominatedWarning",
            SearchStatus::MaxIterFailure => "MaxIterFailure",
        }
    }
}

/// State after one ratio evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchStep {
    pub h: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub h_dagger: f64,
    /// `h_dagger` in the representation used for stencil points.
    pub interval: Interval,
    pub final_ratio: f64,
    pub iterations: usize,
    pub new_evals: u64,
    pub cached_hits: u64,
    pub status: SearchStatus,
    pub lower: f64,
    /// `f64::INFINITY` when no upper bracket was found.
    pub upper: f64,
    pub trace: Vec<SearchStep>,
}

/// A derivative estimate and the number of fresh evaluations it cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub derivative: f64,
    pub new_evals: u64,
}

/// Runs searches and finite differences at a fixed `t`, sharing one cache.
pub struct IntervalSearch<O> {
    oracle: O,
    t: f64,
    cache: BTreeMap<u64, f64>,
    new_evals: u64,
    cached_hits: u64,
}

impl<O: Oracle1d> IntervalSearch<O> {
    pub fn new(oracle: O, t: f64) -> Self {
        Self {
            oracle,
            t,
            cache: BTreeMap::new(),
            new_evals: 0,
            cached_hits: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn into_oracle(self) -> O {
        self.oracle
    }

    pub fn new_evaluations(&self) -> u64 {
        self.new_evals
    }

    pub fn cached_hits(&self) -> u64 {
        self.cached_hits
    }

    /// Records a known value at abscissa `x` so it is never re-evaluated.
    pub fn preseed(&mut self, x: f64, value: f64) {
        self.cache.insert(x.to_bits(), value);
    }

    /// Cached value at `x`, if any.
    pub fn cached(&self, x: f64) -> Option<f64> {
        self.cache.get(&x.to_bits()).copied()
    }

    pub fn value(&mut self, x: f64) -> f64 {
        if let Some(&v) = self.cache.get(&x.to_bits()) {
            self.cached_hits += 1;
            return v;
        }
        self.new_evals += 1;
        let v = self.oracle.sample(x);
        self.cache.insert(x.to_bits(), v);
        v
    }

    fn ratio_at(&mut self, ratio: &TestingRatio, h: &Interval, eps: f64) -> (f64, bool) {
        let t = self.t;
        let values: Vec<f64> = ratio
            .shifts()
            .iter()
            .map(|s| self.value(h.point(t, s)))
            .collect();
        let finite = values.iter().all(|v| v.is_finite());
        (ratio.evaluate_values(&values, eps), finite)
    }

    /// Runs the bisection search.
    pub fn run(
        &mut self,
        ratio: &TestingRatio,
        config: &SearchConfig,
    ) -> Result<SearchResult, Error> {
        let eps = self.oracle.noise_level();
        if !(eps > 0.0) {
            return Err(Error::ZeroNoiseLevel);
        }
        config.validate()?;
        let eta = config.eta();
        let shrink = eta.recip();
        let (start_new, start_hits) = (self.new_evals, self.cached_hits);

        let mut h = Interval::new(config.h0);
        let mut lower: Option<Interval> = None;
        let mut upper: Option<Interval> = None;
        let mut last_ratio = f64::NAN;
        let mut non_finite = 0;
        let mut trace = Vec::new();
        let bounds = config.bounds;

        let bracket = |lower: &Option<Interval>, upper: &Option<Interval>| {
            (
                lower.map_or(0.0, |l| l.value()),
                upper.map_or(f64::INFINITY, |u| u.value()),
            )
        };

        for iteration in 1..=config.max_iter {
            let (r, finite) = self.ratio_at(ratio, &h, eps);
            last_ratio = r;
            if finite {
                non_finite = 0;
            } else {
                non_finite += 1;
                if non_finite >= NON_FINITE_LIMIT {
                    return Err(Error::NonFiniteFunctionValue(h.value()));
                }
            }

            if finite && bounds.contains(r) {
                let (l, u) = bracket(&lower, &upper);
                trace.push(SearchStep {
                    h: h.value(),
                    ratio: r,
                    lower: l,
                    upper: u,
                });
                return Ok(SearchResult {
                    h_dagger: h.value(),
                    interval: h,
                    final_ratio: r,
                    iterations: iteration,
                    new_evals: self.new_evals - start_new,
                    cached_hits: self.cached_hits - start_hits,
                    status: SearchStatus::Converged,
                    lower: l,
                    upper: u,
                    trace,
                });
            }
            if finite && r < bounds.lower() {
                lower = Some(h);
            } else {
                upper = Some(h);
            }
            let (l, u) = bracket(&lower, &upper);
            trace.push(SearchStep {
                h: h.value(),
                ratio: r,
                lower: l,
                upper: u,
            });

            if iteration == config.max_iter {
                break;
            }
            h = match (lower, upper) {
                (_, None) => h.scaled(eta),
                (None, Some(_)) => h.scaled(shrink),
                (Some(_), Some(_)) => Interval::new(midpoint(l, u, config.geometric_midpoint)),
            };
        }

        let (l, u) = bracket(&lower, &upper);
        let (status, interval) = match (lower, upper) {
            (Some(l_int), None) => (SearchStatus::NoiseDominatedWarning, l_int),
            _ => (
                SearchStatus::MaxIterFailure,
                Interval::new(midpoint(l, u, config.geometric_midpoint && l > 0.0)),
            ),
        };
        Ok(SearchResult {
            h_dagger: interval.value(),
            interval,
            final_ratio: last_ratio,
            iterations: config.max_iter,
            new_evals: self.new_evals - start_new,
            cached_hits: self.cached_hits - start_hits,
            status,
            lower: l,
            upper: u,
            trace,
        })
    }

    /// Applies `scheme` at interval `h`, reusing cached stencil values.
    pub fn finite_difference(&mut self, scheme: &Scheme, h: &Interval) -> Result<Estimate, Error> {
        let before = self.new_evals;
        let t = self.t;
        let values: Vec<f64> = scheme
            .shifts()
            .iter()
            .map(|s| self.value(h.point(t, s)))
            .collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFunctionValue(
                h.point(t, &scheme.shifts()[bad]),
            ));
        }
        Ok(Estimate {
            derivative: scheme.apply(&values, h.value()),
            new_evals: self.new_evals - before,
        })
    }
}

fn midpoint(l: f64, u: f64, geometric: bool) -> f64 {
    if geometric {
        (l * u).sqrt()
    } else {
        (l + u) / 2.0
    }
}

/// Runs one search on a fresh cache.
pub fn estimate_interval<O: Oracle1d>(
    oracle: O,
    t: f64,
    ratio: &TestingRatio,
    config: &SearchConfig,
) -> Result<SearchResult, Error> {
    IntervalSearch::new(oracle, t).run(ratio, config)
}

/// The forward-difference search with its fixed defaults.
pub fn forward_interval<O: Oracle1d>(oracle: O, t: f64) -> Result<SearchResult, Error> {
    let config = SearchConfig::forward(oracle.noise_level());
    estimate_interval(oracle, t, &TestingRatio::forward(), &config)
}

/// Applies `scheme` at `(t, h)` without a cache.
pub fn finite_difference_at<O: Oracle1d>(
    oracle: O,
    t: f64,
    scheme: &Scheme,
    h: f64,
) -> Result<Estimate, Error> {
    IntervalSearch::new(oracle, t).finite_difference(scheme, &Interval::new(h))
}
