//! Adaptive finite-difference interval estimation for noisy black-box functions.
//!
//! The central routine is a bisection search on a *testing ratio*: a
//! noise-normalized stencil whose value estimates how the truncation error of
//! a finite-difference scheme compares with its measurement error. Driving the
//! ratio into a fixed band `[r_l, r_u]` yields an interval close to the one
//! that minimizes the worst-case derivative error, without ever estimating the
//! higher derivative that the textbook formula needs.
//!
//! Crate layout:
//!
//! - [`scheme`]: stencils for `d`-th derivatives, exact weight derivation and
//!   analytic error bounds.
//! - [`ratio`]: testing ratios generated from a scheme, the optimal ratio and
//!   the acceptance band.
//! - [`search`]: the bisection search with point reuse and status reporting.
//! - [`baselines`]: the Moré–Wild heuristic and fixed-interval formulas.
//! - [`oracle`]: noisy function wrappers with frozen, seed-deterministic noise.
//! - [`problems`]: univariate and multivariate test functions with analytic
//!   derivatives.
//! - [`optimizer`]: finite-difference L-BFGS with a noise-relaxed line search.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
mod error;
pub mod optimizer;
pub mod oracle;
pub mod problems;
pub mod ratio;
pub mod scheme;
pub mod search;

pub use error::Error;
pub use oracle::{NoiseKind, NoisyObjective, NoisyOracle, Oracle1d};
pub use ratio::{RatioBounds, TestingRatio};
pub use scheme::{Rational, Scheme};
pub use search::{IntervalSearch, SearchConfig, SearchResult, SearchStatus};
