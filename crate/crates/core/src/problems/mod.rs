//! Test functions with analytic derivatives.

mod multivariate;
mod univariate;

pub use multivariate::{multivariate_registry, Problem, ProblemKind, TestProblem};
pub use univariate::{univariate_registry, UnivariateFunction};
