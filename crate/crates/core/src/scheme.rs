//! Finite-difference schemes `S = (w, s)` for `d`-th order derivatives.
//!
//! A scheme approximates `φ^(d)(t)` by `Σ w_j φ(t + h s_j) / h^d`. Weights are
//! solved exactly over the rationals from the Vandermonde moment conditions,
//! and the remainder order `q` together with its constant
//! `c_q = (1/q!) Σ w_j s_j^q` is discovered by scanning moments.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

/// Exact rational used for shifts, weights and moment constants.
pub type Rational = num_rational::Ratio<i128>;

/// How far past the number of points the remainder scan looks.
const REMAINDER_SCAN: u32 = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("derivative order must be at least 1")]
    ZeroOrder,
    #[error("{points} points cannot resolve a derivative of order {order}")]
    DegreeTooLow { order: u32, points: usize },
    #[error("stencil shifts repeat; the Vandermonde system is singular")]
    SingularSystem,
    #[error("got {shifts} shifts but {weights} weights")]
    LengthMismatch { shifts: usize, weights: usize },
    #[error("weights violate the moment condition of order {0}")]
    InvalidWeights(u32),
    #[error("no nonzero remainder constant up to order {0}")]
    NoRemainder(u32),
    #[error("node index {index} does not identify t among {points} shifts")]
    IndexOutOfRange { index: usize, points: usize },
    #[error("floating-point weight solve left residual {0:e}")]
    IllConditioned(f64),
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

fn rational_pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= *base;
    }
    acc
}

/// `(1/l!) Σ w_j s_j^l`.
pub fn moment(shifts: &[Rational], weights: &[Rational], l: u32) -> Rational {
    let sum = shifts
        .iter()
        .zip(weights)
        .fold(Rational::zero(), |acc, (s, w)| {
            acc + *w * rational_pow(s, l)
        });
    sum / Rational::from_integer(factorial(l))
}

/// A validated finite-difference stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    label: String,
    order: u32,
    shifts: Vec<Rational>,
    weights: Vec<Rational>,
    remainder_order: u32,
    remainder_constant: Rational,
    shift_values: Vec<f64>,
    weight_values: Vec<f64>,
}

impl Scheme {
    /// Builds a scheme from explicit weights, checking the moment conditions
    /// and discovering `q` and `c_q`. Pairs are sorted by shift.
    pub fn new(
        label: impl Into<String>,
        order: u32,
        shifts: Vec<Rational>,
        weights: Vec<Rational>,
    ) -> Result<Self, SchemeError> {
        if order == 0 {
            return Err(SchemeError::ZeroOrder);
        }
        if shifts.len() != weights.len() {
            return Err(SchemeError::LengthMismatch {
                shifts: shifts.len(),
                weights: weights.len(),
            });
        }
        let mut pairs: Vec<(Rational, Rational)> = shifts.into_iter().zip(weights).collect();
        pairs.sort_by_key(|a| a.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SchemeError::SingularSystem);
        }
        let (shifts, weights): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        if shifts.len() < order as usize + 1 {
            return Err(SchemeError::DegreeTooLow {
                order,
                points: shifts.len(),
            });
        }

        for l in 0..=order {
            let expected = if l == order {
                Rational::one()
            } else {
                Rational::zero()
            };
            if moment(&shifts, &weights, l) != expected {
                return Err(SchemeError::InvalidWeights(l));
            }
        }
        let limit = shifts.len() as u32 + REMAINDER_SCAN;
        let (remainder_order, remainder_constant) = (order + 1..=limit)
            .map(|l| (l, moment(&shifts, &weights, l)))
            .find(|(_, c)| !c.is_zero())
            .ok_or(SchemeError::NoRemainder(limit))?;

        Ok(Self {
            label: label.into(),
            order,
            shift_values: shifts.iter().map(to_f64).collect(),
            weight_values: weights.iter().map(to_f64).collect(),
            shifts,
            weights,
            remainder_order,
            remainder_constant,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derivative order `d`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn shifts(&self) -> &[Rational] {
        &self.shifts
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Remainder order `q`.
    pub fn remainder_order(&self) -> u32 {
        self.remainder_order
    }

    /// Leading remainder constant `c_q`.
    pub fn remainder_constant(&self) -> Rational {
        self.remainder_constant
    }

    pub fn shift_values(&self) -> &[f64] {
        &self.shift_values
    }

    pub fn weight_values(&self) -> &[f64] {
        &self.weight_values
    }

    pub fn points(&self) -> usize {
        self.shifts.len()
    }

    /// `‖w‖₁`, exact.
    pub fn weights_l1(&self) -> Rational {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `‖w‖₂²`, exact.
    pub fn weights_l2_squared(&self) -> Rational {
        self.weights.iter().map(|w| *w * *w).sum()
    }

    /// Abscissae `t + h s_j` in stencil order.
    pub fn stencil_points(&self, t: f64, h: f64) -> impl Iterator<Item = f64> + '_ {
        self.shift_values.iter().map(move |s| t + h * s)
    }

    /// `Σ w_j values_j / h^d`.
    ///
    /// Panics if `values` does not hold one entry per stencil point.
    pub fn apply(&self, values: &[f64], h: f64) -> f64 {
        assert_eq!(values.len(), self.points(), "one value per stencil point");
        let sum: f64 = self
            .weight_values
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum();
        sum / h.powi(self.order as i32)
    }

    /// Applies the scheme to a function directly.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        let values: Vec<f64> = self.stencil_points(t, h).map(f).collect();
        self.apply(&values, h)
    }

    fn truncation_power(&self) -> i32 {
        (self.remainder_order - self.order) as i32
    }

    /// Worst-case bound from the Lagrange-remainder triangle inequality:
    /// `(L_q h^{q-d} / q!) Σ|w_j s_j^q| + ‖w‖₁ ε_f / h^d`.
    pub fn worst_case_bound(&self) -> ErrorBound {
        let q = self.remainder_order;
        let spread: Rational = self
            .shifts
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| (*w * rational_pow(s, q)).abs())
            .sum();
        ErrorBound {
            kind: BoundKind::DeterministicWorstCase,
            truncation_coefficient: to_f64(&(spread / Rational::from_integer(factorial(q)))),
            measurement_coefficient: to_f64(&self.weights_l1()),
            truncation_exponent: self.truncation_power(),
            measurement_exponent: self.order as i32,
        }
    }

    /// Bound with the leading Taylor constant: `|c_q| L_q h^{q-d} + ‖w‖₁ ε_f / h^d`.
    pub fn leading_term_bound(&self) -> ErrorBound {
        ErrorBound {
            kind: BoundKind::DeterministicLeadingTerm,
            truncation_coefficient: to_f64(&self.remainder_constant.abs()),
            measurement_coefficient: to_f64(&self.weights_l1()),
            truncation_exponent: self.truncation_power(),
            measurement_exponent: self.order as i32,
        }
    }

    /// Mean-squared-error bound for zero-mean noise with variance `σ_f²`:
    /// `c_q² L_q² h^{2(q-d)} + ‖w‖₂² σ_f² / h^{2d}`.
    pub fn mse_bound(&self) -> ErrorBound {
        let c = self.remainder_constant;
        ErrorBound {
            kind: BoundKind::StochasticMse,
            truncation_coefficient: to_f64(&(c * c)),
            measurement_coefficient: to_f64(&self.weights_l2_squared()),
            truncation_exponent: 2 * self.truncation_power(),
            measurement_exponent: 2 * self.order as i32,
        }
    }

    /// Interpolation bound for first-derivative schemes evaluated at the node
    /// `t = t + h s_index` (requires `s_index = 0`):
    /// `(L_m h^{m-1} / m!) |Π_{j≠i} s_j| + ‖w‖₁ ε_f / h`.
    pub fn lagrange_bound(&self, index: usize) -> Result<ErrorBound, SchemeError> {
        let m = self.points();
        if self.order != 1 || index >= m || !self.shifts[index].is_zero() {
            return Err(SchemeError::IndexOutOfRange { index, points: m });
        }
        let product: Rational = self
            .shifts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != index)
            .map(|(_, s)| *s)
            .product();
        Ok(ErrorBound {
            kind: BoundKind::LagrangeFirstDerivative,
            truncation_coefficient: to_f64(
                &(product.abs() / Rational::from_integer(factorial(m as u32))),
            ),
            measurement_coefficient: to_f64(&self.weights_l1()),
            truncation_exponent: m as i32 - 1,
            measurement_exponent: 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    DeterministicWorstCase,
    DeterministicLeadingTerm,
    StochasticMse,
    LagrangeFirstDerivative,
}

/// Two-term error model `a·L·h^p + b·ε·h^{-k}`.
///
/// For [`BoundKind::StochasticMse`] the derivative bound and noise enter
/// squared, so `evaluate` returns the mean-squared error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    pub kind: BoundKind,
    pub truncation_coefficient: f64,
    pub measurement_coefficient: f64,
    pub truncation_exponent: i32,
    pub measurement_exponent: i32,
}

impl ErrorBound {
    fn scaled(&self, derivative_bound: f64, noise: f64) -> (f64, f64) {
        match self.kind {
            BoundKind::StochasticMse => (
                self.truncation_coefficient * derivative_bound * derivative_bound,
                self.measurement_coefficient * noise * noise,
            ),
            _ => (
                self.truncation_coefficient * derivative_bound,
                self.measurement_coefficient * noise,
            ),
        }
    }

    pub fn truncation(&self, derivative_bound: f64, h: f64) -> f64 {
        self.scaled(derivative_bound, 0.0).0 * h.powi(self.truncation_exponent)
    }

    pub fn measurement(&self, noise: f64, h: f64) -> f64 {
        self.scaled(0.0, noise).1 / h.powi(self.measurement_exponent)
    }

    pub fn evaluate(&self, derivative_bound: f64, noise: f64, h: f64) -> f64 {
        self.truncation(derivative_bound, h) + self.measurement(noise, h)
    }

    /// Closed-form minimizer `h = (k b / (p a))^{1/(p+k)}`.
    pub fn optimal_interval(&self, derivative_bound: f64, noise: f64) -> f64 {
        let (a, b) = self.scaled(derivative_bound, noise);
        let p = self.truncation_exponent as f64;
        let k = self.measurement_exponent as f64;
        (k * b / (p * a)).powf(1.0 / (p + k))
    }

    pub fn optimal_error(&self, derivative_bound: f64, noise: f64) -> f64 {
        let h = self.optimal_interval(derivative_bound, noise);
        self.evaluate(derivative_bound, noise, h)
    }
}

/// Solves `V(s)ᵀ w = d!·e_d` exactly and returns the resulting scheme.
pub fn derive_weights(order: u32, shifts: &[Rational]) -> Result<Scheme, SchemeError> {
    if order == 0 {
        return Err(SchemeError::ZeroOrder);
    }
    let m = shifts.len();
    if m < order as usize + 1 {
        return Err(SchemeError::DegreeTooLow { order, points: m });
    }
    let mut sorted = shifts.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(SchemeError::SingularSystem);
    }

    // Row l: Σ_j s_j^l w_j = d! [l = d], augmented with the right-hand side.
    let mut rows: Vec<Vec<Rational>> = (0..m)
        .map(|l| {
            let mut row: Vec<Rational> = sorted.iter().map(|s| rational_pow(s, l as u32)).collect();
            row.push(if l == order as usize {
                Rational::from_integer(factorial(order))
            } else {
                Rational::zero()
            });
            row
        })
        .collect();

    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !rows[r][col].is_zero())
            .ok_or(SchemeError::SingularSystem)?;
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for v in rows[col].iter_mut() {
            *v *= inv;
        }
        for r in 0..m {
            if r != col && !rows[r][col].is_zero() {
                let factor = rows[r][col];
                for c in col..=m {
                    let delta = factor * rows[col][c];
                    rows[r][c] -= delta;
                }
            }
        }
    }
    let weights: Vec<Rational> = rows.iter().map(|row| row[m]).collect();

    let label = builtin_schemes()
        .into_iter()
        .find(|s| s.order == order && s.shifts == sorted)
        .map(|s| s.label)
        .unwrap_or_else(|| derived_label(order, &sorted));
    Scheme::new(label, order, sorted, weights)
}

fn derived_label(order: u32, shifts: &[Rational]) -> String {
    let parts: Vec<String> = shifts.iter().map(|s| s.to_string()).collect();
    format!("D{}[{}]", order, parts.join(","))
}

/// Floating-point weight solve on the Vandermonde system, with shifts scaled
/// to unit magnitude first. Fails if the relative residual exceeds `1e-12`.
pub fn derive_weights_float(order: u32, shifts: &[f64]) -> Result<Vec<f64>, SchemeError> {
    if order == 0 {
        return Err(SchemeError::ZeroOrder);
    }
    let m = shifts.len();
    if m < order as usize + 1 {
        return Err(SchemeError::DegreeTooLow { order, points: m });
    }
    let scale = shifts.iter().fold(0.0_f64, |acc, s| acc.max(s.abs()));
    if scale == 0.0 {
        return Err(SchemeError::SingularSystem);
    }
    let scaled: Vec<f64> = shifts.iter().map(|s| s / scale).collect();
    let d_fact = factorial(order) as f64;
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|l| {
            let mut row: Vec<f64> = scaled.iter().map(|s| s.powi(l as i32)).collect();
            row.push(if l == order as usize { d_fact } else { 0.0 });
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < f64::MIN_POSITIVE {
            return Err(SchemeError::SingularSystem);
        }
        a.swap(col, pivot);
        for r in col + 1..m {
            let factor = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= factor * a[col][c];
            }
        }
    }
    let mut w = alloc::vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|c| a[r][c] * w[c]).sum();
        w[r] = (a[r][m] - tail) / a[r][r];
    }

    let residual = (0..m)
        .map(|l| {
            let lhs: f64 = scaled
                .iter()
                .zip(&w)
                .map(|(s, wj)| wj * s.powi(l as i32))
                .sum();
            let rhs = if l == order as usize { d_fact } else { 0.0 };
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
        / d_fact;
    if residual > 1e-12 {
        return Err(SchemeError::IllConditioned(residual));
    }
    let unscale = scale.powi(order as i32);
    Ok(w.into_iter().map(|wj| wj / unscale).collect())
}

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn ints(values: &[i128]) -> Vec<Rational> {
    values.iter().map(|&v| Rational::from_integer(v)).collect()
}

/// The six stencils used throughout the experiments.
pub fn builtin_schemes() -> Vec<Scheme> {
    let table = [
        ("FD", 1, ints(&[0, 1]), ints(&[-1, 1])),
        ("CD", 1, ints(&[-1, 1]), alloc::vec![r(-1, 2), r(1, 2)]),
        (
            "FD_3P",
            1,
            ints(&[0, 1, 2]),
            alloc::vec![r(-3, 2), r(2, 1), r(-1, 2)],
        ),
        (
            "FD_4P",
            1,
            ints(&[0, 1, 2, 3]),
            alloc::vec![r(-11, 6), r(3, 1), r(-3, 2), r(1, 3)],
        ),
        (
            "CD_4P",
            1,
            ints(&[-2, -1, 1, 2]),
            alloc::vec![r(1, 12), r(-2, 3), r(2, 3), r(-1, 12)],
        ),
        ("L2_CD", 2, ints(&[-1, 0, 1]), ints(&[1, -2, 1])),
    ];
    table
        .into_iter()
        .map(|(label, d, s, w)| Scheme::new(label, d, s, w).expect("builtin scheme is valid"))
        .collect()
}

/// Looks up a builtin scheme by label, case-insensitively.
pub fn builtin_scheme(label: &str) -> Option<Scheme> {
    builtin_schemes()
        .into_iter()
        .find(|s| s.label.eq_ignore_ascii_case(label))
}

/// `(L_q h^{q-d} / q!) Σ|w_j s_j^q| + ‖w‖₁ ε_f / h^d`.
pub fn deterministic_error_bound(scheme: &Scheme, l_q: f64, eps_f: f64, h: f64) -> f64 {
    scheme.worst_case_bound().evaluate(l_q, eps_f, h)
}

/// `|d/(q-d) · ‖w‖₁ ε_f / (c_q L_q)|^{1/q}`.
pub fn optimal_interval(scheme: &Scheme, l_q: f64, eps_f: f64) -> f64 {
    scheme.leading_term_bound().optimal_interval(l_q, eps_f)
}

pub fn stochastic_mse_bound(scheme: &Scheme, l_q: f64, sigma_f: f64, h: f64) -> f64 {
    scheme.mse_bound().evaluate(l_q, sigma_f, h)
}

pub fn stochastic_optimal_interval(scheme: &Scheme, l_q: f64, sigma_f: f64) -> f64 {
    scheme.mse_bound().optimal_interval(l_q, sigma_f)
}

/// Interpolation-based bound for the first-derivative scheme on `shifts`,
/// with `t` at node `index`.
pub fn lagrange_error_bound(
    shifts: &[Rational],
    index: usize,
    l_m: f64,
    eps_f: f64,
    h: f64,
) -> Result<f64, SchemeError> {
    let points = shifts.len();
    if index >= points || !shifts[index].is_zero() {
        return Err(SchemeError::IndexOutOfRange { index, points });
    }
    let node = shifts[index];
    let scheme = derive_weights(1, shifts)?;
    let sorted_index = scheme
        .shifts()
        .iter()
        .position(|s| *s == node)
        .ok_or(SchemeError::IndexOutOfRange { index, points })?;
    Ok(scheme.lagrange_bound(sorted_index)?.evaluate(l_m, eps_f, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scheme(label: &str) -> Scheme {
        builtin_scheme(label).unwrap()
    }

    #[test]
    fn derives_three_point_forward_weights() {
        let s = derive_weights(1, &ints(&[0, 1, 2])).unwrap();
        assert_eq!(s.weights(), &[r(-3, 2), r(2, 1), r(-1, 2)]);
        assert_eq!(s.remainder_order(), 3);
        assert_eq!(s.label(), "FD_3P");
    }

    #[test]
    fn derives_second_derivative_central() {
        let s = derive_weights(2, &ints(&[-1, 0, 1])).unwrap();
        assert_eq!(s.weights(), &ints(&[1, -2, 1])[..]);
        assert_eq!(s.remainder_order(), 4);
        assert_eq!(s.remainder_constant(), r(1, 12));
    }

    #[test]
    fn forward_difference_constant_is_one_half() {
        let s = derive_weights(1, &ints(&[0, 1])).unwrap();
        assert_eq!(s.weights(), &ints(&[-1, 1])[..]);
        assert_eq!(s.remainder_order(), 2);
        assert_eq!(s.remainder_constant(), r(1, 2));
    }

    #[test]
    fn derive_rejects_bad_input() {
        assert_eq!(
            derive_weights(1, &ints(&[0, 1, 1])),
            Err(SchemeError::SingularSystem)
        );
        assert_eq!(
            derive_weights(2, &ints(&[0, 1])),
            Err(SchemeError::DegreeTooLow {
                order: 2,
                points: 2
            })
        );
    }

    #[test]
    fn builtins_match_their_own_derivation() {
        for s in builtin_schemes() {
            let derived = derive_weights(s.order(), s.shifts()).unwrap();
            assert_eq!(derived, s, "{}", s.label());
        }
        let cd4 = scheme("CD_4P");
        assert_eq!(cd4.weights(), &[r(1, 12), r(-2, 3), r(2, 3), r(-1, 12)]);
        assert_eq!(cd4.remainder_order(), 5);
        assert_eq!(scheme("CD").remainder_constant(), r(1, 6));
    }

    #[test]
    fn float_solve_agrees_with_exact() {
        for s in builtin_schemes() {
            let w = derive_weights_float(s.order(), s.shift_values()).unwrap();
            for (a, b) in w.iter().zip(s.weight_values()) {
                assert!((a - b).abs() < 1e-12, "{}: {a} vs {b}", s.label());
            }
        }
    }

    #[test]
    fn apply_examples() {
        assert_eq!(scheme("FD").apply(&[0.0, 0.5], 0.5), 1.0);
        assert_relative_eq!(
            scheme("L2_CD").apply(&[0.81, 1.0, 1.21], 0.1),
            2.0,
            max_relative = 1e-12
        );
        // φ = t³ at 0: CD gives 1 while φ′(0) = 0; the error is c_q φ‴ h² = 1.
        assert_eq!(scheme("CD").apply(&[-1.0, 1.0], 1.0), 1.0);
    }

    #[test]
    fn polynomial_exactness() {
        for s in builtin_schemes() {
            let d = s.order();
            for l in 0..s.remainder_order() {
                let t = 0.3;
                let got = s.apply_fn(|x| x.powi(l as i32), t, 0.1);
                let expected = if l < d {
                    0.0
                } else {
                    let falling: f64 = (0..d).map(|i| (l - i) as f64).product();
                    falling * t.powi((l - d) as i32)
                };
                assert!(
                    (got - expected).abs() < 1e-10,
                    "{} on t^{l}: {got} vs {expected}",
                    s.label()
                );
            }
        }
    }

    #[test]
    fn weights_sum_to_zero() {
        for s in builtin_schemes() {
            assert!(s.weights().iter().copied().sum::<Rational>().is_zero());
        }
    }

    #[test]
    fn noiseless_convergence_order() {
        for s in builtin_schemes() {
            let d = s.order();
            let exact = 1.0_f64.exp();
            let err = |h: f64| (s.apply_fn(f64::exp, 1.0, h) - exact).abs();
            let (h1, h2) = (1e-1, 1e-2);
            let slope = (err(h1) / err(h2)).log10() / (h1 / h2).log10();
            let expected = (s.remainder_order() - d) as f64;
            assert!(slope >= expected - 0.1, "{}: slope {slope}", s.label());
        }
    }

    #[test]
    fn deterministic_bound_examples() {
        assert_relative_eq!(
            deterministic_error_bound(&scheme("FD"), 1.0, 1e-4, 0.02),
            0.02,
            max_relative = 1e-12
        );
        for s in builtin_schemes() {
            assert_eq!(deterministic_error_bound(&s, 0.0, 0.0, 0.37), 0.0);
        }
    }

    /// Brute force over sign patterns of the noise at the stencil points plus
    /// the cubic `φ = L t³/6` whose third derivative attains the bound.
    #[test]
    fn central_bound_matches_enumerated_worst_case() {
        let cd = scheme("CD");
        let (l3, eps, h) = (1.0, 1e-3, 0.1);
        let phi = |x: f64| l3 * x.powi(3) / 6.0;
        let exact = 0.0;
        let mut worst: f64 = 0.0;
        for signs in 0..4u32 {
            let noise = |j: usize| if signs >> j & 1 == 1 { eps } else { -eps };
            let values: Vec<f64> = cd
                .stencil_points(0.0, h)
                .enumerate()
                .map(|(j, x)| phi(x) + noise(j))
                .collect();
            worst = worst.max((cd.apply(&values, h) - exact).abs());
        }
        assert_relative_eq!(
            worst,
            deterministic_error_bound(&cd, l3, eps, h),
            max_relative = 1e-12
        );
    }

    #[test]
    fn optimal_interval_examples() {
        assert_relative_eq!(
            optimal_interval(&scheme("FD"), 1.0, 1e-6),
            2e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            optimal_interval(&scheme("CD"), 3.0, 1e-3),
            0.1,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            optimal_interval(&scheme("FD_3P"), 6.0, 1.0),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn leading_term_bound_is_stationary_at_optimum() {
        for s in builtin_schemes() {
            let bound = s.leading_term_bound();
            let (l, eps) = (2.5, 1e-5);
            let h = optimal_interval(&s, l, eps);
            let g = |u: f64| bound.evaluate(l, eps, u.exp());
            let du = 1e-4;
            let slope = (g(h.ln() + du) - g(h.ln() - du)) / (2.0 * du);
            assert!(slope.abs() / g(h.ln()) < 1e-6, "{}: {slope}", s.label());
        }
    }

    #[test]
    fn stochastic_examples() {
        assert_relative_eq!(
            stochastic_optimal_interval(&scheme("CD"), 3.0, 1.0),
            1.0,
            max_relative = 1e-12
        );
        let h = stochastic_optimal_interval(&scheme("FD"), 1.0, 1e-4);
        assert!((h - 1.682e-2).abs() < 1e-5, "{h}");
        let fd = scheme("FD");
        assert_eq!(
            stochastic_mse_bound(&fd, 2.0, 0.0, 0.1),
            fd.mse_bound().truncation(2.0, 0.1)
        );
    }

    #[test]
    fn lagrange_bound_examples() {
        assert_eq!(
            lagrange_error_bound(&ints(&[-1, 1]), 0, 1.0, 1e-3, 0.1),
            Err(SchemeError::IndexOutOfRange {
                index: 0,
                points: 2
            })
        );
        assert_relative_eq!(
            lagrange_error_bound(&ints(&[0, 1]), 0, 1.0, 0.0, 0.1).unwrap(),
            0.05,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lagrange_error_bound(&ints(&[0, 1, 2]), 0, 1.0, 0.0, 1.0).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-12
        );
    }
}
