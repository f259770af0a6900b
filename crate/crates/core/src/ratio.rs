//! Testing ratios `r_S(h) = |Σ w̃_j f(t + h s̃_j)| / ε_f` and their acceptance band.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::oracle::Oracle1d;
use crate::scheme::{moment, to_f64, Rational, Scheme};

/// Largest integer dilation tried by [`default_alpha`].
pub const MAX_DEFAULT_ALPHA: i128 = 16;

/// A normalized stencil whose leading Taylor term is `c_r φ^(q)(t) h^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestingRatio {
    base: Scheme,
    shifts: Vec<Rational>,
    weights: Vec<Rational>,
    remainder_constant: Rational,
    alpha: Rational,
    normalization: Rational,
    shift_values: Vec<f64>,
    weight_values: Vec<f64>,
}

fn rational_powi(base: Rational, exp: i32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

impl TestingRatio {
    /// Builds the ratio from `Σ w_j f(t + h s_j) − α^{-d} Σ w_j f(t + α h s_j)`,
    /// merging coincident points and normalizing to unit ℓ1 norm.
    pub fn generate(scheme: &Scheme, alpha: Rational) -> Result<Self, Error> {
        if alpha <= Rational::zero() || alpha == Rational::one() {
            return Err(Error::InvalidAlpha(to_f64(&alpha)));
        }
        let d = scheme.order() as i32;
        let q = scheme.remainder_order();
        let damp = rational_powi(alpha, -d);

        let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (s, w) in scheme.shifts().iter().zip(scheme.weights()) {
            *merged.entry(*s).or_insert_with(Rational::zero) += *w;
            *merged.entry(alpha * *s).or_insert_with(Rational::zero) -= damp * *w;
        }
        merged.retain(|_, w| !w.is_zero());
        let (shifts, mut weights): (Vec<_>, Vec<_>) = merged.into_iter().unzip();

        let normalization: Rational = weights.iter().map(|w| w.abs()).sum();
        if normalization.is_zero() {
            return Err(Error::DegenerateRatio);
        }
        let sign = if weights[0].is_negative() {
            -Rational::one()
        } else {
            Rational::one()
        };
        for w in weights.iter_mut() {
            *w = *w * sign / normalization;
        }

        if (0..q).any(|l| !moment(&shifts, &weights, l).is_zero()) {
            return Err(Error::DegenerateRatio);
        }
        let remainder_constant = moment(&shifts, &weights, q);
        if remainder_constant.is_zero() {
            return Err(Error::DegenerateRatio);
        }
        debug_assert_eq!(
            remainder_constant.abs(),
            (scheme.remainder_constant() * (Rational::one() - rational_powi(alpha, q as i32 - d))
                / normalization)
                .abs()
        );

        Ok(Self {
            base: scheme.clone(),
            shift_values: shifts.iter().map(to_f64).collect(),
            weight_values: weights.iter().map(to_f64).collect(),
            shifts,
            weights,
            remainder_constant,
            alpha,
            normalization,
        })
    }

    /// The forward-difference ratio `|f(t+4h) − 4f(t+h) + 3f(t)| / (8ε_f)`.
    pub fn forward() -> Self {
        let fd = crate::scheme::builtin_scheme("FD").expect("FD is builtin");
        Self::generate(&fd, Rational::from_integer(4)).expect("FD ratio is valid")
    }

    /// Generates the ratio with [`default_alpha`] for the given `β`.
    pub fn with_default_alpha(scheme: &Scheme, beta: f64) -> Result<Self, Error> {
        let alpha = default_alpha(scheme, beta)?;
        Self::generate(scheme, alpha)
    }

    pub fn base(&self) -> &Scheme {
        &self.base
    }

    pub fn shifts(&self) -> &[Rational] {
        &self.shifts
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn shift_values(&self) -> &[f64] {
        &self.shift_values
    }

    pub fn weight_values(&self) -> &[f64] {
        &self.weight_values
    }

    pub fn remainder_order(&self) -> u32 {
        self.base.remainder_order()
    }

    /// `c_r`, the leading remainder constant of the normalized stencil.
    pub fn remainder_constant(&self) -> Rational {
        self.remainder_constant
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    /// The ℓ1 norm `A` divided out during generation.
    pub fn normalization(&self) -> Rational {
        self.normalization
    }

    /// `r* = d/(q−d) · |c_r / c_q| · ‖w‖₁`, exact.
    pub fn optimal_ratio_exact(&self) -> Rational {
        let d = self.base.order() as i128;
        let q = self.base.remainder_order() as i128;
        Rational::new(d, q - d)
            * (self.remainder_constant / self.base.remainder_constant()).abs()
            * self.base.weights_l1()
    }

    pub fn optimal_ratio(&self) -> f64 {
        to_f64(&self.optimal_ratio_exact())
    }

    /// `|Σ w̃_j values_j| / ε_f`.
    pub fn evaluate_values(&self, values: &[f64], eps_f: f64) -> f64 {
        assert_eq!(values.len(), self.shifts.len(), "one value per ratio point");
        let sum: f64 = self
            .weight_values
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum();
        sum.abs() / eps_f
    }
}

/// Smallest integer `α ≥ 2` whose generated ratio has `r* > β`.
pub fn default_alpha(scheme: &Scheme, beta: f64) -> Result<Rational, Error> {
    (2..=MAX_DEFAULT_ALPHA)
        .map(Rational::from_integer)
        .find(|&alpha| {
            TestingRatio::generate(scheme, alpha)
                .map(|r| r.optimal_ratio() > beta)
                .unwrap_or(false)
        })
        .ok_or(Error::NoValidAlpha(beta))
}

/// Evaluates the ratio on an oracle at `(t, h)`.
pub fn evaluate_ratio<O: Oracle1d + ?Sized>(
    ratio: &TestingRatio,
    oracle: &mut O,
    t: f64,
    h: f64,
) -> Result<f64, Error> {
    let eps = oracle.noise_level();
    if !(eps > 0.0) {
        return Err(Error::ZeroNoiseLevel);
    }
    let values: Vec<f64> = ratio
        .shift_values
        .iter()
        .map(|s| oracle.sample(t + h * s))
        .collect();
    Ok(ratio.evaluate_values(&values, eps))
}

pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Acceptance band `[r_l, r_u]` for the bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    r_star: f64,
    r_l: f64,
    r_u: f64,
    beta: f64,
    margin: f64,
}

impl RatioBounds {
    /// `r_l = max{1 + η, r*/β}`, `r_u = max{3(1 + η), β r*}`.
    pub fn select(r_star: f64, beta: f64, margin: f64) -> Result<Self, Error> {
        if !(r_star > 0.0) || !(beta > 1.0) || !(margin > 0.0) {
            return Err(Error::InvalidConfig("need r* > 0, β > 1 and η > 0"));
        }
        let r_l = (1.0 + margin).max(r_star / beta);
        let r_u = (3.0 * (1.0 + margin)).max(beta * r_star);
        Self::check(r_l, r_u)?;
        Ok(Self {
            r_star,
            r_l,
            r_u,
            beta,
            margin,
        })
    }

    /// Bounds with the default `β = 2` and margin `0.1`.
    pub fn for_ratio(ratio: &TestingRatio) -> Result<Self, Error> {
        Self::select(ratio.optimal_ratio(), DEFAULT_BETA, DEFAULT_MARGIN)
    }

    /// Explicit bounds. `r*` is recorded as their geometric center.
    pub fn explicit(r_l: f64, r_u: f64) -> Result<Self, Error> {
        Self::check(r_l, r_u)?;
        Ok(Self {
            r_star: (r_l * r_u).sqrt(),
            r_l,
            r_u,
            beta: (r_u / r_l).sqrt(),
            margin: r_l - 1.0,
        })
    }

    fn check(r_l: f64, r_u: f64) -> Result<(), Error> {
        if r_l > 1.0 && r_l < r_u - 2.0 {
            Ok(())
        } else {
            Err(Error::InvalidBounds { r_l, r_u })
        }
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn lower(&self) -> f64 {
        self.r_l
    }

    pub fn upper(&self) -> f64 {
        self.r_u
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn contains(&self, ratio: f64) -> bool {
        ratio >= self.r_l && ratio <= self.r_u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{builtin_scheme, builtin_schemes, derive_weights};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn ratio(label: &str, alpha: i128) -> TestingRatio {
        TestingRatio::generate(
            &builtin_scheme(label).unwrap(),
            Rational::from_integer(alpha),
        )
        .unwrap()
    }

    #[test]
    fn forward_ratio_stencil() {
        let r = ratio("FD", 4);
        assert_eq!(r.shifts(), &[q(0, 1), q(1, 1), q(4, 1)]);
        assert_eq!(r.weights(), &[q(3, 8), q(-1, 2), q(1, 8)]);
        assert_eq!(r, TestingRatio::forward());
    }

    #[test]
    fn central_ratio_stencil() {
        let r = ratio("CD", 3);
        assert_eq!(r.shifts(), &[q(-3, 1), q(-1, 1), q(1, 1), q(3, 1)]);
        assert_eq!(r.weights(), &[q(1, 8), q(-3, 8), q(3, 8), q(-1, 8)]);
        assert_eq!(r.remainder_constant().abs(), q(1, 1));
    }

    #[test]
    fn second_derivative_ratio_stencil() {
        let r = ratio("L2_CD", 2);
        assert_eq!(
            r.weights(),
            &[q(1, 16), q(-1, 4), q(3, 8), q(-1, 4), q(1, 16)]
        );
    }

    #[test]
    fn rejects_unit_and_negative_alpha() {
        let fd = builtin_scheme("FD").unwrap();
        assert!(TestingRatio::generate(&fd, Rational::one()).is_err());
        assert!(TestingRatio::generate(&fd, q(-2, 1)).is_err());
    }

    #[test]
    fn optimal_ratios_and_default_alphas() {
        let expected = [
            ("FD", 4, 3.0),
            ("CD", 3, 3.0),
            ("FD_3P", 3, 3.69),
            ("FD_4P", 3, 8.25),
            ("CD_4P", 2, 2.5),
            ("L2_CD", 2, 3.0),
        ];
        for (label, alpha, r_star) in expected {
            let scheme = builtin_scheme(label).unwrap();
            assert_eq!(
                default_alpha(&scheme, 2.0).unwrap(),
                Rational::from_integer(alpha),
                "{label}"
            );
            let got = ratio(label, alpha).optimal_ratio();
            assert!((got - r_star).abs() <= 0.01, "{label}: {got}");
        }
        assert_eq!(ratio("FD_3P", 3).optimal_ratio_exact(), q(48, 13));
    }

    #[test]
    fn bounds_examples() {
        let b = RatioBounds::select(3.0, 2.0, 0.1).unwrap();
        assert_eq!((b.lower(), b.upper()), (1.5, 6.0));
        let b = RatioBounds::select(8.25, 2.0, 0.1).unwrap();
        assert_eq!((b.lower(), b.upper()), (4.125, 16.5));
        let b = RatioBounds::select(0.5, 2.0, 0.1).unwrap();
        assert_relative_eq!(b.lower(), 1.1);
        assert_relative_eq!(b.upper(), 3.3);
        assert!(RatioBounds::explicit(1.5, 3.0).is_err());
        assert!(RatioBounds::explicit(1.0, 6.0).is_err());
    }

    #[test]
    fn ratio_on_quadratic() {
        let r = TestingRatio::forward();
        let values: Vec<f64> = r.shift_values().iter().map(|s| s * s).collect();
        assert_eq!(r.evaluate_values(&values, 1.0), 1.5);
        let constant = [7.0; 3];
        assert_eq!(r.evaluate_values(&constant, 1e-3), 0.0);
    }

    proptest! {
        #[test]
        fn generated_ratios_are_valid(
            raw in proptest::collection::btree_set(-4i128..=4, 2..6),
            order in 1u32..=2,
            alpha in 2i128..=5,
        ) {
            let shifts: Vec<Rational> = raw.into_iter().map(Rational::from_integer).collect();
            prop_assume!(shifts.len() > order as usize);
            let scheme = derive_weights(order, &shifts).unwrap();
            if let Ok(r) = TestingRatio::generate(&scheme, Rational::from_integer(alpha)) {
                let l1: Rational = r.weights().iter().map(|w| w.abs()).sum();
                prop_assert_eq!(l1, Rational::one());
                for l in 0..r.remainder_order() {
                    prop_assert!(moment(r.shifts(), r.weights(), l).is_zero());
                }
                prop_assert!(r.weights()[0].is_positive());
            }
        }

        #[test]
        fn bounded_noise_moves_ratio_by_at_most_one(
            scheme_index in 0usize..6,
            signs in proptest::collection::vec(-1.0f64..=1.0, 8),
            h in 1e-3f64..1.0,
        ) {
            let scheme = &builtin_schemes()[scheme_index];
            let r = TestingRatio::with_default_alpha(scheme, 2.0).unwrap();
            let eps = 1e-3;
            let clean: Vec<f64> = r.shift_values().iter().map(|s| (1.0 + h * s).cos()).collect();
            let noisy: Vec<f64> = clean.iter().zip(&signs).map(|(v, u)| v + eps * u).collect();
            let gap = (r.evaluate_values(&clean, eps) - r.evaluate_values(&noisy, eps)).abs();
            prop_assert!(gap <= 1.0 + 1e-9, "gap {}", gap);
        }
    }
}
