use fdstep::oracle::AffineView;
use fdstep::problems::UnivariateFunction;
use fdstep::scheme::{builtin_scheme, builtin_schemes};
use fdstep::search::{finite_difference_at, forward_interval, Interval};
use fdstep::{
    IntervalSearch, NoiseKind, NoisyOracle, Oracle1d, SearchConfig, SearchResult, SearchStatus,
    TestingRatio,
};
use proptest::prelude::*;

fn cos_oracle(eps: f64, seed: u64) -> NoisyOracle<impl Fn(f64) -> f64> {
    NoisyOracle::uniform(f64::cos, eps, seed)
}

fn generated(label: &str) -> TestingRatio {
    let scheme = builtin_scheme(label).unwrap();
    TestingRatio::with_default_alpha(&scheme, 2.0).unwrap()
}

fn run_generated(label: &str, oracle: impl Oracle1d, t: f64) -> SearchResult {
    let ratio = generated(label);
    let config = SearchConfig::for_ratio(&ratio, oracle.noise_level()).unwrap();
    IntervalSearch::new(oracle, t).run(&ratio, &config).unwrap()
}

fn assert_bracket_monotone(r: &SearchResult) {
    for pair in r.trace.windows(2) {
        assert!(pair[1].lower >= pair[0].lower);
        assert!(pair[1].upper <= pair[0].upper);
    }
    for step in &r.trace {
        assert!(step.lower < step.upper);
    }
}

#[test]
fn forward_search_on_cos_matches_reported_interval() {
    let r = forward_interval(cos_oracle(1e-5, 0), 1.0).unwrap();
    assert_eq!(r.status, SearchStatus::Converged);
    assert!((2e-3..=2e-2).contains(&r.h_dagger), "{}", r.h_dagger);
    assert!(r.new_evals <= 8);

    let r = forward_interval(cos_oracle(1e-1, 0), 1.0).unwrap();
    assert!((0.2..=2.6).contains(&r.h_dagger), "{}", r.h_dagger);
    assert!(r.new_evals <= 10);
}

#[test]
fn central_search_lands_in_the_balanced_band() {
    // The normalized ratio is |c_r φ‴ h³|/ε_f up to ±1 from noise, with |φ‴(1)| = sin 1.
    let ratio = generated("CD");
    let bounds = fdstep::RatioBounds::for_ratio(&ratio).unwrap();
    let cr = ratio.remainder_constant();
    let c = (*cr.numer() as f64 / *cr.denom() as f64).abs();
    let eps = 1e-3;
    let l3 = 1f64.sin();
    let lo = ((bounds.lower() - 1.0) / c * eps / l3).cbrt();
    let hi = ((bounds.upper() + 1.0) / c * eps / l3).cbrt();
    let mut converged = 0;
    for seed in 0..20 {
        let r = run_generated("CD", cos_oracle(eps, seed), 1.0);
        if r.status == SearchStatus::Converged {
            converged += 1;
            assert!(
                (lo..=hi).contains(&r.h_dagger),
                "seed {seed}: {} not in [{lo}, {hi}]",
                r.h_dagger
            );
        }
    }
    assert!(converged >= 18);
}

#[test]
fn cubic_is_noise_dominated_for_four_point_central() {
    // Ten expansions keep rounding of f far below the noise level.
    let f = UnivariateFunction::Polynomial(vec![0.0, 1.0, 0.0, 1.0]);
    let ratio = generated("CD_4P");
    for seed in 0..10 {
        let g = f.clone();
        let oracle = NoisyOracle::uniform(move |t| g.value(t), 1e-2, seed);
        let config = SearchConfig::for_ratio(&ratio, 1e-2)
            .unwrap()
            .with_max_iter(10);
        let r = IntervalSearch::new(oracle, 1e-9)
            .run(&ratio, &config)
            .unwrap();
        assert_eq!(r.status, SearchStatus::NoiseDominatedWarning);
        assert!(r.upper.is_infinite());
        assert_eq!(r.iterations, 10);
        for pair in r.trace.windows(2) {
            assert!(pair[1].h > pair[0].h);
        }
    }
}

#[test]
fn cos_converges_for_every_seed_and_noise_level() {
    for k in 1..=8 {
        let eps = 10f64.powi(-k);
        for seed in 0..100 {
            let r = forward_interval(cos_oracle(eps, seed), 1.0).unwrap();
            assert_eq!(r.status, SearchStatus::Converged, "eps {eps} seed {seed}");
            let bounds = SearchConfig::forward(eps).bounds;
            assert!(bounds.contains(r.final_ratio));
            assert!(r.lower <= r.h_dagger && r.h_dagger <= r.upper);
            assert_bracket_monotone(&r);
        }
    }
}

#[test]
fn expansion_costs_one_evaluation_per_iteration() {
    // Noiseless φ = c t²/2 gives a first ratio of exactly c, and each
    // expansion by 4 multiplies it by 16; c = 2·16^{-k} converges after k
    // expansions.
    for k in 0..7 {
        let c = 2.0 * 16f64.powi(-k);
        let oracle = NoisyOracle::new(move |t: f64| c * t * t / 2.0, 1e-6, 0, NoiseKind::None);
        let r = forward_interval(oracle, 0.0).unwrap();
        assert_eq!(r.status, SearchStatus::Converged);
        assert_eq!(r.iterations, k as usize + 1);
        assert!(r.trace[..k as usize].iter().all(|s| s.upper.is_infinite()));
        assert_eq!(r.new_evals as usize, r.iterations + 2);
    }
}

#[test]
fn converged_forward_interval_is_reused_for_the_derivative() {
    let mut search = IntervalSearch::new(cos_oracle(1e-6, 3), 1.0);
    let config = SearchConfig::forward(1e-6);
    let r = search.run(&TestingRatio::forward(), &config).unwrap();
    assert_eq!(r.status, SearchStatus::Converged);
    let fd = builtin_scheme("FD").unwrap();
    let est = search.finite_difference(&fd, &r.interval).unwrap();
    assert_eq!(est.new_evals, 0);
    assert!((est.derivative + 1f64.sin()).abs() < 1e-2);
}

#[test]
fn difference_on_affine_function_is_exact() {
    let oracle = NoisyOracle::new(|t: f64| 5.0 * t + 2.0, 1e-3, 0, NoiseKind::None);
    let fd = builtin_scheme("FD").unwrap();
    for h in [0.5, 1.0, 2.0, 0.25] {
        let est = finite_difference_at(&mut oracle.clone(), 3.0, &fd, h).unwrap();
        assert_eq!(est.derivative, 5.0);
    }
}

#[test]
fn affine_transformations_preserve_the_search() {
    // The configuration is shared; only the oracle is transformed.
    for label in ["FD", "CD", "FD_3P", "CD_4P"] {
        let ratio = generated(label);
        let config = SearchConfig::for_ratio(&ratio, 0.1).unwrap();
        for seed in 0..5 {
            let base = IntervalSearch::new(cos_oracle(0.1, seed), 1.0)
                .run(&ratio, &config)
                .unwrap();
            for (a, b) in [(10.0, 5.0), (-2.0, 0.0), (0.01, -3.0)] {
                let view = AffineView::new(cos_oracle(0.1, seed), a, b).unwrap();
                let r = IntervalSearch::new(view, 1.0).run(&ratio, &config).unwrap();
                assert_eq!(r.h_dagger.to_bits(), base.h_dagger.to_bits());
                assert_eq!(r.iterations, base.iterations);
                assert_eq!(r.new_evals, base.new_evals);
                assert_eq!(r.status, base.status);
                for (x, y) in r.trace.iter().zip(&base.trace) {
                    assert!((x.ratio - y.ratio).abs() <= 1e-12 * y.ratio.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn overestimated_noise_never_shrinks_the_interval() {
    let eps = 1e-6;
    let mut compared = 0;
    for seed in 0..50 {
        let truth = forward_interval(cos_oracle(eps, seed), 1.0).unwrap();
        let over =
            forward_interval(cos_oracle(eps, seed).with_declared_level(10.0 * eps), 1.0).unwrap();
        if truth.status == SearchStatus::Converged && over.status == SearchStatus::Converged {
            compared += 1;
            assert!(over.h_dagger >= truth.h_dagger, "seed {seed}");
        }
    }
    assert!(compared >= 45);
}

#[test]
fn all_schemes_stop_on_cos() {
    for scheme in builtin_schemes() {
        let r = run_generated(scheme.label(), cos_oracle(1e-4, 7), 1.0);
        assert_ne!(r.status, SearchStatus::MaxIterFailure, "{}", scheme.label());
        assert_bracket_monotone(&r);
    }
}

#[test]
fn interval_points_use_the_canonical_order() {
    let h = Interval::new(0.1);
    let s = fdstep::Rational::from_integer(3);
    assert_eq!(h.point(1.0, &s), 1.0 + 0.1 * 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brackets_are_monotone(seed in any::<u64>(), k in 1i32..=8, t in -3.0f64..3.0) {
        let eps = 10f64.powi(-k);
        let r = forward_interval(cos_oracle(eps, seed), t).unwrap();
        assert_bracket_monotone(&r);
        prop_assert!(r.lower <= r.h_dagger && r.h_dagger <= r.upper);
        if r.status == SearchStatus::Converged {
            prop_assert!(SearchConfig::forward(eps).bounds.contains(r.final_ratio));
        }
    }
}
