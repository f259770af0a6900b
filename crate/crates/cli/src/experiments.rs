//! Experiment matrices. Rows are computed in parallel and returned in the
//! order of the specification.

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use fdstep::baselines::{more_wild, DEFAULT_TAU1, DEFAULT_TAU2};
use fdstep::optimizer::{minimize, DifferenceKind, LbfgsConfig, NoiseSpec, OptRun, Strategy};
use fdstep::problems::{Problem, TestProblem, UnivariateFunction};
use fdstep::scheme::builtin_scheme;
use fdstep::search::finite_difference_at;
use fdstep::{
    IntervalSearch, NoisyOracle, Rational, Scheme, SearchConfig, SearchResult, SearchStatus,
    TestingRatio,
};

use crate::analysis::{default_grid, reference_optimal_h, worst_case_relative_error};
use crate::records::{CsvRecord, CurvePoint, LbfgsRecord};

pub const SCHEMES: [&str; 6] = ["FD", "CD", "FD_3P", "FD_4P", "CD_4P", "L2_CD"];
pub const BETA: f64 = 2.0;

/// Seed of the independent noise draw behind the `relative_error` column.
pub fn fresh_seed(seed: u64) -> u64 {
    seed ^ 0xA5A5_5A5A_C3C3_3C3C
}

pub fn scheme(label: &str) -> Result<Scheme> {
    builtin_scheme(label).ok_or_else(|| anyhow!("unknown scheme {label:?}"))
}

/// The testing ratio for `scheme` with an explicit or default dilation.
pub fn testing_ratio(scheme: &Scheme, alpha: Option<i128>) -> Result<TestingRatio> {
    Ok(match alpha {
        Some(a) => TestingRatio::generate(scheme, Rational::from_integer(a))?,
        None => TestingRatio::with_default_alpha(scheme, BETA)?,
    })
}

/// One interval-estimation job.
#[derive(Debug, Clone)]
pub struct EstimateJob {
    pub experiment: String,
    pub function: UnivariateFunction,
    pub t: f64,
    pub eps_f: f64,
    pub scheme: String,
    pub alpha: Option<i128>,
    pub h0: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl EstimateJob {
    pub fn new(
        experiment: &str,
        function: UnivariateFunction,
        t: f64,
        eps_f: f64,
        scheme: &str,
        seed: u64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            function,
            t,
            eps_f,
            scheme: scheme.into(),
            alpha: None,
            h0: None,
            max_iter: None,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub result: Option<SearchResult>,
    pub config: SearchConfig,
    pub record: CsvRecord,
}

/// Relative error of one fresh noisy estimate at `h`, or `None` when the
/// exact derivative vanishes.
fn fresh_relative_error(job: &EstimateJob, scheme: &Scheme, h: f64) -> Option<f64> {
    let f = &job.function;
    let exact = f.derivative(scheme.order(), job.t);
    if exact == 0.0 {
        return None;
    }
    let oracle = NoisyOracle::uniform(|x| f.value(x), job.eps_f, fresh_seed(job.seed));
    let est = finite_difference_at(oracle, job.t, scheme, h).ok()?;
    Some((est.derivative - exact).abs() / exact.abs())
}

pub fn run_estimate(job: &EstimateJob) -> Result<EstimateOutcome> {
    let scheme = scheme(&job.scheme)?;
    let ratio = testing_ratio(&scheme, job.alpha)?;
    let mut config = SearchConfig::for_ratio(&ratio, job.eps_f)?;
    if let Some(h0) = job.h0 {
        config.h0 = h0;
    }
    if let Some(m) = job.max_iter {
        config.max_iter = m;
    }
    let f = &job.function;
    let oracle = NoisyOracle::uniform(|x| f.value(x), job.eps_f, job.seed);
    let mut search = IntervalSearch::new(oracle, job.t);
    let result = search.run(&ratio, &config);
    let h_star = reference_optimal_h(f, job.t, &scheme, job.eps_f).ok();

    let mut record = CsvRecord {
        experiment: job.experiment.clone(),
        scheme: scheme.label().into(),
        problem: f.name(),
        t: job.t,
        eps_f: job.eps_f,
        h_dagger: None,
        h_star_reference: h_star,
        final_ratio: None,
        iters: 0,
        new_evals: search.new_evaluations(),
        status: String::new(),
        relative_error: None,
        worst_case_relative_error: None,
        seed: job.seed,
    };
    let result = match result {
        Ok(r) => {
            record.h_dagger = Some(r.h_dagger);
            record.final_ratio = Some(r.final_ratio);
            record.iters = r.iterations;
            record.new_evals = r.new_evals;
            record.status = r.status.as_str().into();
            record.relative_error = fresh_relative_error(job, &scheme, r.h_dagger);
            record.worst_case_relative_error =
                worst_case_relative_error(f, job.t, &scheme, job.eps_f, r.h_dagger).ok();
            Some(r)
        }
        Err(e) => {
            record.status = format!("Error: {e}");
            None
        }
    };
    Ok(EstimateOutcome {
        result,
        config,
        record,
    })
}

/// Runs all jobs concurrently, keeping job order.
pub fn run_estimates(jobs: &[EstimateJob]) -> Result<Vec<EstimateOutcome>> {
    jobs.par_iter().map(run_estimate).collect()
}

pub fn table5_jobs(eps_list: &[f64], schemes: &[&str], seeds: &[u64]) -> Vec<EstimateJob> {
    let mut jobs = Vec::new();
    for &scheme in schemes {
        for &eps in eps_list {
            for &seed in seeds {
                jobs.push(EstimateJob::new(
                    "table5",
                    UnivariateFunction::Cos,
                    1.0,
                    eps,
                    scheme,
                    seed,
                ));
            }
        }
    }
    jobs
}

/// The difficult examples with their evaluation points.
pub fn special_examples() -> Vec<(UnivariateFunction, f64)> {
    vec![
        (UnivariateFunction::ExpMinusOneSquared, -8.0),
        (UnivariateFunction::Exp { rate: 100.0 }, 0.01),
        (UnivariateFunction::quartic(), 0.99999),
        (UnivariateFunction::cubic(), 1e-9),
    ]
}

pub fn table8_jobs(eps_f: f64, schemes: &[&str], seeds: &[u64]) -> Vec<EstimateJob> {
    let mut jobs = Vec::new();
    for (f, t) in special_examples() {
        for &scheme in schemes {
            for &seed in seeds {
                jobs.push(EstimateJob::new(
                    "table8",
                    f.clone(),
                    t,
                    eps_f,
                    scheme,
                    seed,
                ));
            }
        }
    }
    jobs
}

/// A Moré–Wild row next to an adaptive forward-difference row.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub mw: CsvRecord,
    pub adaptive: EstimateOutcome,
}

pub fn run_more_wild(f: &UnivariateFunction, t: f64, eps_f: f64, seed: u64) -> CsvRecord {
    let fd = builtin_scheme("FD").expect("builtin");
    let mut oracle = NoisyOracle::uniform(|x| f.value(x), eps_f, seed);
    let mw = more_wild(&mut oracle, t, DEFAULT_TAU1, DEFAULT_TAU2);
    let h = mw.h_more_wild(eps_f);
    let job = EstimateJob::new("table9", f.clone(), t, eps_f, "FD", seed);
    CsvRecord {
        experiment: "table9".into(),
        scheme: "MW".into(),
        problem: f.name(),
        t,
        eps_f,
        h_dagger: h,
        h_star_reference: reference_optimal_h(f, t, &fd, eps_f).ok(),
        final_ratio: None,
        iters: mw.trials as usize,
        new_evals: mw.evaluations,
        status: if h.is_some() { "Success" } else { "Failure" }.into(),
        relative_error: h.and_then(|h| fresh_relative_error(&job, &fd, h)),
        worst_case_relative_error: h
            .and_then(|h| worst_case_relative_error(f, t, &fd, eps_f, h).ok()),
        seed,
    }
}

pub const TABLE9_T: [f64; 5] = [1e-8, 1e-6, 1e-4, 1e-2, 0.0];
pub const TABLE9_EPS: [f64; 4] = [1e-8, 1e-6, 1e-4, 1e-2];

pub fn run_table9(t_list: &[f64], eps_list: &[f64], seed: u64) -> Result<Vec<ComparisonRow>> {
    let f = UnivariateFunction::Sin { a: 1.0, b: 1.0 };
    let cells: Vec<(f64, f64)> = eps_list
        .iter()
        .flat_map(|&e| t_list.iter().map(move |&t| (e, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(eps, t)| {
            let adaptive =
                run_estimate(&EstimateJob::new("table9", f.clone(), t, eps, "FD", seed))?;
            Ok(ComparisonRow {
                mw: run_more_wild(&f, t, eps, seed),
                adaptive,
            })
        })
        .collect()
}

pub fn table9_records(rows: &[ComparisonRow]) -> Vec<CsvRecord> {
    rows.iter()
        .flat_map(|r| [r.mw.clone(), r.adaptive.record.clone()])
        .collect()
}

/// `δ_S(h)` on the default grid for each job's function, scheme and noise
/// level. Jobs whose derivative vanishes are skipped.
pub fn plot_data(jobs: &[EstimateJob]) -> Result<Vec<CurvePoint>> {
    let mut seen = Vec::new();
    let mut points = Vec::new();
    for job in jobs {
        let key = (
            job.function.name(),
            job.t.to_bits(),
            job.eps_f.to_bits(),
            job.scheme.clone(),
        );
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let scheme = scheme(&job.scheme)?;
        for h in default_grid() {
            let Ok(delta) = worst_case_relative_error(&job.function, job.t, &scheme, job.eps_f, h)
            else {
                break;
            };
            points.push(CurvePoint {
                problem: job.function.name(),
                scheme: scheme.label().into(),
                t: job.t,
                eps_f: job.eps_f,
                h,
                delta,
            });
        }
    }
    Ok(points)
}

pub fn parse_strategy(name: &str) -> Result<Strategy> {
    match name.to_ascii_lowercase().as_str() {
        "fixed" => Ok(Strategy::Fixed),
        "mw" | "more-wild" => Ok(Strategy::MoreWild),
        "adaptive" => Ok(Strategy::Adaptive { warm_start: true }),
        "adaptive-cold" => Ok(Strategy::Adaptive { warm_start: false }),
        other => other
            .strip_prefix("step:")
            .and_then(|h| h.parse().ok())
            .map(Strategy::FixedStep)
            .ok_or_else(|| anyhow!("unknown strategy {name:?}")),
    }
}

pub fn strategy_name(s: &Strategy) -> String {
    match s {
        Strategy::Fixed => "fixed".into(),
        Strategy::MoreWild => "mw".into(),
        Strategy::Adaptive { warm_start: true } => "adaptive".into(),
        Strategy::Adaptive { warm_start: false } => "adaptive-cold".into(),
        Strategy::FixedStep(h) => format!("step:{h}"),
    }
}

pub fn parse_difference(name: &str) -> Result<DifferenceKind> {
    match name.to_ascii_lowercase().as_str() {
        "fd" | "forward" => Ok(DifferenceKind::Forward),
        "cd" | "central" => Ok(DifferenceKind::Central),
        other => Err(anyhow!("unknown difference scheme {other:?}")),
    }
}

pub fn difference_name(d: DifferenceKind) -> &'static str {
    match d {
        DifferenceKind::Forward => "fd",
        DifferenceKind::Central => "cd",
    }
}

/// One optimizer job.
#[derive(Debug, Clone)]
pub struct LbfgsJob {
    pub problem: String,
    pub eps_f: f64,
    pub strategy: Strategy,
    pub difference: DifferenceKind,
    pub seed: u64,
    pub budget: u64,
}

pub fn run_lbfgs(job: &LbfgsJob) -> Result<(OptRun, LbfgsRecord)> {
    let problem = TestProblem::parse(&job.problem)?;
    let config = LbfgsConfig::default()
        .with_strategy(job.strategy, job.difference)
        .with_budget(job.budget);
    let noise = if job.eps_f > 0.0 {
        NoiseSpec::uniform(job.eps_f, job.seed)
    } else {
        NoiseSpec::noiseless()
    };
    let run = minimize(&problem, noise, &config)
        .with_context(|| format!("minimizing {}", job.problem))?;
    let record = LbfgsRecord {
        problem: problem.name(),
        n: problem.dim(),
        strategy: strategy_name(&job.strategy),
        difference: difference_name(job.difference).into(),
        eps_f: job.eps_f,
        seed: job.seed,
        evaluations: run.evaluations,
        iterations: run.iterates.iter().filter(|r| r.case.is_some()).count(),
        final_gap: run.final_gap(),
        status: run.status.as_str().into(),
    };
    Ok((run, record))
}

pub fn run_lbfgs_bench(jobs: &[LbfgsJob]) -> Result<Vec<LbfgsRecord>> {
    jobs.par_iter()
        .map(|j| run_lbfgs(j).map(|(_, r)| r))
        .collect()
}

/// Whether a converged row's final ratio lies in the band of its scheme.
pub fn converged_row_in_band(record: &CsvRecord) -> Result<bool> {
    if record.status != SearchStatus::Converged.as_str() {
        return Ok(true);
    }
    let scheme = scheme(&record.scheme)?;
    let ratio = testing_ratio(&scheme, None)?;
    let bounds = fdstep::RatioBounds::for_ratio(&ratio)?;
    Ok(record.final_ratio.is_some_and(|r| bounds.contains(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::to_csv_string;

    #[test]
    fn sin_at_origin_contrasts_the_methods() {
        let rows = run_table9(&[0.0], &[1e-8], 0).unwrap();
        let row = &rows[0];
        assert_eq!(row.mw.status, "Failure");
        assert_eq!(row.adaptive.record.status, "Converged");
        let h = row.adaptive.record.h_dagger.unwrap();
        assert!((1e-3..1e-2).contains(&h), "{h}");
        assert!(row.adaptive.record.relative_error.unwrap() <= 1e-3);
    }

    #[test]
    fn cubic_with_four_point_forward_takes_a_large_interval() {
        let job = EstimateJob::new(
            "table8",
            UnivariateFunction::cubic(),
            1e-9,
            1e-3,
            "FD_4P",
            0,
        );
        let out = run_estimate(&job).unwrap();
        assert!(out.record.h_dagger.unwrap() >= 1e2);
        assert!(out.record.relative_error.unwrap() <= 1e-4);
    }

    #[test]
    fn rows_are_deterministic_and_ordered() {
        let jobs = table5_jobs(&[1e-6, 1e-2], &SCHEMES, &[3, 4]);
        let a = run_estimates(&jobs).unwrap();
        let b = run_estimates(&jobs).unwrap();
        let ra: Vec<_> = a.iter().map(|o| o.record.clone()).collect();
        let rb: Vec<_> = b.iter().map(|o| o.record.clone()).collect();
        assert_eq!(
            to_csv_string(&CsvRecord::HEADER, &ra),
            to_csv_string(&CsvRecord::HEADER, &rb)
        );
        for (job, out) in jobs.iter().zip(&a) {
            assert_eq!(job.scheme, out.record.scheme);
            assert_eq!(job.seed, out.record.seed);
            assert!(converged_row_in_band(&out.record).unwrap());
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in ["fixed", "mw", "adaptive", "adaptive-cold", "step:0.001"] {
            assert_eq!(strategy_name(&parse_strategy(s).unwrap()), s);
        }
        assert!(parse_strategy("bogus").is_err());
    }
}
