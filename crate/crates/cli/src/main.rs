use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fdstep::problems::{multivariate_registry, univariate_registry, Problem, UnivariateFunction};
use fdstep::scheme::derive_weights;
use fdstep::{RatioBounds, Rational};
use fdstep_cli::experiments::{self, EstimateJob, LbfgsJob};
use fdstep_cli::records::{
    to_csv_string, CsvRecord, CurvePoint, LbfgsRecord, SearchSummary, TraceRecord,
};

#[derive(Parser)]
#[command(
    name = "fdstep",
    version,
    about = "Adaptive finite-difference intervals for noisy functions"
)]
struct Cli {
    /// Base noise seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write outputs into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also emit δ_S(h) curves for each (function, scheme, ε_f).
    #[arg(long, global = true)]
    plot_data: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Derive stencil weights and the generated testing ratio.
    DeriveScheme {
        /// Derivative order.
        #[arg(long)]
        order: u32,
        /// Comma-separated shifts, e.g. `-1,0,1` or `0,1/2,1`.
        #[arg(long, allow_hyphen_values = true)]
        shifts: String,
        /// Dilation factor; defaults to the smallest integer with r* > 2.
        #[arg(long)]
        alpha: Option<i128>,
    },
    /// Run one interval search on a univariate function.
    Estimate {
        #[arg(long)]
        problem: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        eps_f: f64,
        #[arg(long, default_value = "FD")]
        scheme: String,
        #[arg(long)]
        alpha: Option<i128>,
        #[arg(long)]
        h0: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Minimize a registry problem with finite-difference L-BFGS.
    Minimize {
        /// `NAME[:dim]`.
        #[arg(long)]
        problem: String,
        #[arg(long)]
        n: Option<usize>,
        /// Zero runs without noise.
        #[arg(long)]
        eps_f: f64,
        /// fixed, mw, adaptive, adaptive-cold or step:H.
        #[arg(long, default_value = "adaptive")]
        strategy: String,
        /// fd or cd.
        #[arg(long, default_value = "fd")]
        scheme: String,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Reproduce a results table.
    Bench {
        #[command(subcommand)]
        table: Bench,
    },
    /// Registry contents.
    Problems {
        #[command(subcommand)]
        action: ProblemsAction,
    },
}

#[derive(Args, Clone)]
struct MatrixArgs {
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',')]
    eps_f: Option<Vec<f64>>,
    /// Comma-separated scheme labels.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Number of seeds, counting up from `--seed`.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Subcommand)]
enum Bench {
    /// cos at t = 1 over noise levels and schemes.
    Table5(MatrixArgs),
    /// Difficult examples at one noise level.
    Table8(MatrixArgs),
    /// Moré–Wild against the adaptive search on sin near 0.
    Table9 {
        #[arg(long, value_delimiter = ',')]
        eps_f: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
    },
    /// L-BFGS runs over problems, strategies and seeds.
    Lbfgs {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "ARWHEAD:100,TRIDIA:100,WOODS:100"
        )]
        problems: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-3")]
        eps_f: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "fixed,mw,adaptive")]
        strategies: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "fd")]
        schemes: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum ProblemsAction {
    List,
}

struct Output<'a> {
    dir: Option<&'a Path>,
    format: Format,
}

impl Output<'_> {
    fn emit_text(&self, name: &str, text: &str) -> Result<()> {
        match self.dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(name);
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn emit_rows<R: Serialize>(&self, stem: &str, header: &[&str], rows: &[R]) -> Result<()> {
        match self.format {
            Format::Csv => self.emit_text(&format!("{stem}.csv"), &to_csv_string(header, rows)),
            Format::Json => {
                let text = serde_json::to_string_pretty(rows)? + "\n";
                self.emit_text(&format!("{stem}.json"), &text)
            }
        }
    }

    fn emit_json<T: Serialize>(&self, stem: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.emit_text(&format!("{stem}.json"), &text)
    }
}

fn seeds(base: u64, count: u64) -> Vec<u64> {
    (base..base + count.max(1)).collect()
}

fn scheme_list(requested: &Option<Vec<String>>) -> Vec<String> {
    requested
        .clone()
        .unwrap_or_else(|| experiments::SCHEMES.iter().map(|s| s.to_string()).collect())
}

fn emit_estimates(out: &Output, stem: &str, jobs: &[EstimateJob], plot: bool) -> Result<()> {
    let outcomes = experiments::run_estimates(jobs)?;
    let rows: Vec<CsvRecord> = outcomes.into_iter().map(|o| o.record).collect();
    out.emit_rows(stem, &CsvRecord::HEADER, &rows)?;
    if plot {
        let curves = experiments::plot_data(jobs)?;
        out.emit_rows(&format!("{stem}_plot"), &CurvePoint::HEADER, &curves)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SchemeReport {
    order: u32,
    shifts: Vec<String>,
    weights: Vec<String>,
    remainder_order: u32,
    remainder_constant: String,
    alpha: String,
    ratio_shifts: Vec<String>,
    ratio_weights: Vec<String>,
    ratio_remainder_constant: String,
    r_star: f64,
    r_l: f64,
    r_u: f64,
}

fn derive_scheme(order: u32, shifts: &str, alpha: Option<i128>) -> Result<SchemeReport> {
    let shifts: Vec<Rational> = shifts
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Rational>()
                .map_err(|_| anyhow!("shift {s:?} is not an integer or fraction p/q"))
        })
        .collect::<Result<_>>()?;
    let scheme = derive_weights(order, &shifts)?;
    let ratio = experiments::testing_ratio(&scheme, alpha)?;
    let bounds = RatioBounds::for_ratio(&ratio)?;
    let show = |v: &[Rational]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>();
    Ok(SchemeReport {
        order,
        shifts: show(scheme.shifts()),
        weights: show(scheme.weights()),
        remainder_order: scheme.remainder_order(),
        remainder_constant: scheme.remainder_constant().to_string(),
        alpha: ratio.alpha().to_string(),
        ratio_shifts: show(ratio.shifts()),
        ratio_weights: show(ratio.weights()),
        ratio_remainder_constant: ratio.remainder_constant().to_string(),
        r_star: ratio.optimal_ratio(),
        r_l: bounds.lower(),
        r_u: bounds.upper(),
    })
}

#[derive(Serialize)]
struct MinimizeSummary {
    #[serde(flatten)]
    record: LbfgsRecord,
    final_f: f64,
    line_search_fallbacks: usize,
    final_x: Vec<f64>,
}

#[derive(Serialize)]
struct ProblemEntry {
    name: String,
    dim: usize,
    phi_star: Option<f64>,
}

fn run(cli: Cli) -> Result<()> {
    let out = Output {
        dir: cli.out.as_deref(),
        format: cli.format,
    };
    match cli.command {
        Command::DeriveScheme {
            order,
            shifts,
            alpha,
        } => out.emit_json("scheme", &derive_scheme(order, &shifts, alpha)?),
        Command::Estimate {
            problem,
            t,
            eps_f,
            scheme,
            alpha,
            h0,
            max_iter,
        } => {
            if !(eps_f > 0.0) {
                bail!("--eps-f must be positive");
            }
            let function = UnivariateFunction::parse(&problem)?;
            let mut job = EstimateJob::new("estimate", function, t, eps_f, &scheme, cli.seed);
            job.alpha = alpha;
            job.h0 = h0;
            job.max_iter = max_iter;
            let outcome = experiments::run_estimate(&job)?;
            if let Some(r) = &outcome.result {
                out.emit_json("estimate", &SearchSummary::new(r, &outcome.config.bounds))?;
            }
            let row = [
                outcome.record.scheme.clone(),
                t.to_string(),
                eps_f.to_string(),
                outcome
                    .record
                    .h_dagger
                    .map_or(String::new(), |h| h.to_string()),
                outcome
                    .record
                    .final_ratio
                    .map_or(String::new(), |r| r.to_string()),
                outcome.record.iters.to_string(),
                outcome.record.new_evals.to_string(),
                outcome.record.status.clone(),
            ];
            let header = "scheme,t,eps_f,h_dagger,ratio,iters,new_evals,status";
            out.emit_text("estimate.csv", &format!("{header}\n{}\n", row.join(",")))
        }
        Command::Minimize {
            problem,
            n,
            eps_f,
            strategy,
            scheme,
            budget,
        } => {
            let spec = match n {
                Some(n) => format!("{}:{n}", problem.split(':').next().unwrap_or(&problem)),
                None => problem,
            };
            let job = LbfgsJob {
                problem: spec,
                eps_f,
                strategy: experiments::parse_strategy(&strategy)?,
                difference: experiments::parse_difference(&scheme)?,
                seed: cli.seed,
                budget,
            };
            let (run, record) = experiments::run_lbfgs(&job)?;
            let status = run.status.as_str();
            let trace: Vec<TraceRecord> = run
                .iterates
                .iter()
                .map(|r| TraceRecord {
                    k: r.k,
                    evals: r.evals,
                    true_gap: r.gap,
                    step: r.step,
                    status: status.into(),
                })
                .collect();
            out.emit_rows("minimize_trace", &TraceRecord::HEADER, &trace)?;
            out.emit_json(
                "minimize_summary",
                &MinimizeSummary {
                    record,
                    final_f: run.final_f,
                    line_search_fallbacks: run.line_search_fallbacks,
                    final_x: run.final_x,
                },
            )
        }
        Command::Bench { table } => match table {
            Bench::Table5(args) => {
                let eps = args
                    .eps_f
                    .clone()
                    .unwrap_or_else(|| (1..=8).rev().map(|k| 10f64.powi(-k)).collect());
                let schemes = scheme_list(&args.schemes);
                let labels: Vec<&str> = schemes.iter().map(String::as_str).collect();
                let jobs = experiments::table5_jobs(&eps, &labels, &seeds(cli.seed, args.seeds));
                emit_estimates(&out, "table5", &jobs, cli.plot_data)
            }
            Bench::Table8(args) => {
                let eps = args.eps_f.clone().unwrap_or_else(|| vec![1e-3]);
                let schemes = scheme_list(&args.schemes);
                let labels: Vec<&str> = schemes.iter().map(String::as_str).collect();
                let mut jobs = Vec::new();
                for e in eps {
                    jobs.extend(experiments::table8_jobs(
                        e,
                        &labels,
                        &seeds(cli.seed, args.seeds),
                    ));
                }
                emit_estimates(&out, "table8", &jobs, cli.plot_data)
            }
            Bench::Table9 { eps_f, t } => {
                let eps = eps_f.unwrap_or_else(|| experiments::TABLE9_EPS.to_vec());
                let ts = t.unwrap_or_else(|| experiments::TABLE9_T.to_vec());
                let rows = experiments::run_table9(&ts, &eps, cli.seed)?;
                out.emit_rows(
                    "table9",
                    &CsvRecord::HEADER,
                    &experiments::table9_records(&rows),
                )
            }
            Bench::Lbfgs {
                problems,
                eps_f,
                strategies,
                schemes,
                seeds: count,
                budget,
            } => {
                let mut jobs = Vec::new();
                for problem in &problems {
                    for &eps in &eps_f {
                        for strategy in &strategies {
                            for scheme in &schemes {
                                for seed in seeds(cli.seed, count) {
                                    jobs.push(LbfgsJob {
                                        problem: problem.clone(),
                                        eps_f: eps,
                                        strategy: experiments::parse_strategy(strategy)?,
                                        difference: experiments::parse_difference(scheme)?,
                                        seed,
                                        budget,
                                    });
                                }
                            }
                        }
                    }
                }
                let rows = experiments::run_lbfgs_bench(&jobs)?;
                out.emit_rows("lbfgs", &LbfgsRecord::HEADER, &rows)
            }
        },
        Command::Problems {
            action: ProblemsAction::List,
        } => {
            let mut entries: Vec<ProblemEntry> = multivariate_registry()
                .iter()
                .map(|p| ProblemEntry {
                    name: p.name(),
                    dim: p.dim(),
                    phi_star: p.optimal_value(),
                })
                .collect();
            entries.extend(
                univariate_registry()
                    .into_iter()
                    .map(|(name, _)| ProblemEntry {
                        name: name.into(),
                        dim: 1,
                        phi_star: None,
                    }),
            );
            out.emit_rows("problems", &["name", "dim", "phi_star"], &entries)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
