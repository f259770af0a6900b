//! CSV row types. Column order is fixed by field order.

use std::io::Write;

use serde::Serialize;

/// One interval-estimation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRecord {
    pub experiment: String,
    pub scheme: String,
    pub problem: String,
    pub t: f64,
    pub eps_f: f64,
    pub h_dagger: Option<f64>,
    pub h_star_reference: Option<f64>,
    pub final_ratio: Option<f64>,
    pub iters: usize,
    pub new_evals: u64,
    pub status: String,
    pub relative_error: Option<f64>,
    pub worst_case_relative_error: Option<f64>,
    pub seed: u64,
}

impl CsvRecord {
    pub const HEADER: [&'static str; 14] = [
        "experiment",
        "scheme",
        "problem",
        "t",
        "eps_f",
        "h_dagger",
        "h_star_reference",
        "final_ratio",
        "iters",
        "new_evals",
        "status",
        "relative_error",
        "worst_case_relative_error",
        "seed",
    ];
}

/// One optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbfgsRecord {
    pub problem: String,
    pub n: usize,
    pub strategy: String,
    pub difference: String,
    pub eps_f: f64,
    pub seed: u64,
    pub evaluations: u64,
    pub iterations: usize,
    pub final_gap: f64,
    pub status: String,
}

impl LbfgsRecord {
    pub const HEADER: [&'static str; 10] = [
        "problem",
        "n",
        "strategy",
        "difference",
        "eps_f",
        "seed",
        "evaluations",
        "iterations",
        "final_gap",
        "status",
    ];
}

/// One optimizer iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub evals: u64,
    pub true_gap: f64,
    pub step: f64,
    pub status: String,
}

impl TraceRecord {
    pub const HEADER: [&'static str; 5] = ["k", "evals", "true_gap", "step", "status"];
}

/// A point of a `δ_S(h)` curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub problem: String,
    pub scheme: String,
    pub t: f64,
    pub eps_f: f64,
    pub h: f64,
    pub delta: f64,
}

impl CurvePoint {
    pub const HEADER: [&'static str; 6] = ["problem", "scheme", "t", "eps_f", "h", "delta"];
}

/// JSON view of a search result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSummary {
    pub h_dagger: f64,
    pub final_ratio: f64,
    pub iterations: usize,
    pub new_evals: u64,
    pub cached_hits: u64,
    pub status: String,
    pub lower: f64,
    /// `None` when no upper bracket was found.
    pub upper: Option<f64>,
    pub r_l: f64,
    pub r_u: f64,
}

impl SearchSummary {
    pub fn new(r: &fdstep::SearchResult, bounds: &fdstep::RatioBounds) -> Self {
        Self {
            h_dagger: r.h_dagger,
            final_ratio: r.final_ratio,
            iterations: r.iterations,
            new_evals: r.new_evals,
            cached_hits: r.cached_hits,
            status: r.status.as_str().into(),
            lower: r.lower,
            upper: r.upper.is_finite().then_some(r.upper),
            r_l: bounds.lower(),
            r_u: bounds.upper(),
        }
    }
}

/// Writes the header, then one row per record. An empty slice yields the
/// header alone.
pub fn write_csv<W: Write, R: Serialize>(
    out: W,
    header: &[&str],
    rows: &[R],
) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv_string<R: Serialize>(header: &[&str], rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let s = to_csv_string::<CsvRecord>(&CsvRecord::HEADER, &[]);
        assert_eq!(s, CsvRecord::HEADER.join(",") + "\n");
    }

    #[test]
    fn missing_values_are_blank() {
        let row = CsvRecord {
            experiment: "table9".into(),
            scheme: "MW".into(),
            problem: "sin".into(),
            t: 0.0,
            eps_f: 1e-8,
            h_dagger: None,
            h_star_reference: Some(1.0),
            final_ratio: None,
            iters: 3,
            new_evals: 4,
            status: "Failure".into(),
            relative_error: None,
            worst_case_relative_error: None,
            seed: 7,
        };
        let s = to_csv_string(&CsvRecord::HEADER, &[row]);
        assert_eq!(
            s.lines().nth(1).unwrap(),
            "table9,MW,sin,0.0,1e-8,,1.0,,3,4,Failure,,,7"
        );
    }
}
