//! CSV emission. Every table starts with a comment line carrying the crate
//! version, a hash of the resolved configuration and the seed, so that a file
//! can be traced back to the run that produced it. Floats use the shortest
//! representation that round-trips, which keeps output byte-stable.

use crate::formulas::FormulaValue;
use crate::penalize::ConvergenceRow;
use crate::rng::fnv1a;
use crate::sim::SpiderPath;
use crate::stats::TestReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(config: &str) -> u64 {
    fnv1a(config.bytes())
}

/// The leading comment line, newline included.
pub fn header_line(config: &str, seed: u64) -> String {
    format!(
        "# walsh-spider {VERSION} config_hash={:016x} seed={seed}\n",
        config_hash(config)
    )
}

fn table(header: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(header.as_bytes().to_vec());
    w.write_record(columns).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub const PATH_COLUMNS: [&str; 6] = ["path_id", "t", "X", "N", "L", "touched_zero"];

/// One row per grid point per path. With `weights`, a trailing `weight`
/// column repeats each path's weight on all its rows.
pub fn paths_csv(header: &str, paths: &[SpiderPath], weights: Option<&[f64]>) -> String {
    let mut columns = PATH_COLUMNS.to_vec();
    if weights.is_some() {
        columns.push("weight");
    }
    let rows = paths.iter().enumerate().flat_map(|(id, p)| {
        (0..p.len()).map(move |i| {
            let mut row = vec![
                id.to_string(),
                num(p.times[i]),
                num(p.radial[i]),
                p.label[i].0.to_string(),
                num(p.local_time[i]),
                u8::from(p.touched_zero[i]).to_string(),
            ];
            if let Some(w) = weights {
                row.push(num(w[id]));
            }
            row
        })
    });
    table(header, &columns, rows)
}

/// Inputs and value of one formula evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaRow {
    pub formula: String,
    pub beta: f64,
    pub gamma: f64,
    pub x: f64,
    /// Starting ray, for formulas that depend on it.
    pub k: Option<usize>,
    pub t: f64,
    pub value: FormulaValue,
}

pub fn formulas_csv(header: &str, rows: &[FormulaRow]) -> String {
    table(
        header,
        &["formula", "beta", "gamma", "x", "k", "t", "value", "kind"],
        rows.iter().map(|r| {
            vec![
                r.formula.clone(),
                num(r.beta),
                num(r.gamma),
                num(r.x),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                num(r.t),
                num(r.value.value),
                r.value.kind.as_str().to_string(),
            ]
        }),
    )
}

pub fn convergence_csv(header: &str, rows: &[ConvergenceRow]) -> String {
    table(
        header,
        &["t", "estimate", "se", "ess", "limit_estimate", "limit_se"],
        rows.iter().map(|r| {
            vec![
                num(r.t),
                num(r.estimate),
                num(r.se),
                num(r.ess),
                num(r.limit_estimate),
                num(r.limit_se),
            ]
        }),
    )
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "suite",
    "name",
    "statistic",
    "p_value",
    "threshold",
    "passed",
    "n",
    "seed",
    "negative_control",
];

/// Test reports, each tagged with the suite that produced it.
pub fn reports_csv<'a>(
    header: &str,
    rows: impl IntoIterator<Item = (&'a str, &'a TestReport)>,
) -> String {
    table(
        header,
        &REPORT_COLUMNS,
        rows.into_iter().map(|(suite, r)| {
            vec![
                suite.to_string(),
                r.name.clone(),
                num(r.statistic),
                num(r.p_value),
                num(r.threshold),
                r.passed.to_string(),
                r.n.to_string(),
                r.seed.to_string(),
                r.negative_control.to_string(),
            ]
        }),
    )
}
