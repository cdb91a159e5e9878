use serde::Serialize;
use serde_json::Value;

use mermin_core::qalg::ComplexMatrix;
use mermin_core::search::RestartLog;
use mermin_core::thresholds::{Probe, SweepRow, SWEEP_CSV_HEADER};
use mermin_core::FilterTriple64;

use crate::args::FormatArg;

/// `|bound - oracle|` at or below which a bound counts as attained.
pub const TIGHT_TOL: f64 = 1e-4;

pub fn is_tight(bound: f64, oracle: f64) -> bool {
    (bound - oracle).abs() <= TIGHT_TOL
}

#[derive(Serialize)]
pub struct Report<R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub restarts: usize,
    pub state: String,
    pub result: R,
}

#[derive(Serialize)]
pub struct BoundResult {
    pub singular_values: [f64; 3],
    pub bound: f64,
    pub pair_value: f64,
    pub pair_is_max: bool,
    pub degeneracy_gap: f64,
    pub oracle: f64,
    pub tight: bool,
}

#[derive(Serialize)]
pub struct FilterInfo {
    pub lmn: [f64; 3],
    pub diagonal: bool,
    /// Normal-form operators `U diag(l,1) U†` as `[re, im]` entries.
    pub operators: [[[[f64; 2]; 2]; 2]; 3],
}

impl FilterInfo {
    pub fn new(f: &FilterTriple64) -> Self {
        let pack = |m: &ComplexMatrix<f64>| {
            let mut out = [[[0.0; 2]; 2]; 2];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e = [m[(i, j)].re, m[(i, j)].im];
                }
            }
            out
        };
        let ops = f.operators();
        Self {
            lmn: f.diagonal_entries(),
            diagonal: f.parties().iter().all(|p| p.is_diagonal()),
            operators: [pack(&ops[0]), pack(&ops[1]), pack(&ops[2])],
        }
    }
}

#[derive(Serialize)]
pub struct FilteredBoundResult {
    pub filters: FilterInfo,
    pub normalization: f64,
    pub singular_values: [f64; 3],
    pub bound: f64,
    pub pair_value: f64,
    pub pair_is_max: bool,
    pub degeneracy_gap: f64,
    pub oracle: f64,
    pub tight: bool,
}

#[derive(Serialize)]
pub struct Settings {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
    pub c: [f64; 3],
    pub c_prime: [f64; 3],
}

impl From<[[f64; 3]; 6]> for Settings {
    fn from(v: [[f64; 3]; 6]) -> Self {
        Self {
            a: v[0],
            a_prime: v[1],
            b: v[2],
            b_prime: v[3],
            c: v[4],
            c_prime: v[5],
        }
    }
}

#[derive(Serialize)]
pub struct OracleReport {
    pub inequality: &'static str,
    pub value: f64,
    pub classical_bound: f64,
    pub violation: bool,
    /// Mermin singular-value bound; absent for Svetlichny.
    pub bound: Option<f64>,
    pub tight: Option<bool>,
    pub settings: Settings,
    pub iterations: usize,
    pub best_restart: usize,
}

#[derive(Serialize)]
pub struct OptimizeResult {
    pub objective: &'static str,
    pub include_unitaries: bool,
    pub filter_restarts: usize,
    pub value: Option<f64>,
    pub best_restart: usize,
    pub params: Vec<f64>,
    pub filters: FilterInfo,
    pub bound: f64,
    pub oracle: f64,
    pub tight: bool,
    pub violation: bool,
    pub trace: Vec<RestartLog>,
}

#[derive(Serialize)]
pub struct ThresholdReport {
    pub family: &'static str,
    pub parameter: &'static str,
    pub mode: String,
    pub certify: String,
    pub objective: &'static str,
    pub include_unitaries: bool,
    pub tol: f64,
    pub range: [f64; 2],
    pub critical: f64,
    pub bracket: [f64; 2],
    pub violation_above: bool,
    pub evaluations: usize,
    /// Both values at the violating end of the bracket, with its filters.
    pub bound: f64,
    pub oracle: f64,
    pub tight: bool,
    pub grid: Vec<Probe>,
    pub ends: [Probe; 2],
}

#[derive(Serialize)]
pub struct SweepEntry {
    #[serde(flatten)]
    pub row: SweepRow,
    pub tight_unfiltered: bool,
    pub tight_filtered: bool,
}

#[derive(Serialize)]
pub struct SweepReport {
    pub family: &'static str,
    pub parameter: &'static str,
    pub range: [f64; 3],
    pub objective: &'static str,
    pub include_unitaries: bool,
    pub rows: Vec<SweepEntry>,
}

#[derive(Serialize)]
pub struct ValidateResult {
    pub valid: bool,
    pub dim: usize,
    pub trace: f64,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
    pub bound: f64,
    pub oracle: f64,
    pub tight: bool,
}

/// Renders a report. Sweeps have their own CSV and text layout.
pub fn render<R: Serialize>(report: &Report<R>, format: FormatArg, sweep_rows: Option<&[SweepRow]>) -> String {
    match format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialise");
            s.push('\n');
            s
        }
        FormatArg::Csv => match sweep_rows {
            Some(rows) => mermin_core::thresholds::sweep_to_csv(rows),
            None => {
                let mut out = String::from("key,value\n");
                for (k, v) in flatten(report) {
                    out.push_str(&format!("{k},{v}\n"));
                }
                out
            }
        },
        FormatArg::Text => {
            let mut out = format!(
                "# mermin {} {} | seed={} restarts={} | state={}\n",
                report.command, report.version, report.seed, report.restarts, report.state
            );
            match sweep_rows {
                Some(rows) => out.push_str(&sweep_table(rows)),
                None => {
                    let value = serde_json::to_value(&report.result).expect("reports serialise");
                    let mut pairs = Vec::new();
                    flatten_into("", &value, &mut pairs);
                    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                    for (k, v) in pairs {
                        out.push_str(&format!("{k:<width$}  {v}\n"));
                    }
                }
            }
            out
        }
    }
}

fn flatten<R: Serialize>(report: &Report<R>) -> Vec<(String, String)> {
    let value = serde_json::to_value(report).expect("reports serialise");
    let mut out = Vec::new();
    flatten_into("", &value, &mut out);
    out
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten_into(&key(k), inner, out);
            }
        }
        Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten_into(&key(&i.to_string()), inner, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let columns: Vec<&str> = SWEEP_CSV_HEADER.split(',').collect();
    let csv = mermin_core::thresholds::sweep_to_csv(rows);
    let cells: Vec<Vec<String>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| shorten(c)).collect())
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cols: Vec<&str>| {
        cols.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&line(columns.clone()));
    out.push('\n');
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

fn shorten(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(v) if cell.contains('.') || cell.contains('e') => format!("{v:.6}"),
        _ => cell.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_paths() {
        let v = serde_json::json!({"a": {"b": [1.5, true]}, "c": "x"});
        let mut out = Vec::new();
        flatten_into("", &v, &mut out);
        assert_eq!(
            out,
            vec![
                ("a.b.0".to_string(), "1.5".to_string()),
                ("a.b.1".to_string(), "true".to_string()),
                ("c".to_string(), "x".to_string()),
            ]
        );
    }

    #[test]
    fn tightness() {
        assert!(is_tight(2.4, 2.39995));
        assert!(!is_tight(2.828, 2.0));
    }
}
