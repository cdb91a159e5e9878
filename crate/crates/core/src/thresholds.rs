//! Critical family parameters and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::mermin_bound;
use crate::error::{Error, Result};
use crate::filtering::{apply_filters, theorem_bound, FilterTriple};
use crate::oracle::{maximize_mermin, OracleOptions};
use crate::qalg::DensityMatrix;
use crate::search::{optimize_filters, FilterObjective, FilterSearchOptions};
use crate::states::ParamFamily;

/// Margin above the classical bound 2 required to call a value a violation.
pub const VIOLATION_MARGIN: f64 = 1e-9;

pub fn is_violation(value: f64) -> bool {
    value > 2.0 + VIOLATION_MARGIN
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Unfiltered,
    Filtered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certifier {
    Bound,
    Oracle,
}

macro_rules! keyword_enum {
    ($ty:ty, $($name:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::InvalidOption(format!(
                        concat!("unknown value `{}`, expected one of:", $(" ", $name),+),
                        other
                    ))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(Mode, "unfiltered" => Mode::Unfiltered, "filtered" => Mode::Filtered);
keyword_enum!(Certifier, "bound" => Certifier::Bound, "oracle" => Certifier::Oracle);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub tol: f64,
    pub certify: Certifier,
    pub range: (f64, f64),
    /// Points in the monotonicity pre-sweep.
    pub grid_points: usize,
    pub oracle: OracleOptions,
    pub search: FilterSearchOptions,
    /// What the filter search maximises in filtered mode.
    pub objective: FilterObjective,
    /// Evaluate pre-sweep points on the rayon pool.
    pub parallel: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            certify: Certifier::Oracle,
            range: (0.0, 1.0),
            grid_points: 21,
            oracle: OracleOptions::default(),
            search: FilterSearchOptions::default(),
            objective: FilterObjective::PairBound,
            parallel: true,
        }
    }
}

/// Outcome of one probe of the violation indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub param: f64,
    pub value: f64,
    pub violation: bool,
    /// Normal-form `(l, m, n)` of the filters used; `(1,1,1)` when unfiltered.
    pub lmn: [f64; 3],
    /// Search parameters of those filters; all zero when unfiltered.
    pub params: Vec<f64>,
}

fn probe_state(rho: &DensityMatrix<f64>, param: f64, mode: Mode, opts: &ThresholdOptions) -> Result<Probe> {
    let (value, lmn, params) = match mode {
        Mode::Unfiltered => {
            let v = match opts.certify {
                Certifier::Bound => mermin_bound(rho),
                Certifier::Oracle => maximize_mermin(rho, &opts.oracle).value,
            };
            (v, [1.0; 3], vec![0.0; 3])
        }
        Mode::Filtered => {
            let found = optimize_filters(rho, opts.objective, &opts.search)?;
            let (filters, params) = if found.value.is_finite() {
                (found.best, found.params)
            } else {
                (FilterTriple::identity(), vec![0.0; opts.search.dimension()])
            };
            let v = match opts.certify {
                Certifier::Bound => match opts.objective {
                    FilterObjective::PairBound if found.value.is_finite() => found.value,
                    _ => theorem_bound(rho, &filters)?.pair_value,
                },
                Certifier::Oracle => match apply_filters(rho, &filters) {
                    Ok(out) => maximize_mermin(&out.rho_prime, &opts.oracle).value,
                    Err(_) => f64::NEG_INFINITY,
                },
            };
            (v, filters.diagonal_entries(), params)
        }
    };
    Ok(Probe {
        param,
        value,
        violation: is_violation(value),
        lmn,
        params,
    })
}

/// Evaluates the violation indicator of `family` at `param`.
pub fn probe(family: ParamFamily, param: f64, mode: Mode, opts: &ThresholdOptions) -> Result<Probe> {
    probe_state(&family.build(param)?, param, mode, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub family: ParamFamily,
    pub mode: Mode,
    pub certify: Certifier,
    /// Midpoint of the final bracket.
    pub critical: f64,
    /// Ascending `(lo, hi)` with `hi - lo ≤ tol`; the indicator differs at the two ends.
    pub bracket: (f64, f64),
    /// Whether the violating side is above the critical point.
    pub violation_above: bool,
    pub evaluations: usize,
    /// Pre-sweep probes in parameter order.
    pub grid: Vec<Probe>,
    /// Post-hoc re-evaluations at `bracket.0` and `bracket.1`.
    pub ends: (Probe, Probe),
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2) - 1;
    (0..=n)
        .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
        .collect()
}

/// Bisection for the parameter where the violation indicator switches.
///
/// A pre-sweep over `opts.grid_points` points checks the indicator switches
/// exactly once; the switching pair of grid points seeds the bisection.
pub fn critical_param(family: ParamFamily, mode: Mode, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    let (lo, hi) = opts.range;
    if !(lo < hi) || !(opts.tol > 0.0) {
        return Err(Error::InvalidOption(format!(
            "need lo < hi and tol > 0, got range {lo}:{hi} and tol {}",
            opts.tol
        )));
    }
    let params = linspace(lo, hi, opts.grid_points);
    let grid: Vec<Probe> = if opts.parallel {
        params
            .par_iter()
            .map(|&x| probe(family, x, mode, opts))
            .collect::<Result<_>>()?
    } else {
        params
            .iter()
            .map(|&x| probe(family, x, mode, opts))
            .collect::<Result<_>>()?
    };
    let mut evaluations = grid.len();

    let switches: Vec<usize> = (1..grid.len())
        .filter(|&k| grid[k].violation != grid[k - 1].violation)
        .collect();
    match switches.as_slice() {
        [] if grid[0].violation => return Err(Error::ViolationEverywhere { lo, hi }),
        [] => return Err(Error::NoViolationAnywhere { lo, hi }),
        [_] => {}
        _ => {
            return Err(Error::NonMonotoneIndicator {
                grid: grid.iter().map(|p| (p.param, p.violation)).collect(),
            })
        }
    }
    let k = switches[0];
    let violation_above = grid[k].violation;
    let (mut a, mut b) = (grid[k - 1].param, grid[k].param);
    while b - a > opts.tol {
        let mid = 0.5 * (a + b);
        let p = probe(family, mid, mode, opts)?;
        evaluations += 1;
        if p.violation == violation_above {
            b = mid;
        } else {
            a = mid;
        }
    }
    let ends = (probe(family, a, mode, opts)?, probe(family, b, mode, opts)?);
    evaluations += 2;
    if ends.0.violation == ends.1.violation {
        return Err(Error::NonMonotoneIndicator {
            grid: vec![(a, ends.0.violation), (b, ends.1.violation)],
        });
    }
    Ok(ThresholdResult {
        family,
        mode,
        certify: opts.certify,
        critical: 0.5 * (a + b),
        bracket: (a, b),
        violation_above,
        evaluations,
        grid,
        ends,
    })
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub bound_unfiltered: f64,
    pub bound_filtered: f64,
    pub oracle_unfiltered: f64,
    pub oracle_filtered: f64,
    pub violation_unfiltered: bool,
    pub violation_filtered: bool,
    /// Normal-form `(l, m, n)` of the best filters.
    pub lmn: [f64; 3],
    /// Search parameters of the best filters (log values, then Euler angles if searched).
    pub filter_params: Vec<f64>,
}

pub const SWEEP_CSV_HEADER: &str = "param,bound_unfiltered,bound_filtered,oracle_unfiltered,oracle_filtered,violation_unfiltered,violation_filtered,l,m,n";

/// Grid `lo, lo+step, …` up to `hi` (included when it lies on the grid).
pub fn sweep_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo < hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidOption(format!(
            "sweep needs lo < hi and step > 0, got {lo}:{hi}:{step}"
        )));
    }
    let span = (hi - lo) / step;
    let n = (span + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let x = lo + k as f64 * step;
            if (x - hi).abs() <= 1e-9 * step {
                hi
            } else {
                x
            }
        })
        .collect())
}

pub fn sweep_row(family: ParamFamily, param: f64, opts: &ThresholdOptions) -> Result<SweepRow> {
    let rho = family.build(param)?;
    let bound_unfiltered = mermin_bound(&rho);
    let oracle_unfiltered = maximize_mermin(&rho, &opts.oracle).value;

    let found = optimize_filters(&rho, opts.objective, &opts.search)?;
    let (filters, filter_params) = if found.value.is_finite() {
        (found.best, found.params)
    } else {
        (FilterTriple::identity(), vec![0.0; opts.search.dimension()])
    };
    let bound_filtered = theorem_bound(&rho, &filters)?.bound;
    let oracle_filtered = maximize_mermin(&apply_filters(&rho, &filters)?.rho_prime, &opts.oracle).value;
    Ok(SweepRow {
        param,
        bound_unfiltered,
        bound_filtered,
        oracle_unfiltered,
        oracle_filtered,
        violation_unfiltered: is_violation(oracle_unfiltered),
        violation_filtered: is_violation(oracle_filtered),
        lmn: filters.diagonal_entries(),
        filter_params,
    })
}

/// Rows in parameter order regardless of how they were scheduled.
pub fn sweep(family: ParamFamily, range: (f64, f64), step: f64, opts: &ThresholdOptions) -> Result<Vec<SweepRow>> {
    let grid = sweep_grid(range.0, range.1, step)?;
    if opts.parallel {
        grid.par_iter().map(|&x| sweep_row(family, x, opts)).collect()
    } else {
        grid.iter().map(|&x| sweep_row(family, x, opts)).collect()
    }
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.param,
            r.bound_unfiltered,
            r.bound_filtered,
            r.oracle_unfiltered,
            r.oracle_filtered,
            u8::from(r.violation_unfiltered),
            u8::from(r.violation_filtered),
            r.lmn[0],
            r.lmn[1],
            r.lmn[2],
        ));
    }
    out
}
