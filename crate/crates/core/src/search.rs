//! Multi-start search over local filters.
//!
//! Parameters are `[ln l, ln m, ln n]`, followed by ZYZ Euler angles
//! `(θ, φ, ψ)` for A, B and C when unitaries are searched.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::correlation_tensor;
use crate::error::{Error, Result};
use crate::filtering::{apply_filters, theorem_bound, FilterTriple, LocalFilter};
use crate::nelder_mead::{minimize, NelderMeadOptions};
use crate::oracle::{maximize_mermin, maximize_on_tensor, restart_rng, BellInequality, OracleOptions};
use crate::qalg::DensityMatrix;
use crate::scalar::Real;

/// Box on each log-parameter.
pub const LOG_BOUND: f64 = 7.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterObjective {
    /// `2√2 λ'_2` when the top pair of `D̃/F` is maximal, `-∞` otherwise.
    PairBound,
    /// Maximal Mermin value of the filtered state found by the oracle.
    Oracle,
}

impl std::str::FromStr for FilterObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair-bound" | "pair_bound" => Ok(Self::PairBound),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::InvalidOption(format!(
                "unknown objective `{other}` (pair-bound, oracle)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Simplex iterations per restart.
    pub max_iters: usize,
    pub include_unitaries: bool,
    pub initial_scale: f64,
    pub diameter_tol: f64,
    /// Half-width of the box random log-parameter starts are drawn from.
    pub start_spread: f64,
    /// Oracle used inside the `Oracle` objective.
    pub inner_oracle: OracleOptions,
    /// Run restarts on the rayon pool.
    pub parallel: bool,
}

impl Default for FilterSearchOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_iters: 4000,
            include_unitaries: false,
            initial_scale: 0.5,
            diameter_tol: 1e-9,
            start_spread: 2.0,
            inner_oracle: OracleOptions {
                restarts: 8,
                seed: 0,
                max_sweeps: 500,
                tol: 1e-10,
            },
            parallel: true,
        }
    }
}

impl FilterSearchOptions {
    pub fn dimension(&self) -> usize {
        if self.include_unitaries {
            12
        } else {
            3
        }
    }
}

/// One restart of the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: usize,
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSearchResult<T> {
    pub best: FilterTriple<T>,
    pub params: Vec<f64>,
    pub value: T,
    pub best_restart: usize,
    pub trace: Vec<RestartLog>,
}

/// Clamps the log-parameters into `[-7, 7]`.
pub fn project_params<T: Real>(x: &[T]) -> Vec<T> {
    let b = T::lit(LOG_BOUND);
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i < 3 { v.max(-b).min(b) } else { v })
        .collect()
}

/// Filters for a parameter vector of length 3 or 12 (projected first).
pub fn filters_from_params<T: Real>(x: &[T]) -> Result<FilterTriple<T>> {
    let x = project_params(x);
    match x.len() {
        3 => FilterTriple::diagonal(x[0].exp(), x[1].exp(), x[2].exp()),
        12 => {
            let party = |q: usize| {
                let a = &x[3 + 3 * q..6 + 3 * q];
                LocalFilter::from_euler(x[q].exp(), a[0], a[1], a[2])
            };
            Ok(FilterTriple {
                fa: party(0)?,
                fb: party(1)?,
                fc: party(2)?,
            })
        }
        n => Err(Error::InvalidOption(format!(
            "filter parameter vector has length {n}, expected 3 or 12"
        ))),
    }
}

/// Objective value for a filter triple; `-∞` on annihilation or an untight pair.
pub fn filter_objective<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FilterTriple<T>,
    objective: FilterObjective,
    inner: &OracleOptions,
) -> T {
    match objective {
        FilterObjective::PairBound => match theorem_bound(rho, f) {
            Ok(r) if r.pair_is_max => r.pair_value,
            _ => T::neg_infinity(),
        },
        FilterObjective::Oracle => match apply_filters(rho, f) {
            Ok(out) => maximize_on_tensor(BellInequality::Mermin, &correlation_tensor(&out.rho_prime), inner).value,
            Err(_) => T::neg_infinity(),
        },
    }
}

fn start_point(opts: &FilterSearchOptions, restart: usize) -> Vec<f64> {
    let dim = opts.dimension();
    if restart == 0 {
        return vec![0.0; dim];
    }
    let mut rng = restart_rng(opts.seed, restart);
    let s = opts.start_spread.abs().min(LOG_BOUND);
    (0..dim)
        .map(|i| {
            if i < 3 {
                if s > 0.0 {
                    rng.gen_range(-s..=s)
                } else {
                    0.0
                }
            } else {
                rng.gen_range(0.0..std::f64::consts::TAU)
            }
        })
        .collect()
}

fn run_restart<T: Real>(
    rho: &DensityMatrix<T>,
    objective: FilterObjective,
    opts: &FilterSearchOptions,
    restart: usize,
) -> RestartLog {
    let start = start_point(opts, restart);
    let x0: Vec<T> = start.iter().map(|&v| T::lit(v)).collect();
    let nm = NelderMeadOptions {
        initial_scale: T::lit(opts.initial_scale),
        max_iters: opts.max_iters,
        diameter_tol: T::lit(opts.diameter_tol),
    };
    let res = minimize(
        |x: &[T]| match filters_from_params(x) {
            Ok(f) => -filter_objective(rho, &f, objective, &opts.inner_oracle),
            Err(_) => T::infinity(),
        },
        &x0,
        &nm,
    );
    RestartLog {
        restart,
        start,
        params: project_params(&res.x).iter().map(|v| v.to_f64_lossy()).collect(),
        value: (-res.f).to_f64_lossy(),
        iterations: res.iterations,
        evaluations: res.evaluations,
        converged: res.converged,
    }
}

/// Multi-start Nelder–Mead maximisation of `objective` over local filters.
///
/// Restart 0 starts at the identity. The best restart wins, with the lowest
/// index breaking ties, so the result does not depend on scheduling. For the
/// `Oracle` objective the reported value is re-evaluated with the full
/// operator-based oracle at the winning filters.
pub fn optimize_filters<T: Real>(
    rho: &DensityMatrix<T>,
    objective: FilterObjective,
    opts: &FilterSearchOptions,
) -> Result<FilterSearchResult<T>> {
    if opts.restarts == 0 {
        return Err(Error::InvalidOption("restarts must be at least 1".into()));
    }
    let trace: Vec<RestartLog> = if opts.parallel {
        (0..opts.restarts)
            .into_par_iter()
            .map(|r| run_restart(rho, objective, opts, r))
            .collect()
    } else {
        (0..opts.restarts).map(|r| run_restart(rho, objective, opts, r)).collect()
    };

    let mut best = 0;
    for (i, log) in trace.iter().enumerate() {
        if log.value > trace[best].value {
            best = i;
        }
    }
    let params = trace[best].params.clone();
    let x: Vec<T> = params.iter().map(|&v| T::lit(v)).collect();
    let filters = filters_from_params(&x)?;
    let value = match objective {
        FilterObjective::PairBound => T::lit(trace[best].value),
        FilterObjective::Oracle => match apply_filters(rho, &filters) {
            Ok(out) => maximize_mermin(&out.rho_prime, &opts.inner_oracle).value,
            Err(_) => T::neg_infinity(),
        },
    };
    Ok(FilterSearchResult {
        best: filters,
        params,
        value,
        best_restart: best,
        trace,
    })
}
