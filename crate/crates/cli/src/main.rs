mod args;
mod report;

use std::fmt;
use std::fs;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use mermin_core::correlation::{correlation_tensor, fold, mermin_bound, pair_bound, singular_triple};
use mermin_core::filtering::{apply_filters, theorem_bound, FilterTriple};
use mermin_core::format::{filters_to_string, load_filters, parse_matrix};
use mermin_core::oracle::{maximize_mermin, maximize_svetlichny, BellInequality, OracleOptions};
use mermin_core::qalg::{validate_density, DensityMatrix};
use mermin_core::search::{filters_from_params, optimize_filters, FilterObjective, FilterSearchOptions};
use mermin_core::states::{ParamFamily, StateFamily};
use mermin_core::thresholds::{critical_param, sweep, Certifier, Mode, ThresholdOptions};
use mermin_core::{DensityMatrix64, FilterTriple64};

use args::{CertifyArg, Cli, Command, FormatArg, InequalityArg, ModeArg, ObjectiveArg, Opts, StateArg};
use report::*;

enum Failure {
    Usage(String),
    Compute(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Compute(m) => f.write_str(m),
        }
    }
}

impl From<mermin_core::Error> for Failure {
    fn from(e: mermin_core::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.command.opts().jobs;
    let run = || execute(&cli.command);
    let result = match jobs {
        Some(0) => usage("--jobs must be at least 1"),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Failure::Compute(format!("cannot start worker pool: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn execute(cmd: &Command) -> Outcome<()> {
    let o = cmd.opts();
    let name = cmd.name();
    match cmd {
        Command::Bound(_) => bound(name, o),
        Command::FilteredBound(_) => filtered_bound(name, o),
        Command::Oracle(_) => oracle(name, o),
        Command::OptimizeFilter(_) => optimize_filter(name, o),
        Command::Threshold(_) => threshold(name, o),
        Command::Sweep(_) => run_sweep(name, o),
        Command::Validate(_) => validate(name, o),
    }
}

fn state_family(o: &Opts) -> Outcome<StateFamily> {
    let need = |v: Option<f64>, flag: &str, state: &str| match v {
        Some(x) => Ok(x),
        None => usage(format!("--state {state} needs --{flag}")),
    };
    Ok(match o.state {
        None => return usage("--state is required"),
        Some(StateArg::Ghz) => StateFamily::Ghz,
        Some(StateArg::NoisyGhz) => StateFamily::Param(ParamFamily::NoisyGhz, need(o.p, "p", "noisy-ghz")?),
        Some(StateArg::PsiPi8) => StateFamily::Param(ParamFamily::PsiPi8, need(o.p, "p", "psi-pi8")?),
        Some(StateArg::AdGhz) => StateFamily::Param(ParamFamily::AdGhz, need(o.gamma, "gamma", "ad-ghz")?),
        Some(StateArg::File) => match &o.path {
            Some(p) => StateFamily::File(p.clone()),
            None => return usage("--state file needs --path"),
        },
    })
}

fn param_family(o: &Opts) -> Outcome<ParamFamily> {
    match o.state {
        Some(StateArg::NoisyGhz) => Ok(ParamFamily::NoisyGhz),
        Some(StateArg::PsiPi8) => Ok(ParamFamily::PsiPi8),
        Some(StateArg::AdGhz) => Ok(ParamFamily::AdGhz),
        Some(_) => usage("this command needs a parameterised family: noisy-ghz, psi-pi8 or ad-ghz"),
        None => usage("--state is required"),
    }
}

fn oracle_opts(o: &Opts) -> Outcome<OracleOptions> {
    if o.restarts == 0 {
        return usage("--restarts must be at least 1");
    }
    Ok(OracleOptions::with_seed(o.seed, o.restarts))
}

fn search_opts(o: &Opts) -> Outcome<FilterSearchOptions> {
    if o.filter_restarts == 0 || o.inner_restarts == 0 {
        return usage("--filter-restarts and --inner-restarts must be at least 1");
    }
    let mut s = FilterSearchOptions {
        restarts: o.filter_restarts,
        seed: o.seed,
        max_iters: o.max_iters,
        include_unitaries: o.include_unitaries,
        ..FilterSearchOptions::default()
    };
    s.inner_oracle.seed = o.seed;
    s.inner_oracle.restarts = o.inner_restarts;
    Ok(s)
}

fn objective(o: &Opts) -> FilterObjective {
    match o.objective {
        ObjectiveArg::PairBound => FilterObjective::PairBound,
        ObjectiveArg::Oracle => FilterObjective::Oracle,
    }
}

fn objective_name(obj: FilterObjective) -> &'static str {
    match obj {
        FilterObjective::PairBound => "pair-bound",
        FilterObjective::Oracle => "oracle",
    }
}

fn emit<R: Serialize>(o: &Opts, command: &'static str, state: String, result: R, default: FormatArg) -> Outcome<()> {
    emit_with(o, command, state, result, default, None)
}

fn emit_with<R: Serialize>(
    o: &Opts,
    command: &'static str,
    state: String,
    result: R,
    default: FormatArg,
    rows: Option<&[mermin_core::thresholds::SweepRow]>,
) -> Outcome<()> {
    let report = Report {
        tool: "mermin",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: o.seed,
        restarts: o.restarts,
        state,
        result,
    };
    let text = render(&report, o.format.unwrap_or(default), rows);
    match &o.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn bound(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = state_family(o)?;
    let opts = oracle_opts(o)?;
    let rho: DensityMatrix64 = family.build()?;
    let s = singular_triple(&fold(&correlation_tensor(&rho)));
    let pair = pair_bound(&rho);
    let b = mermin_bound(&rho);
    let oracle = maximize_mermin(&rho, &opts).value;
    let result = BoundResult {
        singular_values: s.values,
        bound: b,
        pair_value: pair.value,
        pair_is_max: pair.pair_is_max,
        degeneracy_gap: pair.degeneracy_gap,
        oracle,
        tight: is_tight(b, oracle),
    };
    emit(o, name, family.label(), result, FormatArg::Text)
}

fn filters_from_opts(o: &Opts) -> Outcome<FilterTriple64> {
    match (&o.filter, &o.filter_file) {
        (Some([l, m, n]), None) => Ok(FilterTriple::diagonal(*l, *m, *n)?),
        (None, Some(path)) => Ok(FilterTriple::from_raw(load_filters(path)?)?),
        (None, None) => usage("filtered-bound needs --filter l,m,n or --filter-file"),
        (Some(_), Some(_)) => usage("--filter and --filter-file are mutually exclusive"),
    }
}

fn filtered_bound(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = state_family(o)?;
    let opts = oracle_opts(o)?;
    let f = filters_from_opts(o)?;
    let rho: DensityMatrix64 = family.build()?;
    let r = theorem_bound(&rho, &f)?;
    let filtered = apply_filters(&rho, &f)?;
    let oracle = maximize_mermin(&filtered.rho_prime, &opts).value;
    let result = FilteredBoundResult {
        filters: FilterInfo::new(&f),
        normalization: r.normalization,
        singular_values: r.singular_values,
        bound: r.bound,
        pair_value: r.pair_value,
        pair_is_max: r.pair_is_max,
        degeneracy_gap: r.degeneracy_gap,
        oracle,
        tight: is_tight(r.bound, oracle),
    };
    emit(o, name, family.label(), result, FormatArg::Text)
}

fn oracle(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = state_family(o)?;
    let opts = oracle_opts(o)?;
    let rho: DensityMatrix64 = family.build()?;
    let (kind, res, bound) = match o.inequality {
        InequalityArg::Mermin => (BellInequality::Mermin, maximize_mermin(&rho, &opts), Some(mermin_bound(&rho))),
        InequalityArg::Svetlichny => (BellInequality::Svetlichny, maximize_svetlichny(&rho, &opts), None),
    };
    let classical = kind.classical_bound();
    let result = OracleReport {
        inequality: match kind {
            BellInequality::Mermin => "mermin",
            BellInequality::Svetlichny => "svetlichny",
        },
        value: res.value,
        classical_bound: classical,
        violation: res.value > classical + mermin_core::thresholds::VIOLATION_MARGIN,
        bound,
        tight: bound.map(|b| is_tight(b, res.value)),
        settings: res.settings.to_f64().into(),
        iterations: res.iterations,
        best_restart: res.best_restart,
    };
    emit(o, name, family.label(), result, FormatArg::Text)
}

fn optimize_filter(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = state_family(o)?;
    let opts = oracle_opts(o)?;
    let search = search_opts(o)?;
    let obj = objective(o);
    let rho: DensityMatrix64 = family.build()?;
    let found = optimize_filters(&rho, obj, &search)?;
    let (filters, value) = if found.value.is_finite() {
        (found.best, Some(found.value))
    } else {
        (FilterTriple::identity(), None)
    };
    let r = theorem_bound(&rho, &filters)?;
    let oracle = maximize_mermin(&apply_filters(&rho, &filters)?.rho_prime, &opts).value;
    if let Some(path) = &o.save_filters {
        fs::write(path, filters_to_string(&filters.operators()))
            .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
    }
    let result = OptimizeResult {
        objective: objective_name(obj),
        include_unitaries: search.include_unitaries,
        filter_restarts: search.restarts,
        value,
        best_restart: found.best_restart,
        params: found.params,
        filters: FilterInfo::new(&filters),
        bound: r.bound,
        oracle,
        tight: is_tight(r.bound, oracle),
        violation: mermin_core::thresholds::is_violation(oracle),
        trace: found.trace,
    };
    emit(o, name, family.label(), result, FormatArg::Text)
}

fn threshold_opts(o: &Opts, range: (f64, f64)) -> Outcome<ThresholdOptions> {
    Ok(ThresholdOptions {
        tol: o.tol,
        certify: match o.certify {
            CertifyArg::Bound => Certifier::Bound,
            CertifyArg::Oracle => Certifier::Oracle,
        },
        range,
        oracle: oracle_opts(o)?,
        search: search_opts(o)?,
        objective: objective(o),
        ..ThresholdOptions::default()
    })
}

fn threshold(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = param_family(o)?;
    let range = match o.range.as_ref().map(|r| r.0.as_slice()) {
        None => (0.0, 1.0),
        Some([lo, hi]) | Some([lo, hi, _]) => (*lo, *hi),
        Some(_) => return usage("--range must be lo:hi"),
    };
    if !(range.0 < range.1) {
        return usage("--range needs lo < hi");
    }
    if !(o.tol > 0.0) {
        return usage("--tol must be positive");
    }
    let mode = match o.mode {
        ModeArg::Unfiltered => Mode::Unfiltered,
        ModeArg::Filtered => Mode::Filtered,
    };
    let opts = threshold_opts(o, range)?;
    let r = critical_param(family, mode, &opts)?;

    let violating = if r.violation_above { &r.ends.1 } else { &r.ends.0 };
    let rho = family.build(violating.param)?;
    let filters = match mode {
        Mode::Unfiltered => FilterTriple::identity(),
        Mode::Filtered => filters_from_params(&violating.params)?,
    };
    let b = theorem_bound(&rho, &filters)?.bound;
    let oracle = maximize_mermin(&apply_filters(&rho, &filters)?.rho_prime, &opts.oracle).value;

    let result = ThresholdReport {
        family: family.name(),
        parameter: family.param_name(),
        mode: mode.to_string(),
        certify: opts.certify.to_string(),
        objective: objective_name(opts.objective),
        include_unitaries: opts.search.include_unitaries,
        tol: opts.tol,
        range: [range.0, range.1],
        critical: r.critical,
        bracket: [r.bracket.0, r.bracket.1],
        violation_above: r.violation_above,
        evaluations: r.evaluations,
        bound: b,
        oracle,
        tight: is_tight(b, oracle),
        grid: r.grid,
        ends: [r.ends.0, r.ends.1],
    };
    emit(o, name, family.name().to_string(), result, FormatArg::Text)
}

fn run_sweep(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = param_family(o)?;
    let (lo, hi, step) = match o.range.as_ref().map(|r| r.0.as_slice()) {
        None => (0.0, 1.0, 0.05),
        Some([lo, hi, step]) => (*lo, *hi, *step),
        Some(_) => return usage("--range must be lo:hi:step for sweep"),
    };
    if !(lo < hi) || !(step > 0.0) {
        return usage("--range needs lo < hi and step > 0");
    }
    let opts = threshold_opts(o, (lo, hi))?;
    let rows = sweep(family, (lo, hi), step, &opts)?;
    let result = SweepReport {
        family: family.name(),
        parameter: family.param_name(),
        range: [lo, hi, step],
        objective: objective_name(opts.objective),
        include_unitaries: opts.search.include_unitaries,
        rows: rows
            .iter()
            .map(|r| SweepEntry {
                row: r.clone(),
                tight_unfiltered: is_tight(r.bound_unfiltered, r.oracle_unfiltered),
                tight_filtered: is_tight(r.bound_filtered, r.oracle_filtered),
            })
            .collect(),
    };
    emit_with(o, name, family.name().to_string(), result, FormatArg::Csv, Some(&rows))
}

fn validate(name: &'static str, o: &Opts) -> Outcome<()> {
    let family = state_family(o)?;
    let opts = oracle_opts(o)?;
    let (rho, raw): (DensityMatrix64, _) = match &family {
        StateFamily::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Compute(format!("cannot read {}: {e}", path.display())))?;
            let m = parse_matrix::<f64>(&text)?;
            if m.shape() != (8, 8) {
                return Err(Failure::Compute(format!(
                    "state must be 8x8, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            (validate_density(m.clone())?, m)
        }
        other => {
            let rho: DensityMatrix<f64> = other.build()?;
            let m = rho.matrix().clone();
            (rho, m)
        }
    };
    let b = mermin_bound(&rho);
    let oracle = maximize_mermin(&rho, &opts).value;
    let result = ValidateResult {
        valid: true,
        dim: raw.rows(),
        trace: raw.trace().re,
        hermitian_deviation: raw.hermitian_deviation(),
        min_eigenvalue: rho.min_eigenvalue(),
        purity: rho.purity(),
        bound: b,
        oracle,
        tight: is_tight(b, oracle),
    };
    emit(o, name, family.label(), result, FormatArg::Text)
}
