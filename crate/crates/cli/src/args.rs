use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "mermin", version, about = "Mermin bounds, local filtering and violation thresholds for three-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Singular-value bound and oracle value of the unfiltered state.
    Bound(Opts),
    /// Bound of the state after the given local filters.
    FilteredBound(Opts),
    /// Brute-force maximum of the Mermin or Svetlichny expectation.
    Oracle(Opts),
    /// Search for local filters that maximise the filtered bound or oracle value.
    OptimizeFilter(Opts),
    /// Critical family parameter where the violation appears or disappears.
    Threshold(Opts),
    /// Bounds and oracle values over a parameter grid.
    Sweep(Opts),
    /// Check that a state is a valid density matrix.
    Validate(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound(_) => "bound",
            Command::FilteredBound(_) => "filtered-bound",
            Command::Oracle(_) => "oracle",
            Command::OptimizeFilter(_) => "optimize-filter",
            Command::Threshold(_) => "threshold",
            Command::Sweep(_) => "sweep",
            Command::Validate(_) => "validate",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Bound(o)
            | Command::FilteredBound(o)
            | Command::Oracle(o)
            | Command::OptimizeFilter(o)
            | Command::Threshold(o)
            | Command::Sweep(o)
            | Command::Validate(o) => o,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Ghz,
    NoisyGhz,
    PsiPi8,
    AdGhz,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Unfiltered,
    Filtered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CertifyArg {
    Bound,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    PairBound,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InequalityArg {
    Mermin,
    Svetlichny,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    /// Mixing parameter of noisy-ghz and psi-pi8.
    #[arg(long)]
    pub p: Option<f64>,
    /// Damping parameter of ad-ghz.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// State file for `--state file`.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Diagonal filters `l,m,n`.
    #[arg(long, value_parser = parse_lmn, conflicts_with = "filter_file")]
    pub filter: Option<[f64; 3]>,
    /// File with three 2x2 filter matrices.
    #[arg(long)]
    pub filter_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unfiltered")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "oracle")]
    pub certify: CertifyArg,
    /// Oracle restarts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// `lo:hi` for threshold, `lo:hi:step` for sweep.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<RangeSpec>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Search filter unitaries as well as the diagonal part.
    #[arg(long)]
    pub include_unitaries: bool,
    /// Upper limit on worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Quantity the filter search maximises.
    #[arg(long, value_enum, default_value = "pair-bound")]
    pub objective: ObjectiveArg,
    /// Filter-search restarts.
    #[arg(long, default_value_t = 20)]
    pub filter_restarts: usize,
    /// Simplex iterations per filter-search restart.
    #[arg(long, default_value_t = 4000)]
    pub max_iters: usize,
    /// Oracle restarts inside the `oracle` filter objective.
    #[arg(long, default_value_t = 8)]
    pub inner_restarts: usize,
    #[arg(long, value_enum, default_value = "mermin")]
    pub inequality: InequalityArg,
    /// Write the best filters found by optimize-filter to this file.
    #[arg(long)]
    pub save_filters: Option<PathBuf>,
}

fn parse_lmn(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected l,m,n but got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(parts) {
        let v: f64 = part.trim().parse().map_err(|_| format!("`{part}` is not a number"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("filter entries must be finite and non-negative, got {v}"));
        }
        *slot = v;
    }
    Ok(out)
}

/// Colon-separated `lo:hi` or `lo:hi:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSpec(pub Vec<f64>);

fn parse_range(s: &str) -> Result<RangeSpec, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    if !(2..=3).contains(&parts.len()) {
        return Err(format!("expected lo:hi or lo:hi:step but got `{s}`"));
    }
    if parts.iter().any(|v| !v.is_finite()) {
        return Err("range values must be finite".into());
    }
    Ok(RangeSpec(parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lmn_parsing() {
        assert_eq!(parse_lmn("2,1,0.5").unwrap(), [2.0, 1.0, 0.5]);
        assert!(parse_lmn("2,1").is_err());
        assert!(parse_lmn("2,-1,1").is_err());
        assert!(parse_lmn("a,1,1").is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0:1:0.05").unwrap().0, vec![0.0, 1.0, 0.05]);
        assert_eq!(parse_range("0.2:0.6").unwrap().0, vec![0.2, 0.6]);
        assert!(parse_range("0").is_err());
        assert!(parse_range("0:x").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
