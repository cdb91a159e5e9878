//! Mermin and Svetlichny operators and the brute-force maximisation oracle.
//!
//! `<B>_ρ` for a two-setting tripartite Bell operator is multilinear in the six
//! Bloch vectors: fixing five of them leaves a linear function `g · v` of the
//! sixth, maximised over the sphere by `v = g / |g|`. The oracle cycles those
//! closed-form updates to convergence from many random starts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::correlation::{correlation_tensor, CorrelationTensor};
use crate::error::Result;
use crate::qalg::{bloch_observable, expectation, kron3, BlochVector, ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// Six measurement directions, two per party.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementSettings<T> {
    pub a: BlochVector<T>,
    pub a_prime: BlochVector<T>,
    pub b: BlochVector<T>,
    pub b_prime: BlochVector<T>,
    pub c: BlochVector<T>,
    pub c_prime: BlochVector<T>,
}

impl<T: Real> MeasurementSettings<T> {
    /// Setting `x ∈ {0, 1}` of `party ∈ {0, 1, 2}` (A, B, C).
    pub fn get(&self, party: usize, x: usize) -> BlochVector<T> {
        match (party, x) {
            (0, 0) => self.a,
            (0, _) => self.a_prime,
            (1, 0) => self.b,
            (1, _) => self.b_prime,
            (2, 0) => self.c,
            _ => self.c_prime,
        }
    }

    fn from_vectors(v: &[[[T; 3]; 2]; 3]) -> Self {
        let b = |p: usize, x: usize| BlochVector::from_direction(v[p][x]).unwrap_or_else(BlochVector::z_axis);
        Self {
            a: b(0, 0),
            a_prime: b(0, 1),
            b: b(1, 0),
            b_prime: b(1, 1),
            c: b(2, 0),
            c_prime: b(2, 1),
        }
    }

    fn to_vectors(self) -> [[[T; 3]; 2]; 3] {
        let mut v = [[[T::zero(); 3]; 2]; 3];
        for (p, party) in v.iter_mut().enumerate() {
            for (x, slot) in party.iter_mut().enumerate() {
                *slot = self.get(p, x).to_array();
            }
        }
        v
    }

    pub fn to_f64(self) -> [[f64; 3]; 6] {
        let v = self.to_vectors();
        let mut out = [[0.0; 3]; 6];
        for p in 0..3 {
            for x in 0..2 {
                for d in 0..3 {
                    out[2 * p + x][d] = v[p][x][d].to_f64_lossy();
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BellInequality {
    /// `A₀(B₀C₁ + B₁C₀) + A₁(B₀C₀ - B₁C₁)`, local bound 2.
    Mermin,
    /// `A₀(B₀C₀ + B₀C₁ + B₁C₀ - B₁C₁) + A₁(B₀C₀ - B₀C₁ - B₁C₀ - B₁C₁)`, bilocal bound 4.
    Svetlichny,
}

impl BellInequality {
    /// Coefficient of `A_x B_y C_z`, indexed `[x][y][z]`.
    pub fn coefficients(self) -> [[[i8; 2]; 2]; 2] {
        match self {
            BellInequality::Mermin => [[[0, 1], [1, 0]], [[1, 0], [0, -1]]],
            BellInequality::Svetlichny => [[[1, 1], [1, -1]], [[1, -1], [-1, -1]]],
        }
    }

    pub fn classical_bound(self) -> f64 {
        match self {
            BellInequality::Mermin => 2.0,
            BellInequality::Svetlichny => 4.0,
        }
    }
}

/// Bell operator as an explicit 8x8 matrix.
pub fn bell_operator<T: Real>(kind: BellInequality, s: &MeasurementSettings<T>) -> ComplexMatrix<T> {
    let obs: Vec<[ComplexMatrix<T>; 2]> = (0..3)
        .map(|p| [bloch_observable(&s.get(p, 0)), bloch_observable(&s.get(p, 1))])
        .collect();
    let coeff = kind.coefficients();
    let mut out = ComplexMatrix::zeros(8, 8);
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let w = coeff[x][y][z];
                if w == 0 {
                    continue;
                }
                let term = kron3(&obs[0][x], &obs[1][y], &obs[2][z]).expect("2x2 observables");
                out = &out + &term.scale(T::lit(f64::from(w)));
            }
        }
    }
    out
}

pub fn mermin_operator<T: Real>(s: &MeasurementSettings<T>) -> ComplexMatrix<T> {
    bell_operator(BellInequality::Mermin, s)
}

/// Signed `Tr[M ρ]`.
pub fn mermin_expectation<T: Real>(rho: &DensityMatrix<T>, s: &MeasurementSettings<T>) -> Result<T> {
    expectation(rho, &mermin_operator(s))
}

pub fn svetlichny_operator<T: Real>(s: &MeasurementSettings<T>) -> ComplexMatrix<T> {
    bell_operator(BellInequality::Svetlichny, s)
}

pub fn svetlichny_expectation<T: Real>(rho: &DensityMatrix<T>, s: &MeasurementSettings<T>) -> Result<T> {
    expectation(rho, &svetlichny_operator(s))
}

/// `<B>` evaluated through the correlation tensor.
pub fn bell_value_from_tensor<T: Real>(
    kind: BellInequality,
    t: &CorrelationTensor<T>,
    s: &MeasurementSettings<T>,
) -> T {
    tensor_value(kind, t, &s.to_vectors())
}

fn tensor_value<T: Real>(kind: BellInequality, t: &CorrelationTensor<T>, v: &[[[T; 3]; 2]; 3]) -> T {
    let coeff = kind.coefficients();
    let mut acc = T::zero();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let w = coeff[x][y][z];
                if w != 0 {
                    acc += T::lit(f64::from(w)) * t.contract(&v[0][x], &v[1][y], &v[2][z]);
                }
            }
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Cap on full coordinate sweeps per restart.
    pub max_sweeps: usize,
    /// Stop a restart once a sweep improves the value by less than this.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_sweeps: 10_000,
            tol: 1e-12,
        }
    }
}

impl OracleOptions {
    pub fn with_seed(seed: u64, restarts: usize) -> Self {
        Self {
            restarts,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T> {
    /// `|<B>|` at the best settings found.
    pub value: T,
    pub settings: MeasurementSettings<T>,
    /// Sweeps used by the winning restart.
    pub iterations: usize,
    pub restarts_used: usize,
    pub best_restart: usize,
}

/// One coordinate-ascent run from a fixed start.
#[derive(Clone, Debug)]
pub struct AscentRun<T> {
    pub value: T,
    pub settings: MeasurementSettings<T>,
    pub sweeps: usize,
    /// Value after every single-vector update, starting with the initial value.
    pub history: Vec<T>,
}

fn gradient<T: Real>(
    coeff: &[[[i8; 2]; 2]; 2],
    t: &CorrelationTensor<T>,
    v: &[[[T; 3]; 2]; 3],
    party: usize,
    x: usize,
) -> [T; 3] {
    let mut g = [T::zero(); 3];
    for u in 0..2 {
        for w in 0..2 {
            let c = match party {
                0 => coeff[x][u][w],
                1 => coeff[u][x][w],
                _ => coeff[u][w][x],
            };
            if c == 0 {
                continue;
            }
            let c = T::lit(f64::from(c));
            let arr = t.as_array();
            for d in 0..3 {
                let mut acc = T::zero();
                for e in 0..3 {
                    for f in 0..3 {
                        let (ti, p1, p2) = match party {
                            0 => (arr[d][e][f], v[1][u][e], v[2][w][f]),
                            1 => (arr[e][d][f], v[0][u][e], v[2][w][f]),
                            _ => (arr[e][f][d], v[0][u][e], v[1][w][f]),
                        };
                        acc += ti * p1 * p2;
                    }
                }
                g[d] += c * acc;
            }
        }
    }
    g
}

/// Coordinate ascent from `start`; the value never decreases between updates.
pub fn coordinate_ascent<T: Real>(
    kind: BellInequality,
    t: &CorrelationTensor<T>,
    start: &MeasurementSettings<T>,
    max_sweeps: usize,
    tol: T,
    record_history: bool,
) -> AscentRun<T> {
    let coeff = kind.coefficients();
    let mut v = start.to_vectors();
    let mut value = tensor_value(kind, t, &v);
    let mut history = Vec::new();
    if record_history {
        history.push(value);
    }
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        for party in 0..3 {
            for x in 0..2 {
                let g = gradient(&coeff, t, &v, party, x);
                let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                // zero gradient: every direction is optimal, keep the current one
                if norm > T::min_positive_value() {
                    v[party][x] = [g[0] / norm, g[1] / norm, g[2] / norm];
                }
                if record_history {
                    history.push(tensor_value(kind, t, &v));
                }
            }
        }
        let next = tensor_value(kind, t, &v);
        let improved = next - value;
        value = next;
        if improved < tol {
            break;
        }
    }
    AscentRun {
        value,
        settings: MeasurementSettings::from_vectors(&v),
        sweeps,
        history,
    }
}

pub(crate) fn random_settings<T: Real>(rng: &mut ChaCha8Rng) -> MeasurementSettings<T> {
    let mut v = [[[T::zero(); 3]; 2]; 3];
    for party in v.iter_mut() {
        for slot in party.iter_mut() {
            loop {
                let g: [f64; 3] = [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ];
                let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                if n > 1e-12 {
                    *slot = [T::lit(g[0] / n), T::lit(g[1] / n), T::lit(g[2] / n)];
                    break;
                }
            }
        }
    }
    MeasurementSettings::from_vectors(&v)
}

/// Generator for restart `index` under `seed`; streams never overlap.
pub(crate) fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Multi-start maximisation of `<B>` over the correlation tensor alone.
/// The returned value is the tensor contraction at the best settings.
pub fn maximize_on_tensor<T: Real>(
    kind: BellInequality,
    t: &CorrelationTensor<T>,
    opts: &OracleOptions,
) -> OracleResult<T> {
    let restarts = opts.restarts.max(1);
    let tol = T::lit(opts.tol);
    let mut best: Option<(usize, AscentRun<T>)> = None;
    for r in 0..restarts {
        let mut rng = restart_rng(opts.seed, r);
        let start = random_settings::<T>(&mut rng);
        let run = coordinate_ascent(kind, t, &start, opts.max_sweeps, tol, false);
        // strict comparison: the lowest restart index wins ties
        if best.as_ref().map_or(true, |(_, b)| run.value > b.value) {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    OracleResult {
        value: run.value.abs(),
        settings: run.settings,
        iterations: run.sweeps,
        restarts_used: restarts,
        best_restart,
    }
}

fn maximize_bell<T: Real>(kind: BellInequality, rho: &DensityMatrix<T>, opts: &OracleOptions) -> OracleResult<T> {
    let t = correlation_tensor(rho);
    let mut res = maximize_on_tensor(kind, &t, opts);
    // Report the value of the explicit operator, not the tensor shortcut.
    let op = bell_operator(kind, &res.settings);
    res.value = expectation(rho, &op).expect("Bell operator is Hermitian 8x8").abs();
    res
}

/// `max |<M>_ρ|` over all six measurement directions.
pub fn maximize_mermin<T: Real>(rho: &DensityMatrix<T>, opts: &OracleOptions) -> OracleResult<T> {
    maximize_bell(BellInequality::Mermin, rho, opts)
}

/// `max |<S>_ρ|` over all six measurement directions.
pub fn maximize_svetlichny<T: Real>(rho: &DensityMatrix<T>, opts: &OracleOptions) -> OracleResult<T> {
    maximize_bell(BellInequality::Svetlichny, rho, opts)
}
