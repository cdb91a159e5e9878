#![allow(dead_code)]

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mermin_core::qalg::{validate_density, ComplexMatrix};
use mermin_core::{DensityMatrix64, FilterTriple64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G† / Tr` with `G` an 8×rank complex Gaussian matrix.
pub fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix64 {
    let rank = rng.gen_range(1..=8);
    let g: Vec<C> = (0..8 * rank).map(|_| gaussian(rng)).collect();
    let mut m = ComplexMatrix::from_fn(8, 8, |i, j| {
        (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum()
    });
    let tr = m.trace().re;
    m = m.scale(1.0 / tr);
    validate_density(m.hermitian_part()).expect("Ginibre states are valid")
}

pub fn random_psd2(rng: &mut ChaCha8Rng) -> ComplexMatrix<f64> {
    let a = ComplexMatrix::from_fn(2, 2, |_, _| gaussian(rng));
    let p = &a * &a.adjoint();
    // keep away from rank one so the filtered state is well conditioned
    &p + &ComplexMatrix::identity(2).scale(0.05)
}

pub fn random_filters(rng: &mut ChaCha8Rng, diagonal: bool) -> FilterTriple64 {
    if diagonal {
        let mut d = || rng.gen_range(-1.5f64..1.5).exp();
        FilterTriple64::diagonal(d(), d(), d()).unwrap()
    } else {
        FilterTriple64::from_raw([random_psd2(rng), random_psd2(rng), random_psd2(rng)]).unwrap()
    }
}

// ---- independent reference arithmetic on plain arrays ----

pub type M8 = [[C; 8]; 8];
pub type M2 = [[C; 2]; 2];

pub fn to_m8(m: &ComplexMatrix<f64>) -> M8 {
    let mut out = [[C::new(0.0, 0.0); 8]; 8];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = m[(i, j)];
        }
    }
    out
}

pub fn to_m2(m: &ComplexMatrix<f64>) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn naive_pauli(i: usize) -> M2 {
    let z = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let im = C::new(0.0, 1.0);
    match i {
        0 => [[one, z], [z, one]],
        1 => [[z, one], [one, z]],
        2 => [[z, -im], [im, z]],
        3 => [[one, z], [z, -one]],
        _ => unreachable!(),
    }
}

pub fn naive_kron3(a: &M2, b: &M2, c: &M2) -> M8 {
    let mut out = [[C::new(0.0, 0.0); 8]; 8];
    for r in 0..8 {
        for s in 0..8 {
            out[r][s] = a[r >> 2][s >> 2] * b[(r >> 1) & 1][(s >> 1) & 1] * c[r & 1][s & 1];
        }
    }
    out
}

pub fn naive_mul(a: &M8, b: &M8) -> M8 {
    let mut out = [[C::new(0.0, 0.0); 8]; 8];
    for i in 0..8 {
        for k in 0..8 {
            for j in 0..8 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn naive_adjoint(a: &M8) -> M8 {
    let mut out = [[C::new(0.0, 0.0); 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn naive_trace(a: &M8) -> C {
    (0..8).map(|i| a[i][i]).sum()
}

/// `t[i][j][k] = Re Tr[ρ σ_i⊗σ_j⊗σ_k]` for `i,j,k ∈ {1,2,3}`.
pub fn naive_tensor(rho: &M8) -> [[[f64; 3]; 3]; 3] {
    let mut t = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let op = naive_kron3(&naive_pauli(i + 1), &naive_pauli(j + 1), &naive_pauli(k + 1));
                t[i][j][k] = naive_trace(&naive_mul(rho, &op)).re;
            }
        }
    }
    t
}

/// Filtered and renormalised state from plain filter matrices.
pub fn naive_filter(rho: &M8, f: [&M2; 3]) -> (M8, f64) {
    let k = naive_kron3(f[0], f[1], f[2]);
    let mut out = naive_mul(&naive_mul(&k, rho), &naive_adjoint(&k));
    let norm = naive_trace(&out).re;
    for row in out.iter_mut() {
        for e in row.iter_mut() {
            *e /= norm;
        }
    }
    (out, norm)
}

/// Singular values of the 3×9 fold `row j, column 3i+k`, from a library SVD, descending.
pub fn reference_singular_values(t: &[[[f64; 3]; 3]; 3]) -> [f64; 3] {
    let m = SMatrix::<f64, 3, 9>::from_fn(|j, col| t[col / 3][j][col % 3]);
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [s[0], s[1], s[2]]
}

/// Eigenvalues of a Hermitian matrix from a library solver, ascending.
pub fn reference_eigenvalues(m: &ComplexMatrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let d = DMatrix::from_fn(n, n, |i, j| nalgebra::Complex::new(m[(i, j)].re, m[(i, j)].im));
    let mut v: Vec<f64> = d.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
