//! Pauli correlation tensor, its 3x9 folding, and the unfiltered Mermin bound.
//!
//! Indices are 0-based in code: `t[i][j][k] = Tr[ρ (σ_{i+1} ⊗ σ_{j+1} ⊗ σ_{k+1})]`.
//! The folded matrix puts the middle party on rows and the `(i, k)` pair on
//! columns with `i` outer, so column `3i + k` multiplies `a_i c_k` of `a ⊗ c`.

use num_complex::Complex;
use num_traits::Zero;

use crate::qalg::{eig_hermitian, ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// Entry `σ_i[r][c]` of a Pauli matrix, `i ∈ {0, 1, 2}` for x, y, z.
#[inline]
fn pauli_entry<T: Real>(i: usize, r: usize, c: usize) -> Complex<T> {
    let one = T::one();
    let zero = T::zero();
    match (i, r, c) {
        (0, 0, 1) | (0, 1, 0) => Complex::new(one, zero),
        (1, 0, 1) => Complex::new(zero, -one),
        (1, 1, 0) => Complex::new(zero, one),
        (2, 0, 0) => Complex::new(one, zero),
        (2, 1, 1) => Complex::new(-one, zero),
        _ => Complex::zero(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationTensor<T> {
    t: [[[T; 3]; 3]; 3],
}

impl<T: Real> CorrelationTensor<T> {
    pub fn from_array(t: [[[T; 3]; 3]; 3]) -> Self {
        Self { t }
    }

    pub fn zeros() -> Self {
        Self {
            t: [[[T::zero(); 3]; 3]; 3],
        }
    }

    pub fn as_array(&self) -> &[[[T; 3]; 3]; 3] {
        &self.t
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.t[i][j][k]
    }

    pub fn scale(&self, s: T) -> Self {
        let mut t = self.t;
        t.iter_mut().flatten().flatten().for_each(|x| *x *= s);
        Self { t }
    }

    pub fn max_abs(&self) -> T {
        self.t.iter().flatten().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `Σ t_ijk a_i b_j c_k`.
    #[inline]
    pub fn contract(&self, a: &[T; 3], b: &[T; 3], c: &[T; 3]) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let ab = a[i] * b[j];
                for k in 0..3 {
                    acc += self.t[i][j][k] * ab * c[k];
                }
            }
        }
        acc
    }
}

/// Correlation tensor of a state, read off the sparse Pauli-product structure.
pub fn correlation_tensor<T: Real>(rho: &DensityMatrix<T>) -> CorrelationTensor<T> {
    pauli_correlations(rho.matrix())
}

/// `Tr[X (σ_i ⊗ σ_j ⊗ σ_k)]` for an arbitrary Hermitian 8x8 `X`, real parts only.
pub(crate) fn pauli_correlations<T: Real>(x: &ComplexMatrix<T>) -> CorrelationTensor<T> {
    debug_assert_eq!(x.shape(), (8, 8));
    let mut t = [[[T::zero(); 3]; 3]; 3];
    for (i, plane) in t.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let flip = |p: usize, bit: usize| if p < 2 { bit } else { 0 };
                let mask = flip(i, 4) | flip(j, 2) | flip(k, 1);
                let mut acc = Complex::<T>::zero();
                for c in 0..8 {
                    let r = c ^ mask;
                    let coeff = pauli_entry::<T>(i, r >> 2, c >> 2)
                        * pauli_entry::<T>(j, (r >> 1) & 1, (c >> 1) & 1)
                        * pauli_entry::<T>(k, r & 1, c & 1);
                    // Tr[X P] = Σ_c X[c][r] P[r][c]
                    acc += x[(c, r)] * coeff;
                }
                debug_assert!(acc.im.abs() <= T::structure_tol() * T::one().max(x.frobenius_norm()));
                *entry = acc.re;
            }
        }
    }
    CorrelationTensor { t }
}

/// The 3x9 matrix `C_{j, ik}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoldedCorrelation<T> {
    m: [[T; 9]; 3],
}

impl<T: Real> FoldedCorrelation<T> {
    pub fn from_rows(m: [[T; 9]; 3]) -> Self {
        Self { m }
    }

    pub fn rows(&self) -> &[[T; 9]; 3] {
        &self.m
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.m[row][col]
    }

    /// `M Mᵀ`, 3x3.
    pub fn gram(&self) -> [[T; 3]; 3] {
        let mut g = [[T::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                g[a][b] = (0..9).map(|c| self.m[a][c] * self.m[b][c]).sum();
            }
        }
        g
    }
}

pub fn fold<T: Real>(t: &CorrelationTensor<T>) -> FoldedCorrelation<T> {
    let mut m = [[T::zero(); 9]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m[j][3 * i + k] = t.t[i][j][k];
            }
        }
    }
    FoldedCorrelation { m }
}

pub fn unfold<T: Real>(f: &FoldedCorrelation<T>) -> CorrelationTensor<T> {
    let mut t = [[[T::zero(); 3]; 3]; 3];
    for (i, plane) in t.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                *entry = f.m[j][3 * i + k];
            }
        }
    }
    CorrelationTensor { t }
}

/// Singular values of the folded matrix, descending, with the right singular
/// vectors of the top two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularTriple<T> {
    pub values: [T; 3],
    /// Gram eigenvalues `values[k]²`, kept so bounds avoid a square-root round trip.
    pub squared: [T; 3],
    /// Unit 9-vectors for `values[0]` and `values[1]`; zero when that value vanishes.
    pub right_vectors: [[T; 9]; 2],
}

impl<T: Real> SingularTriple<T> {
    pub fn largest(&self) -> T {
        self.values[0]
    }

    /// `2√2 values[k]`, computed as `2√(2 values[k]²)`.
    pub fn scaled(&self, k: usize) -> T {
        T::lit(2.0) * (T::lit(2.0) * self.squared[k]).sqrt()
    }

    pub fn degeneracy_gap(&self) -> T {
        self.values[0] - self.values[1]
    }

    /// Top value has multiplicity at least two, within the relative degeneracy tolerance.
    pub fn top_is_degenerate(&self) -> bool {
        self.degeneracy_gap() <= T::degeneracy_tol() * T::one().max(self.values[0])
    }
}

/// Singular values from the eigenvalues of the 3x3 Gram matrix `M Mᵀ`.
pub fn singular_triple<T: Real>(m: &FoldedCorrelation<T>) -> SingularTriple<T> {
    let g = m.gram();
    let gm = ComplexMatrix::from_fn(3, 3, |a, b| Complex::new(g[a][b], T::zero()));
    let eig = eig_hermitian(&gm).expect("Gram matrix is finite and symmetric");
    let mut values = [T::zero(); 3];
    let mut squared = [T::zero(); 3];
    let mut right_vectors = [[T::zero(); 9]; 2];
    for slot in 0..3 {
        let idx = 2 - slot;
        squared[slot] = eig.values[idx].max(T::zero());
        let lambda = squared[slot].sqrt();
        values[slot] = lambda;
        if slot < 2 && lambda > T::min_positive_value().sqrt() {
            let u: Vec<T> = (0..3).map(|r| eig.vectors[(r, idx)].re).collect();
            let mut v = [T::zero(); 9];
            for (c, vc) in v.iter_mut().enumerate() {
                *vc = (0..3).map(|r| m.m[r][c] * u[r]).sum::<T>() / lambda;
            }
            right_vectors[slot] = v;
        }
    }
    SingularTriple {
        values,
        squared,
        right_vectors,
    }
}

/// `2√2 λ_max`, an upper bound on `max |<M>_ρ|`.
pub fn mermin_bound<T: Real>(rho: &DensityMatrix<T>) -> T {
    let s = singular_triple(&fold(&correlation_tensor(rho)));
    s.scaled(0)
}

/// Bound carried by the top singular pair and whether it is the tight branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBound<T> {
    /// `2√2 λ₂`: equals the full bound whenever the top value is degenerate.
    pub value: T,
    /// Top singular value has multiplicity ≥ 2 (the pair dominates the spectrum).
    pub pair_is_max: bool,
    /// `λ₁ - λ₂`.
    pub degeneracy_gap: T,
}

pub fn pair_bound_from_singular<T: Real>(s: &SingularTriple<T>) -> PairBound<T> {
    PairBound {
        value: s.scaled(1),
        pair_is_max: s.top_is_degenerate(),
        degeneracy_gap: s.degeneracy_gap(),
    }
}

pub fn pair_bound<T: Real>(rho: &DensityMatrix<T>) -> PairBound<T> {
    pair_bound_from_singular(&singular_triple(&fold(&correlation_tensor(rho))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalg::{expectation, kron3, pauli};
    use crate::states::{ad_ghz, ghz, noisy_ghz, psi_pi8_state};
    use num_complex::Complex;

    fn product_zero() -> DensityMatrix<f64> {
        let mut amp = [Complex::new(0.0, 0.0); 8];
        amp[0] = Complex::new(1.0, 0.0);
        DensityMatrix::from_pure(&amp)
    }

    #[test]
    fn sparse_route_matches_operator_route() {
        for rho in [ghz::<f64>(), psi_pi8_state(0.4).unwrap(), ad_ghz(0.2).unwrap()] {
            let t = correlation_tensor(&rho);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let op = kron3(&pauli(i + 1).unwrap(), &pauli(j + 1).unwrap(), &pauli(k + 1).unwrap()).unwrap();
                        let direct = expectation(&rho, &op).unwrap();
                        assert!((direct - t.get(i, j, k)).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn ghz_tensor_entries() {
        let t = correlation_tensor(&ghz::<f64>());
        let mut expected = [[[0.0; 3]; 3]; 3];
        expected[0][0][0] = 1.0;
        expected[1][0][1] = -1.0;
        expected[1][1][0] = -1.0;
        expected[0][1][1] = -1.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((t.get(i, j, k) - expected[i][j][k]).abs() < 1e-15, "{i}{j}{k}");
                }
            }
        }
        assert_eq!(correlation_tensor(&DensityMatrix::<f64>::maximally_mixed()), CorrelationTensor::zeros());
        assert!((correlation_tensor(&noisy_ghz::<f64>(0.6).unwrap()).get(0, 0, 0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn ghz_folds_to_displayed_matrix() {
        let p = 0.7;
        let f = fold(&correlation_tensor(&noisy_ghz::<f64>(p).unwrap()));
        let expected = [
            [p, 0.0, 0.0, 0.0, -p, 0.0, 0.0, 0.0, 0.0],
            [0.0, -p, 0.0, -p, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0; 9],
        ];
        for r in 0..3 {
            for c in 0..9 {
                assert!((f.get(r, c) - expected[r][c]).abs() < 1e-15);
            }
        }
        assert_eq!(fold(&CorrelationTensor::<f64>::zeros()), FoldedCorrelation::from_rows([[0.0; 9]; 3]));
    }

    #[test]
    fn singular_values_of_named_families() {
        let s = singular_triple(&fold(&correlation_tensor(&ghz::<f64>())));
        let r2 = 2f64.sqrt();
        assert!((s.values[0] - r2).abs() < 1e-12 && (s.values[1] - r2).abs() < 1e-12);
        assert!(s.values[2].abs() < 1e-12);

        for gamma in [0.1, 0.25, 0.37, 0.6] {
            let s = singular_triple(&fold(&correlation_tensor(&ad_ghz::<f64>(gamma).unwrap())));
            let pair = r2 * (1.0 - gamma).powf(1.5);
            let third = gamma * (3.0 - 6.0 * gamma + 4.0 * gamma * gamma);
            let mut expected = [pair, pair, third];
            expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for k in 0..3 {
                assert!((s.values[k] - expected[k]).abs() < 1e-12, "gamma={gamma} k={k}");
            }
        }

        let z = singular_triple(&FoldedCorrelation::<f64>::from_rows([[0.0; 9]; 3]));
        assert_eq!(z.values, [0.0; 3]);
    }

    #[test]
    fn right_vectors_are_singular_vectors() {
        let f = fold(&correlation_tensor(&psi_pi8_state::<f64>(0.8).unwrap()));
        let s = singular_triple(&f);
        for slot in 0..2 {
            let v = s.right_vectors[slot];
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
            // |M v| = λ
            let mv: f64 = (0..3)
                .map(|r| (0..9).map(|c| f.get(r, c) * v[c]).sum::<f64>().powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((mv - s.values[slot]).abs() < 1e-10);
        }
    }

    #[test]
    fn bounds() {
        assert!((mermin_bound(&ghz::<f64>()) - 4.0).abs() < 1e-12);
        for p in [0.55, 0.6, 0.9] {
            assert!((mermin_bound(&noisy_ghz::<f64>(p).unwrap()) - 4.0 * p).abs() < 1e-12);
        }
        assert_eq!(mermin_bound(&DensityMatrix::<f64>::maximally_mixed()), 0.0);
    }

    #[test]
    fn pair_bound_examples() {
        let g = pair_bound(&ghz::<f64>());
        assert!((g.value - 4.0).abs() < 1e-12 && g.pair_is_max && g.degeneracy_gap.abs() < 1e-12);
        let z = pair_bound(&product_zero());
        assert!(!z.pair_is_max);
        assert!((z.degeneracy_gap - 1.0).abs() < 1e-12);
        let mixed = pair_bound(&DensityMatrix::<f64>::maximally_mixed());
        assert_eq!((mixed.value, mixed.pair_is_max, mixed.degeneracy_gap), (0.0, true, 0.0));
    }

    #[test]
    fn single_precision_bound() {
        let b = mermin_bound(&ghz::<f32>());
        assert!((b - 4.0).abs() < 1e-5);
    }
}
