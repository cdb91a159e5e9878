//! Local filtering `ρ ↦ (F_A⊗F_B⊗F_C) ρ (F_A⊗F_B⊗F_C)† / F` and the Mermin
//! bound of the filtered state computed without forming it.
//!
//! Every filter is kept in normal form `F = U diag(l, 1) U†`. The filtered
//! state does not depend on an overall positive scale of any filter, so the
//! normal form fixes the scale by making the smaller eigenvalue 1.

use num_complex::Complex;

use crate::correlation::{
    fold, pair_bound_from_singular, pauli_correlations, singular_triple, CorrelationTensor,
    SingularTriple,
};
use crate::error::{Error, Result};
use crate::qalg::{eig_hermitian, kron3, pauli, ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

/// A positive single-qubit filter and its normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFilter<T> {
    raw: ComplexMatrix<T>,
    unitary: ComplexMatrix<T>,
    l: T,
}

impl<T: Real> LocalFilter<T> {
    pub fn identity() -> Self {
        Self {
            raw: ComplexMatrix::identity(2),
            unitary: ComplexMatrix::identity(2),
            l: T::one(),
        }
    }

    /// `diag(l, 1)`; any `l ≥ 0`.
    pub fn diagonal(l: T) -> Result<Self> {
        filter_normal_form(ComplexMatrix::from_diag(&[l, T::one()]))
    }

    /// `U diag(l, 1) U†` with `U = R_z(φ) R_y(θ) R_z(ψ)`.
    pub fn from_euler(l: T, theta: T, phi: T, psi: T) -> Result<Self> {
        let u = euler_unitary(theta, phi, psi);
        let raw = u.sandwich(&ComplexMatrix::from_diag(&[l, T::one()]))?;
        filter_normal_form(raw)
    }

    pub fn raw(&self) -> &ComplexMatrix<T> {
        &self.raw
    }

    pub fn unitary(&self) -> &ComplexMatrix<T> {
        &self.unitary
    }

    /// The non-unit entry of `Σ = diag(l, 1)`.
    pub fn l(&self) -> T {
        self.l
    }

    pub fn sigma(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_diag(&[self.l, T::one()])
    }

    /// `U Σ U†`, the raw filter rescaled to normal form.
    pub fn operator(&self) -> ComplexMatrix<T> {
        self.unitary.sandwich(&self.sigma()).expect("2x2 operands")
    }

    pub fn is_diagonal(&self) -> bool {
        let u = &self.unitary;
        u[(0, 1)].norm() <= T::structure_tol() && u[(1, 0)].norm() <= T::structure_tol()
    }
}

/// `R_z(φ) R_y(θ) R_z(ψ)`.
pub fn euler_unitary<T: Real>(theta: T, phi: T, psi: T) -> ComplexMatrix<T> {
    let half = T::lit(0.5);
    let rz = |a: T| {
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex::from_polar(T::one(), -a * half),
            (1, 1) => Complex::from_polar(T::one(), a * half),
            _ => Complex::new(T::zero(), T::zero()),
        })
    };
    let (s, c) = (theta * half).sin_cos();
    let ry = ComplexMatrix::from_real(2, 2, &[c, -s, s, c]);
    &(&rz(phi) * &ry) * &rz(psi)
}

/// Spectral decomposition `raw = σ_min · U diag(l, 1) U†` with `l = σ_max / σ_min ≥ 1`.
///
/// A rank-one filter has no positive minimum to divide by; it is scaled by its
/// non-zero eigenvalue instead and comes out as `U diag(0, 1) U†`.
pub fn filter_normal_form<T: Real>(raw: ComplexMatrix<T>) -> Result<LocalFilter<T>> {
    if raw.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            op: "filter_normal_form",
            left: (2, 2),
            right: raw.shape(),
        });
    }
    let eig = eig_hermitian(&raw)?;
    let (lo, hi) = (eig.values[0], eig.values[1]);
    let scale = T::one().max(hi.abs());
    if lo < -T::structure_tol() * scale {
        return Err(Error::FilterNotPsd {
            min_eigenvalue: lo.to_f64_lossy(),
        });
    }
    if hi <= T::structure_tol() {
        return Err(Error::ZeroFilter);
    }
    let v = &eig.vectors;
    let swap = |v: &ComplexMatrix<T>| ComplexMatrix::from_fn(2, 2, |i, j| v[(i, 1 - j)]);
    let (unitary, l) = if lo <= T::structure_tol() * hi {
        (v.clone(), T::zero())
    } else if hi > lo {
        // column 0 carries the larger eigenvalue
        (swap(v), hi / lo)
    } else {
        (v.clone(), T::one())
    };
    Ok(LocalFilter { raw, unitary, l })
}

/// Filters for parties A, B and C.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterTriple<T> {
    pub fa: LocalFilter<T>,
    pub fb: LocalFilter<T>,
    pub fc: LocalFilter<T>,
}

impl<T: Real> FilterTriple<T> {
    pub fn identity() -> Self {
        Self {
            fa: LocalFilter::identity(),
            fb: LocalFilter::identity(),
            fc: LocalFilter::identity(),
        }
    }

    /// `diag(l,1) ⊗ diag(m,1) ⊗ diag(n,1)`.
    pub fn diagonal(l: T, m: T, n: T) -> Result<Self> {
        Ok(Self {
            fa: LocalFilter::diagonal(l)?,
            fb: LocalFilter::diagonal(m)?,
            fc: LocalFilter::diagonal(n)?,
        })
    }

    pub fn from_raw(raw: [ComplexMatrix<T>; 3]) -> Result<Self> {
        let [a, b, c] = raw;
        Ok(Self {
            fa: filter_normal_form(a)?,
            fb: filter_normal_form(b)?,
            fc: filter_normal_form(c)?,
        })
    }

    pub fn parties(&self) -> [&LocalFilter<T>; 3] {
        [&self.fa, &self.fb, &self.fc]
    }

    /// Normal-form `(l, m, n)`.
    pub fn diagonal_entries(&self) -> [T; 3] {
        [self.fa.l, self.fb.l, self.fc.l]
    }

    pub fn raw_matrices(&self) -> [ComplexMatrix<T>; 3] {
        [self.fa.raw.clone(), self.fb.raw.clone(), self.fc.raw.clone()]
    }

    pub fn operators(&self) -> [ComplexMatrix<T>; 3] {
        [self.fa.operator(), self.fb.operator(), self.fc.operator()]
    }

    /// `F_A ⊗ F_B ⊗ F_C` in normal form.
    pub fn kron(&self) -> ComplexMatrix<T> {
        let [a, b, c] = self.operators();
        kron3(&a, &b, &c).expect("2x2 filters")
    }
}

/// Normalised filtered state with the post-selection normalisation.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredState<T> {
    pub rho_prime: DensityMatrix<T>,
    /// `Tr[(F_A⊗F_B⊗F_C) ρ (·)†]` with the filters in normal form.
    pub norm: T,
}

pub fn apply_filters<T: Real>(rho: &DensityMatrix<T>, f: &FilterTriple<T>) -> Result<FilteredState<T>> {
    let unnormalised = f.kron().sandwich(rho.matrix())?;
    let norm = unnormalised.trace().re;
    if !(norm > T::annihilation_tol()) {
        return Err(Error::FilterAnnihilatesState {
            norm: norm.to_f64_lossy(),
        });
    }
    Ok(FilteredState {
        rho_prime: DensityMatrix::from_trusted(unnormalised.scale(T::one() / norm)),
        norm,
    })
}

/// Filtered-state bound assembled from `D̃ / F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilteredBoundReport<T> {
    /// `F = Tr[ρ̃ (Σ_A² ⊗ Σ_B² ⊗ Σ_C²)]`.
    pub normalization: T,
    /// Singular values of the folded `D̃ / F`, descending.
    pub singular_values: [T; 3],
    /// `2√2 λ'_max`.
    pub bound: T,
    /// `2√2 λ'_2`, the level of the top singular pair.
    pub pair_value: T,
    pub pair_is_max: bool,
    pub degeneracy_gap: T,
}

/// `(D̃/F, F)` where `D̃_ijk = Tr[ρ̃ (Σ_A σ_i Σ_A ⊗ Σ_B σ_j Σ_B ⊗ Σ_C σ_k Σ_C)]` and
/// `ρ̃ = (U⊗V⊗W)† ρ (U⊗V⊗W)`.
pub fn filtered_tensor<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FilterTriple<T>,
) -> Result<(CorrelationTensor<T>, T)> {
    let [fa, fb, fc] = f.parties();
    let u = kron3(fa.unitary(), fb.unitary(), fc.unitary())?;
    let rho_tilde = u.adjoint().sandwich(rho.matrix())?;

    let sandwiched = |filter: &LocalFilter<T>| -> Result<Vec<ComplexMatrix<T>>> {
        let s = filter.sigma();
        (1..=3).map(|i| s.sandwich(&pauli(i)?)).collect()
    };
    let (alpha, beta, gamma) = (sandwiched(fa)?, sandwiched(fb)?, sandwiched(fc)?);

    let squared = |filter: &LocalFilter<T>| {
        let l = filter.l();
        ComplexMatrix::from_diag(&[l * l, T::one()])
    };
    let weight = kron3(&squared(fa), &squared(fb), &squared(fc))?;
    let norm = rho_tilde.trace_product(&weight)?.re;
    if !(norm > T::annihilation_tol()) {
        return Err(Error::FilterAnnihilatesState {
            norm: norm.to_f64_lossy(),
        });
    }

    let mut d = [[[T::zero(); 3]; 3]; 3];
    for (i, plane) in d.iter_mut().enumerate() {
        for (j, row) in plane.iter_mut().enumerate() {
            for (k, entry) in row.iter_mut().enumerate() {
                let op = kron3(&alpha[i], &beta[j], &gamma[k])?;
                *entry = rho_tilde.trace_product(&op)?.re / norm;
            }
        }
    }
    Ok((CorrelationTensor::from_array(d), norm))
}

pub fn theorem_bound<T: Real>(rho: &DensityMatrix<T>, f: &FilterTriple<T>) -> Result<FilteredBoundReport<T>> {
    let (d, normalization) = filtered_tensor(rho, f)?;
    let s = singular_triple(&fold(&d));
    Ok(report_from_singular(&s, normalization))
}

fn report_from_singular<T: Real>(s: &SingularTriple<T>, normalization: T) -> FilteredBoundReport<T> {
    let pair = pair_bound_from_singular(s);
    FilteredBoundReport {
        normalization,
        singular_values: s.values,
        bound: s.scaled(0),
        pair_value: pair.value,
        pair_is_max: pair.pair_is_max,
        degeneracy_gap: pair.degeneracy_gap,
    }
}

/// Same report computed the long way: filter the state, then read its correlation tensor.
pub fn direct_filtered_report<T: Real>(
    rho: &DensityMatrix<T>,
    f: &FilterTriple<T>,
) -> Result<FilteredBoundReport<T>> {
    let filtered = apply_filters(rho, f)?;
    let s = singular_triple(&fold(&pauli_correlations(filtered.rho_prime.matrix())));
    Ok(report_from_singular(&s, filtered.norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::mermin_bound;
    use crate::states::{ghz, noisy_ghz, psi_pi8_state};

    type M = ComplexMatrix<f64>;

    #[test]
    fn normal_form_examples() {
        let f = filter_normal_form(M::from_diag(&[3.0, 2.0])).unwrap();
        assert_eq!(f.unitary(), &M::identity(2));
        assert!((f.l() - 1.5).abs() < 1e-15);

        let id = filter_normal_form(M::identity(2)).unwrap();
        assert_eq!(id.unitary(), &M::identity(2));
        assert_eq!(id.l(), 1.0);

        let swapped = filter_normal_form(M::from_diag(&[2.0, 3.0])).unwrap();
        assert!((swapped.l() - 1.5).abs() < 1e-15);
        assert!(swapped.operator().max_abs_diff(&M::from_diag(&[1.0, 1.5])) < 1e-15);

        let rank_one = filter_normal_form(M::from_diag(&[0.0, 4.0])).unwrap();
        assert_eq!(rank_one.l(), 0.0);
        assert!(rank_one.operator().max_abs_diff(&M::from_diag(&[0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn normal_form_errors() {
        assert!(matches!(
            filter_normal_form(M::from_diag(&[1.0, -0.5])),
            Err(Error::FilterNotPsd { .. })
        ));
        assert!(matches!(filter_normal_form(M::zeros(2, 2)), Err(Error::ZeroFilter)));
        assert!(filter_normal_form(M::identity(3)).is_err());
    }

    #[test]
    fn normal_form_reconstructs_random_psd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let a = M::from_fn(2, 2, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let raw = &a * &a.adjoint();
            let f = filter_normal_form(raw.clone()).unwrap();
            let eig = eig_hermitian(&raw).unwrap();
            let rebuilt = f.operator().scale(eig.values[0]);
            assert!(rebuilt.max_abs_diff(&raw) <= 1e-10);
            assert!(f.l() >= 1.0);
            let uu = f.unitary() * &f.unitary().adjoint();
            assert!(uu.max_abs_diff(&M::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn identity_filters_leave_state_alone() {
        let rho = psi_pi8_state::<f64>(0.45).unwrap();
        let out = apply_filters(&rho, &FilterTriple::identity()).unwrap();
        assert!(out.rho_prime.matrix().max_abs_diff(rho.matrix()) < 1e-15);
        assert!((out.norm - 1.0).abs() < 1e-15);
        let report = theorem_bound(&rho, &FilterTriple::identity()).unwrap();
        assert!((report.bound - mermin_bound(&rho)).abs() < 1e-14);
    }

    #[test]
    fn noisy_ghz_normalisation_matches_closed_form() {
        let p: f64 = 0.5;
        let f = FilterTriple::diagonal(2.0, 1.0, 1.0).unwrap();
        let out = apply_filters(&noisy_ghz(p).unwrap(), &f).unwrap();
        let _: f64 = out.norm;
        // ((1+p) l²m²n² + (1-p)(l² + m²n²) + (1+p)) / 4 at l=2
        let expected = ((1.0 + p) * 4.0 + (1.0 - p) * 5.0 + (1.0 + p)) / 4.0;
        assert!((expected - 2.5).abs() < 1e-15);
        assert!((out.norm - expected).abs() < 1e-14);
    }

    #[test]
    fn scaling_a_filter_changes_nothing() {
        let rho = noisy_ghz(0.4).unwrap();
        let base = [M::from_diag(&[2.0, 1.0]), M::from_diag(&[1.0, 0.7]), M::identity(2)];
        let scaled = [base[0].scale(3.0), base[1].scale(0.2), base[2].scale(11.0)];
        let f1 = FilterTriple::from_raw(base).unwrap();
        let f2 = FilterTriple::from_raw(scaled).unwrap();
        let a = apply_filters(&rho, &f1).unwrap();
        let b = apply_filters(&rho, &f2).unwrap();
        assert!(a.rho_prime.matrix().max_abs_diff(b.rho_prime.matrix()) < 1e-12);
        assert!((a.norm - b.norm).abs() < 1e-12);
        let ta = theorem_bound(&rho, &f1).unwrap();
        let tb = theorem_bound(&rho, &f2).unwrap();
        for k in 0..3 {
            assert!((ta.singular_values[k] - tb.singular_values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_filter_can_annihilate() {
        // projector onto |1> on A kills |000>
        let mut amp = [Complex::new(0.0, 0.0); 8];
        amp[0] = Complex::new(1.0, 0.0);
        let rho = DensityMatrix::from_pure(&amp);
        let f = FilterTriple::from_raw([M::from_diag(&[0.0, 1.0]), M::identity(2), M::identity(2)]).unwrap();
        assert!(matches!(apply_filters(&rho, &f), Err(Error::FilterAnnihilatesState { .. })));
        assert!(matches!(theorem_bound(&rho, &f), Err(Error::FilterAnnihilatesState { .. })));
    }

    #[test]
    fn ghz_pair_under_diagonal_filters() {
        let (l, m, n) = (1.7, 0.6, 2.3);
        let f = FilterTriple::diagonal(l, m, n).unwrap();
        let r = theorem_bound(&ghz::<f64>(), &f).unwrap();
        // normal form rescales m: diag(0.6,1) -> diag(1, 1/0.6)
        let d = direct_filtered_report(&ghz::<f64>(), &f).unwrap();
        for k in 0..3 {
            assert!((r.singular_values[k] - d.singular_values[k]).abs() < 1e-12);
        }
        assert!(r.pair_is_max || r.singular_values[0] > r.singular_values[1]);
    }

    #[test]
    fn euler_unitary_is_unitary() {
        let u = euler_unitary::<f64>(0.3, 1.1, -0.7);
        assert!((&u * &u.adjoint()).max_abs_diff(&M::identity(2)) < 1e-15);
        let f = LocalFilter::<f64>::from_euler(2.0, 0.3, 1.1, -0.7).unwrap();
        assert!(!f.is_diagonal());
        assert!((f.l() - 2.0).abs() < 1e-12);
        assert!(f.operator().max_abs_diff(f.raw()) < 1e-12);
    }
}
