//! Small dense complex linear algebra for three-qubit states.
//!
//! Everything here operates on matrices no larger than 9x9, so storage is a
//! flat row-major `Vec` and all products are naive triple loops. Qubit order
//! is A (most significant), B, C (least significant): basis index of
//! `|a b c>` is `4a + 2b + c`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                op: "from_rows",
                left: (r, c),
                right: (1, bad.len()),
            });
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(diag[i], T::zero())
            } else {
                Complex::zero()
            }
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[T]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| Complex::new(entries[i * cols + j], T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self * inner * self^dagger`.
    pub fn sandwich(&self, inner: &Self) -> Result<Self> {
        self.try_mul(inner)?.try_mul(&self.adjoint())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (r2, c2) = rhs.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * rhs[(i % r2, j % c2)]
        })
    }

    /// `Tr[self * rhs]` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Result<Complex<T>> {
        if self.cols != rhs.rows || self.rows != rhs.cols {
            return Err(Error::DimensionMismatch {
                op: "trace_product",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut acc = Complex::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * rhs[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// `max |A_ij - conj(A_ji)|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }
}

impl<T> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Unit vector on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector<T> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - T::one()).abs() > T::unit_tol() {
            return Err(Error::NonUnitVector {
                norm: norm.to_f64_lossy(),
            });
        }
        // Snap onto the sphere so the stored vector meets the tighter invariant.
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Normalises an arbitrary direction; `None` for the zero vector.
    pub fn from_direction(v: [T; 3]) -> Option<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > T::zero() && norm.is_finite() {
            Some(Self {
                x: v[0] / norm,
                y: v[1] / norm,
                z: v[2] / norm,
            })
        } else {
            None
        }
    }

    pub fn x_axis() -> Self {
        Self { x: T::one(), y: T::zero(), z: T::zero() }
    }

    pub fn y_axis() -> Self {
        Self { x: T::zero(), y: T::one(), z: T::zero() }
    }

    pub fn z_axis() -> Self {
        Self { x: T::zero(), y: T::zero(), z: T::one() }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn x(&self) -> T {
        self.x
    }
    pub fn y(&self) -> T {
        self.y
    }
    pub fn z(&self) -> T {
        self.z
    }
}

impl<T: Real> std::ops::Neg for BlochVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { x: -self.x, y: -self.y, z: -self.z }
    }
}

/// Pauli matrix `σ_i` for `i ∈ {1, 2, 3}` (x, y, z).
pub fn pauli<T: Real>(i: usize) -> Result<ComplexMatrix<T>> {
    let o = T::one();
    let z = T::zero();
    let c = |re: T, im: T| Complex::new(re, im);
    let m = match i {
        1 => [c(z, z), c(o, z), c(o, z), c(z, z)],
        2 => [c(z, z), c(z, -o), c(z, o), c(z, z)],
        3 => [c(o, z), c(z, z), c(z, z), c(-o, z)],
        _ => return Err(Error::PauliIndex(i)),
    };
    Ok(ComplexMatrix {
        rows: 2,
        cols: 2,
        data: m.to_vec(),
    })
}

/// `v · σ`, a ±1-valued qubit observable.
pub fn bloch_observable<T: Real>(v: &BlochVector<T>) -> ComplexMatrix<T> {
    let c = |re: T, im: T| Complex::new(re, im);
    ComplexMatrix {
        rows: 2,
        cols: 2,
        data: vec![c(v.z, T::zero()), c(v.x, -v.y), c(v.x, v.y), c(-v.z, T::zero())],
    }
}

/// `a ⊗ b ⊗ c` for three single-qubit operators.
pub fn kron3<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    c: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    for m in [a, b, c] {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                op: "kron3",
                left: (2, 2),
                right: m.shape(),
            });
        }
    }
    Ok(a.kron(b).kron(c))
}

/// Validated three-qubit state: 8x8, Hermitian, unit trace, PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    mat: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    /// Maximally mixed state `I/8`.
    pub fn maximally_mixed() -> Self {
        Self {
            mat: ComplexMatrix::identity(8).scale(T::lit(0.125)),
        }
    }

    /// Projector onto a (not necessarily normalised) pure state.
    pub fn from_pure(amplitudes: &[Complex<T>; 8]) -> Self {
        let norm2: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let mat = ComplexMatrix::from_fn(8, 8, |i, j| amplitudes[i] * amplitudes[j].conj() / norm2);
        Self { mat }
    }

    /// Wraps a matrix produced by a trace-preserving, positivity-preserving
    /// construction. Only the Hermitian part is kept.
    pub(crate) fn from_trusted(mat: ComplexMatrix<T>) -> Self {
        debug_assert_eq!(mat.shape(), (8, 8));
        Self {
            mat: mat.hermitian_part(),
        }
    }

    pub fn purity(&self) -> T {
        self.mat
            .trace_product(&self.mat)
            .map(|z| z.re)
            .unwrap_or_else(|_| T::nan())
    }

    pub fn min_eigenvalue(&self) -> T {
        eig_hermitian(&self.mat)
            .map(|e| e.values[0])
            .unwrap_or_else(|_| T::nan())
    }

    /// Converts to another precision without re-validation.
    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        let mat = ComplexMatrix::from_fn(8, 8, |i, j| {
            let z = self.mat[(i, j)];
            Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy()))
        });
        DensityMatrix { mat }
    }
}

/// Checks the density-matrix invariants and wraps the matrix.
pub fn validate_density<T: Real>(mat: ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    if mat.shape() != (8, 8) {
        return Err(Error::DimensionMismatch {
            op: "validate_density",
            left: (8, 8),
            right: mat.shape(),
        });
    }
    if !mat.is_finite() {
        return Err(Error::NonFinite);
    }
    let tol = T::structure_tol();
    let deviation = mat.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64_lossy(),
        });
    }
    let trace = mat.trace().re;
    if (trace - T::one()).abs() > tol {
        return Err(Error::NotUnitTrace {
            trace: trace.to_f64_lossy(),
        });
    }
    let min_eigenvalue = eig_hermitian(&mat)?.values[0];
    if min_eigenvalue < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eigenvalue.to_f64_lossy(),
        });
    }
    Ok(DensityMatrix { mat })
}

/// `Re Tr[obs · rho]` for a Hermitian 8x8 observable.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, obs: &ComplexMatrix<T>) -> Result<T> {
    if obs.shape() != (8, 8) {
        return Err(Error::DimensionMismatch {
            op: "expectation",
            left: (8, 8),
            right: obs.shape(),
        });
    }
    let scale = T::one().max(obs.frobenius_norm());
    let deviation = obs.hermitian_deviation();
    if deviation > T::structure_tol() * scale {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64_lossy(),
        });
    }
    let tr = obs.trace_product(rho.matrix())?;
    debug_assert!(
        tr.im.abs() <= T::structure_tol() * scale,
        "imaginary expectation residue {}",
        tr.im
    );
    Ok(tr.re)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let d = ComplexMatrix::from_diag(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Hermitian eigen-solver: closed form for 2x2, cyclic complex Jacobi above.
pub fn eig_hermitian<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            op: "eig_hermitian",
            left: h.shape(),
            right: (h.cols(), h.rows()),
        });
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = T::one().max(h.frobenius_norm());
    let deviation = h.hermitian_deviation();
    if deviation > T::structure_tol() * scale {
        return Err(Error::NotHermitian {
            deviation: deviation.to_f64_lossy(),
        });
    }
    match h.rows() {
        0 => Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        }),
        1 => Ok(HermitianEigen {
            values: vec![h[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        }),
        2 => Ok(eig_2x2(h)),
        _ => Ok(eig_jacobi(h, scale)),
    }
}

fn eig_2x2<T: Real>(h: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let c = (h[(0, 1)] + h[(1, 0)].conj()) * T::lit(0.5);
    let one = Complex::<T>::one();
    let zero = Complex::<T>::zero();
    if c.norm() <= T::min_positive_value() {
        let (values, vectors) = if a <= d {
            (vec![a, d], ComplexMatrix::identity(2))
        } else {
            (
                vec![d, a],
                ComplexMatrix::from_rows(vec![vec![zero, one], vec![one, zero]]).unwrap(),
            )
        };
        return HermitianEigen { values, vectors };
    }
    let half = T::lit(0.5);
    let mean = (a + d) * half;
    let half_gap = (a - d) * half;
    let r = (half_gap * half_gap + c.norm_sqr()).sqrt();
    let values = [mean - r, mean + r];
    let mut cols: Vec<[Complex<T>; 2]> = Vec::with_capacity(2);
    for &lam in &values {
        // Two null vectors of (H - λ); keep the better conditioned one.
        let u = [c, Complex::new(lam - a, T::zero())];
        let w = [Complex::new(lam - d, T::zero()), c.conj()];
        let nu = (u[0].norm_sqr() + u[1].norm_sqr()).sqrt();
        let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
        let (v, n) = if nu >= nw { (u, nu) } else { (w, nw) };
        cols.push([v[0] / n, v[1] / n]);
    }
    let vectors = ComplexMatrix::from_fn(2, 2, |i, j| cols[j][i]);
    HermitianEigen {
        values: values.to_vec(),
        vectors,
    }
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn eig_jacobi<T: Real>(h: &ComplexMatrix<T>, scale: T) -> HermitianEigen<T> {
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);
    let threshold = T::jacobi_tol() * scale;
    let two = T::lit(2.0);

    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                // Phase rotation makes the pivot real, then a real Givens rotation zeroes it.
                let phase_conj = (apq / mag).conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (two * mag);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = t * cs;
                let q_pp = Complex::new(cs, T::zero());
                let q_pq = Complex::new(sn, T::zero());
                let q_qp = phase_conj * (-sn);
                let q_qq = phase_conj * cs;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * q_pp + akq * q_qp;
                    a[(k, q)] = akp * q_pq + akq * q_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = q_pp.conj() * apk + q_qp.conj() * aqk;
                    a[(q, k)] = q_pq.conj() * apk + q_qq.conj() * aqk;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)].im = T::zero();
                a[(q, q)].im = T::zero();

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * q_pp + vkq * q_qp;
                    v[(k, q)] = vkp * q_pq + vkq * q_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}
