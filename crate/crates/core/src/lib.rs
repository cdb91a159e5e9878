//! Mermin-inequality bounds for three-qubit states, before and after local
//! filtering, with a brute-force oracle and threshold searches.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the precision for the common cases.
//!
//! ```
//! use mermin_core::{correlation::mermin_bound, states::noisy_ghz};
//!
//! let rho = noisy_ghz(0.6_f64).unwrap();
//! assert!((mermin_bound(&rho) - 2.4).abs() < 1e-12);
//! ```

pub mod correlation;
pub mod error;
pub mod filtering;
pub mod format;
pub mod nelder_mead;
pub mod oracle;
pub mod qalg;
pub mod scalar;
pub mod search;
pub mod states;
pub mod thresholds;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix64 = qalg::ComplexMatrix<f64>;
pub type ComplexMatrix32 = qalg::ComplexMatrix<f32>;
pub type DensityMatrix64 = qalg::DensityMatrix<f64>;
pub type DensityMatrix32 = qalg::DensityMatrix<f32>;
pub type BlochVector64 = qalg::BlochVector<f64>;
pub type BlochVector32 = qalg::BlochVector<f32>;
pub type CorrelationTensor64 = correlation::CorrelationTensor<f64>;
pub type CorrelationTensor32 = correlation::CorrelationTensor<f32>;
pub type FilterTriple64 = filtering::FilterTriple<f64>;
pub type FilterTriple32 = filtering::FilterTriple<f32>;
pub type MeasurementSettings64 = oracle::MeasurementSettings<f64>;
pub type MeasurementSettings32 = oracle::MeasurementSettings<f32>;
