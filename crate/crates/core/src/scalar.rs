use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the whole crate is generic over: `f32` or `f64`.
///
/// Each precision carries its own numerical tolerances. The `f64` values are
/// the ones the crate is specified and tested against; the `f32` values are
/// scaled to single-precision round-off on 8x8 arithmetic.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Hermiticity, unit-trace and PSD checks on density matrices.
    fn structure_tol() -> Self;
    /// Deviation allowed for a Bloch vector's norm before it is rejected.
    fn unit_tol() -> Self;
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
    fn jacobi_tol() -> Self;
    /// Normalisation below which a filter is taken to annihilate the state.
    fn annihilation_tol() -> Self;
    /// Relative gap under which the top two singular values count as one degenerate pair.
    fn degeneracy_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn structure_tol() -> Self {
        1e-10
    }
    fn unit_tol() -> Self {
        1e-9
    }
    fn jacobi_tol() -> Self {
        1e-12
    }
    fn annihilation_tol() -> Self {
        1e-12
    }
    fn degeneracy_tol() -> Self {
        1e-7
    }
}

impl Real for f32 {
    fn structure_tol() -> Self {
        1e-5
    }
    fn unit_tol() -> Self {
        1e-5
    }
    fn jacobi_tol() -> Self {
        1e-6
    }
    fn annihilation_tol() -> Self {
        1e-6
    }
    fn degeneracy_tol() -> Self {
        1e-3
    }
}
