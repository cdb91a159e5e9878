//! Three-qubit state families and the amplitude-damping channel.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qalg::{ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

fn check_unit_interval<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() && value <= T::one() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value: value.to_f64_lossy(),
        })
    }
}

/// `(|000> + |111>) / √2`.
pub fn ghz<T: Real>() -> DensityMatrix<T> {
    let mut amp = [Complex::zero(); 8];
    amp[0] = Complex::new(T::one(), T::zero());
    amp[7] = Complex::new(T::one(), T::zero());
    DensityMatrix::from_pure(&amp)
}

/// `p |GHZ><GHZ| + (1-p)/4 · I₂ ⊗ diag(1,0,0,1)`.
pub fn noisy_ghz<T: Real>(p: T) -> Result<DensityMatrix<T>> {
    check_unit_interval("p", p)?;
    let noise = (T::one() - p) / T::lit(4.0);
    let mut m = ghz::<T>().into_matrix().scale(p);
    for idx in [0b000, 0b011, 0b100, 0b111] {
        m[(idx, idx)].re += noise;
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// `p |Ψ><Ψ| + (1-p) |00><00| ⊗ I/2` with `|Ψ> = cos(π/8)|000> + sin(π/8)|111>`.
pub fn psi_pi8_state<T: Real>(p: T) -> Result<DensityMatrix<T>> {
    check_unit_interval("p", p)?;
    let angle = T::PI() / T::lit(8.0);
    let mut amp = [Complex::zero(); 8];
    amp[0] = Complex::new(angle.cos(), T::zero());
    amp[7] = Complex::new(angle.sin(), T::zero());
    let mut m = DensityMatrix::from_pure(&amp).into_matrix().scale(p);
    let mix = (T::one() - p) / T::lit(2.0);
    m[(0, 0)].re += mix;
    m[(1, 1)].re += mix;
    Ok(DensityMatrix::from_trusted(m))
}

/// Single-qubit amplitude-damping Kraus pair `E₀ = diag(1, √(1-γ))`, `E₁ = √γ |0><1|`.
pub fn amplitude_damping_kraus<T: Real>(gamma: T) -> Result<[ComplexMatrix<T>; 2]> {
    check_unit_interval("gamma", gamma)?;
    let e0 = ComplexMatrix::from_diag(&[T::one(), (T::one() - gamma).sqrt()]);
    let mut e1 = ComplexMatrix::zeros(2, 2);
    e1[(0, 1)] = Complex::new(gamma.sqrt(), T::zero());
    Ok([e0, e1])
}

/// Applies amplitude damping independently to each of the three qubits.
pub fn ad_apply<T: Real>(rho: &DensityMatrix<T>, gamma: T) -> Result<DensityMatrix<T>> {
    let kraus = amplitude_damping_kraus(gamma)?;
    let mut out = ComplexMatrix::zeros(8, 8);
    for ka in &kraus {
        for kb in &kraus {
            for kc in &kraus {
                let k = ka.kron(kb).kron(kc);
                out = &out + &k.sandwich(rho.matrix())?;
            }
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Closed form of the GHZ state after three-qubit amplitude damping.
pub fn ad_ghz<T: Real>(gamma: T) -> Result<DensityMatrix<T>> {
    check_unit_interval("gamma", gamma)?;
    let one = T::one();
    let half = T::lit(0.5);
    let keep = one - gamma;
    let mut m = ComplexMatrix::zeros(8, 8);
    let mut set = |i: usize, j: usize, v: T| m[(i, j)] = Complex::new(v * half, T::zero());
    set(0b000, 0b000, one + gamma.powi(3));
    set(0b111, 0b111, keep.powi(3));
    let coherence = keep * keep.sqrt();
    set(0b000, 0b111, coherence);
    set(0b111, 0b000, coherence);
    for idx in [0b001, 0b010, 0b100] {
        set(idx, idx, keep * gamma * gamma);
    }
    for idx in [0b011, 0b101, 0b110] {
        set(idx, idx, keep * keep * gamma);
    }
    Ok(DensityMatrix::from_trusted(m))
}

/// One-parameter families used for threshold searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamFamily {
    NoisyGhz,
    PsiPi8,
    AdGhz,
}

impl ParamFamily {
    pub fn build<T: Real>(self, param: T) -> Result<DensityMatrix<T>> {
        match self {
            ParamFamily::NoisyGhz => noisy_ghz(param),
            ParamFamily::PsiPi8 => psi_pi8_state(param),
            ParamFamily::AdGhz => ad_ghz(param),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamFamily::NoisyGhz => "noisy-ghz",
            ParamFamily::PsiPi8 => "psi-pi8",
            ParamFamily::AdGhz => "ad-ghz",
        }
    }

    /// `"p"` for the mixing families, `"gamma"` for damping.
    pub fn param_name(self) -> &'static str {
        match self {
            ParamFamily::AdGhz => "gamma",
            _ => "p",
        }
    }
}

impl fmt::Display for ParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noisy-ghz" => Ok(ParamFamily::NoisyGhz),
            "psi-pi8" => Ok(ParamFamily::PsiPi8),
            "ad-ghz" => Ok(ParamFamily::AdGhz),
            other => Err(Error::InvalidOption(format!(
                "`{other}` is not a parameterised family (noisy-ghz, psi-pi8, ad-ghz)"
            ))),
        }
    }
}

/// Any state the tools can be pointed at.
#[derive(Clone, Debug, PartialEq)]
pub enum StateFamily {
    Ghz,
    Param(ParamFamily, f64),
    File(PathBuf),
}

impl StateFamily {
    pub fn build<T: Real>(&self) -> Result<DensityMatrix<T>> {
        match self {
            StateFamily::Ghz => Ok(ghz()),
            StateFamily::Param(family, param) => family.build(T::lit(*param)),
            StateFamily::File(path) => crate::format::load_state(path),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateFamily::Ghz => "ghz".into(),
            StateFamily::Param(family, param) => format!("{family}({}={param})", family.param_name()),
            StateFamily::File(path) => format!("file({})", path.display()),
        }
    }
}
