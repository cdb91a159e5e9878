//! Text formats for states and filters.
//!
//! A matrix is stored as `{"dim": n, "matrix": [[[re, im], ...], ...]}`,
//! row-major, every entry written with 17 significant digits so an `f64`
//! value survives a save/load cycle bit for bit. A filter file holds three
//! 2x2 matrices: `{"filters": [<matrix>, <matrix>, <matrix>]}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::qalg::{validate_density, ComplexMatrix, DensityMatrix};
use crate::scalar::Real;

#[derive(Deserialize)]
struct MatrixDoc {
    dim: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct FilterDoc {
    filters: Vec<MatrixDoc>,
}

impl MatrixDoc {
    fn into_matrix<T: Real>(self) -> Result<ComplexMatrix<T>> {
        if self.matrix.len() != self.dim || self.matrix.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Parse(format!(
                "matrix is not {0}x{0} as declared by \"dim\"",
                self.dim
            )));
        }
        let rows = self
            .matrix
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|[re, im]| Complex::new(T::lit(re), T::lit(im)))
                    .collect()
            })
            .collect();
        ComplexMatrix::from_rows(rows)
    }
}

fn write_entry(out: &mut String, x: f64) {
    // `{:e}` with 16 fractional digits is 17 significant digits; JSON accepts the exponent form.
    let _ = write!(out, "{x:.16e}");
}

fn matrix_body<T: Real>(m: &ComplexMatrix<T>, indent: &str) -> String {
    let mut out = String::new();
    let _ = write!(out, "{{\"dim\": {}, \"matrix\": [", m.rows());
    for i in 0..m.rows() {
        out.push('\n');
        out.push_str(indent);
        out.push_str("  [");
        for j in 0..m.cols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = m[(i, j)];
            out.push('[');
            write_entry(&mut out, z.re.to_f64_lossy());
            out.push_str(", ");
            write_entry(&mut out, z.im.to_f64_lossy());
            out.push(']');
        }
        out.push(']');
        if i + 1 < m.rows() {
            out.push(',');
        }
    }
    out.push('\n');
    out.push_str(indent);
    out.push_str("]}");
    out
}

/// Serialises any square matrix in the state-file notation.
pub fn matrix_to_string<T: Real>(m: &ComplexMatrix<T>) -> String {
    let mut s = matrix_body(m, "");
    s.push('\n');
    s
}

pub fn state_to_string<T: Real>(rho: &DensityMatrix<T>) -> String {
    matrix_to_string(rho.matrix())
}

pub fn parse_matrix<T: Real>(text: &str) -> Result<ComplexMatrix<T>> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    doc.into_matrix()
}

/// Parses and validates an 8x8 state.
pub fn parse_state<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    let m = parse_matrix(text)?;
    if m.shape() != (8, 8) {
        return Err(Error::Parse(format!("state must be 8x8, got {}x{}", m.rows(), m.cols())));
    }
    validate_density(m)
}

pub fn load_state<T: Real>(path: impl AsRef<Path>) -> Result<DensityMatrix<T>> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn save_state<T: Real>(path: impl AsRef<Path>, rho: &DensityMatrix<T>) -> Result<()> {
    fs::write(path, state_to_string(rho))?;
    Ok(())
}

pub fn filters_to_string<T: Real>(raw: &[ComplexMatrix<T>; 3]) -> String {
    let mut s = String::from("{\"filters\": [\n");
    for (k, m) in raw.iter().enumerate() {
        s.push_str("  ");
        s.push_str(&matrix_body(m, "  "));
        if k < 2 {
            s.push(',');
        }
        s.push('\n');
    }
    s.push_str("]}\n");
    s
}

/// Parses three raw 2x2 filter matrices (A, B, C order).
pub fn parse_filters<T: Real>(text: &str) -> Result<[ComplexMatrix<T>; 3]> {
    let doc: FilterDoc = serde_json::from_str(text)?;
    if doc.filters.len() != 3 {
        return Err(Error::Parse(format!(
            "expected three filters, found {}",
            doc.filters.len()
        )));
    }
    let mut mats = Vec::with_capacity(3);
    for m in doc.filters {
        let m: ComplexMatrix<T> = m.into_matrix()?;
        if m.shape() != (2, 2) {
            return Err(Error::Parse(format!("filters must be 2x2, got {}x{}", m.rows(), m.cols())));
        }
        mats.push(m);
    }
    let [a, b, c]: [ComplexMatrix<T>; 3] = mats.try_into().expect("three filters");
    Ok([a, b, c])
}

pub fn load_filters<T: Real>(path: impl AsRef<Path>) -> Result<[ComplexMatrix<T>; 3]> {
    parse_filters(&fs::read_to_string(path)?)
}
