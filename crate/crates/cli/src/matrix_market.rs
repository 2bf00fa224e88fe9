//! Dense complex matrices in Matrix Market files.
//!
//! Parsing goes through `nalgebra-sparse`, which checks the type of every
//! entry against the header, so the header field picks the scalar type to load.
//! Output is always the array format, with 17 significant digits so that a
//! load/store/load round trip is bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use equitile::{CMatrix, C64};
use nalgebra_sparse::io::load_coo_from_matrix_market_str;
use nalgebra_sparse::CooMatrix;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    MatrixMarketArray,
    MatrixMarketCoordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
    Integer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub format: Format,
    pub field: Field,
    pub matrix: CMatrix,
}

fn header(text: &str) -> Result<(Format, Field)> {
    let first = text.lines().next().unwrap_or_default();
    let tokens: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(CliError::input(format!("not a Matrix Market matrix header: {first:?}")));
    }
    let format = match tokens[2].as_str() {
        "array" => Format::MatrixMarketArray,
        "coordinate" => Format::MatrixMarketCoordinate,
        other => return Err(CliError::input(format!("unsupported Matrix Market format {other:?}"))),
    };
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        other => return Err(CliError::input(format!("unsupported Matrix Market field {other:?}"))),
    };
    Ok((format, field))
}

fn densify<T: Copy>(coo: &CooMatrix<T>, to_complex: impl Fn(T) -> C64) -> CMatrix {
    let mut m = CMatrix::zeros(coo.nrows(), coo.ncols());
    let mut seen = vec![false; coo.nrows() * coo.ncols()];
    for (i, j, &v) in coo.triplet_iter() {
        // duplicates are summed; the first write assigns so that -0.0 survives
        let slot = &mut seen[i + j * coo.nrows()];
        if *slot {
            m[(i, j)] += to_complex(v);
        } else {
            m[(i, j)] = to_complex(v);
            *slot = true;
        }
    }
    m
}

pub fn parse(text: &str) -> Result<MatrixFile> {
    let (format, field) = header(text)?;
    let err = |e: nalgebra_sparse::io::MatrixMarketError| CliError::input(format!("Matrix Market: {}", e.message()));
    let matrix = match field {
        Field::Real => densify(&load_coo_from_matrix_market_str::<f64>(text).map_err(err)?, |x| C64::new(x, 0.0)),
        Field::Integer => {
            densify(&load_coo_from_matrix_market_str::<i64>(text).map_err(err)?, |x| C64::new(x as f64, 0.0))
        }
        Field::Complex => densify(&load_coo_from_matrix_market_str::<C64>(text).map_err(err)?, |x| x),
    };
    Ok(MatrixFile { format, field, matrix })
}

pub fn load(path: &Path) -> Result<MatrixFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
}

/// Array-format rendering. The field is `real` when every imaginary part is
/// `+0.0`, `complex` otherwise.
pub fn render(m: &CMatrix) -> String {
    let real = m.iter().all(|z| z.im.to_bits() == 0);
    let mut out = String::new();
    let field = if real { "real" } else { "complex" };
    writeln!(out, "%%MatrixMarket matrix array {field} general").unwrap();
    writeln!(out, "{} {}", m.nrows(), m.ncols()).unwrap();
    // column-major, as the format requires
    for z in m.iter() {
        if real {
            writeln!(out, "{:.16e}", z.re).unwrap();
        } else {
            writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
        }
    }
    out
}

pub fn store(path: &Path, m: &CMatrix) -> Result<()> {
    std::fs::write(path, render(m)).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
