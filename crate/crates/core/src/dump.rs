//! Plain-text dumps of matrices and vectors for cross-checking.
//!
//! Values are written row-major in scientific notation with 17 significant
//! digits, comma separated, one matrix row per line.

use std::io::{self, Write};

use nalgebra::DMatrix;

/// Formats one value with 17 significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_csv<W: Write>(mut out: W, m: &DMatrix<f64>) -> io::Result<()> {
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|j| fmt_value(m[(i, j)])).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// One value per line.
pub fn write_vector_csv<W: Write>(mut out: W, v: &[f64]) -> io::Result<()> {
    for x in v {
        writeln!(out, "{}", fmt_value(*x))?;
    }
    Ok(())
}
