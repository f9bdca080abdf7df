use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{DataMatrix, StochasticMatrix};

/// Layout of a matrix in a CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Each in-memory column (a point, an archetype) becomes one file row.
    PointsAsRows,
    /// The matrix is written as is: file rows are matrix rows.
    RawColumnsAsColumns,
}

pub trait AsMatrix {
    fn as_dmatrix(&self) -> &DMatrix<f64>;
}

impl AsMatrix for DataMatrix {
    fn as_dmatrix(&self) -> &DMatrix<f64> {
        self.as_matrix()
    }
}

impl AsMatrix for StochasticMatrix {
    fn as_dmatrix(&self) -> &DMatrix<f64> {
        self.as_matrix()
    }
}

impl AsMatrix for DMatrix<f64> {
    fn as_dmatrix(&self) -> &DMatrix<f64> {
        self
    }
}

/// Reads a numeric CSV with one point per row into an `m x n` matrix.
///
/// A first row containing any non-numeric cell is taken as a header.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };

    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut reader = ::csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(r + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.trim().parse::<f64>().ok()).collect();
        if rows.is_empty() && width.is_none() && parsed.iter().any(Option::is_none) {
            // Header row.
            width = Some(record.len());
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(parse_err(line, format!("expected {w} fields, found {}", record.len())));
            }
        }
        width = Some(record.len());
        let mut row = Vec::with_capacity(record.len());
        for (c, (cell, value)) in record.iter().zip(parsed).enumerate() {
            let v = value.ok_or_else(|| parse_err(line, format!("column {}: non-numeric value {cell:?}", c + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value {cell:?}", c + 1)));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no numeric rows".into()));
    }
    DataMatrix::from_columns(&rows)
}

/// Writes `m` with 17 significant digits, LF line endings and no trailing
/// delimiter, so that reading the file back reproduces every value bitwise.
pub fn write_matrix_csv(m: &impl AsMatrix, path: impl AsRef<Path>, orientation: Orientation) -> Result<()> {
    let m = m.as_dmatrix();
    let mut out = String::new();
    let mut line = |values: &mut dyn Iterator<Item = f64>| {
        let mut first = true;
        for v in values {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{v:.16e}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    };
    match orientation {
        Orientation::PointsAsRows => {
            for col in m.column_iter() {
                line(&mut col.iter().copied());
            }
        }
        Orientation::RawColumnsAsColumns => {
            for row in m.row_iter() {
                line(&mut row.iter().copied());
            }
        }
    }
    super::write_text(path.as_ref(), &out)
}
