//! CSV input: a values matrix (rows = coordinates of the Euclidean target
//! space, columns = sample points, no header) and an optional single-column
//! weights file. A missing weights file means uniform weights of 1.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::DiscretizedFunction;

fn map_csv_error(err: csv::Error, path: &Path) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn parse_field(field: &str, path: &Path, row: usize, col: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "{}: row {row}, column {col}: not a number: {field:?}",
            path.display()
        ))
    })
}

/// Reads a rectangular headerless CSV matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| map_csv_error(e, path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| map_csv_error(e, path))?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            row.push(parse_field(field, path, i, j)?);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "{}: row {i} has {} fields, expected {}",
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse(format!("{}: empty matrix", path.display())));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

/// Reads a single-column CSV of weights.
pub fn read_weights_csv(path: &Path) -> Result<DVector<f64>> {
    let matrix = read_matrix_csv(path)?;
    if matrix.ncols() != 1 {
        return Err(Error::Parse(format!(
            "{}: weights must be a single column, got {} columns",
            path.display(),
            matrix.ncols()
        )));
    }
    Ok(matrix.column(0).into_owned())
}

/// Loads and validates an instance from a values file and an optional
/// weights file.
pub fn load_function(
    values_path: &Path,
    weights_path: Option<&Path>,
) -> Result<DiscretizedFunction> {
    let values = read_matrix_csv(values_path)?;
    match weights_path {
        Some(path) => DiscretizedFunction::new(values, read_weights_csv(path)?),
        None => DiscretizedFunction::with_unit_weights(values),
    }
}
