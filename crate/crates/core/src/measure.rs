//! Functions on finite discrete measure spaces.
//!
//! A [`DiscretizedFunction`] stores an m×n value matrix whose column `j` is
//! the point value `f(y_j)` in Euclidean coordinates, together with `n`
//! strictly positive atom weights `w_j = mu({y_j})`. The weights enter the
//! weighted L2 norm and the sampling density through the product measure;
//! Gram entries use the plain Euclidean inner product of the columns.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for Gram symmetry and positive semidefiniteness checks.
pub const PSD_REL_TOL: f64 = 1e-12;

/// A discretized function `f: {y_1..y_n} -> R^m` with a positive measure
/// weight per sample point. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedFunction {
    values: DMatrix<f64>,
    weights: DVector<f64>,
}

impl DiscretizedFunction {
    /// Validates shapes, positivity of the weights and finiteness of all
    /// entries. Column count of `values` must equal `weights.len()`.
    pub fn new(values: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "value matrix must be at least 1x1, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if weights.len() != values.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} columns but {} weights",
                values.ncols(),
                weights.len()
            )));
        }
        for (j, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight { index: j, value: w });
            }
        }
        for col in 0..values.ncols() {
            for row in 0..values.nrows() {
                if !values[(row, col)].is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
            }
        }
        Ok(Self { values, weights })
    }

    /// Uniform unit weights.
    pub fn with_unit_weights(values: DMatrix<f64>) -> Result<Self> {
        let n = values.ncols();
        Self::new(values, DVector::from_element(n, 1.0))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// Dimension of the ambient Euclidean space H.
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    /// Number of sample points (atoms of the measure).
    pub fn num_points(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        DVector::from_column_slice(self.values.column(j).as_slice())
    }

    /// Columns scaled by the square roots of their weights. The singular
    /// values of this matrix are the singular values of `f`.
    pub fn weighted_values(&self) -> DMatrix<f64> {
        let mut scaled = self.values.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.weights[j].sqrt();
        }
        scaled
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.num_points() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.num_points(),
            });
        }
        Ok(())
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        indices.iter().try_for_each(|&j| self.check_index(j))
    }

    /// Checks that all indices are in range and mutually distinct.
    pub(crate) fn check_distinct_indices(&self, indices: &[usize]) -> Result<()> {
        self.check_indices(indices)?;
        let mut seen = vec![false; self.num_points()];
        for &j in indices {
            if seen[j] {
                return Err(Error::DuplicateIndex { index: j });
            }
            seen[j] = true;
        }
        Ok(())
    }
}

/// Gram matrix of a tuple of columns in the Euclidean inner product.
///
/// Weights deliberately do not appear here; they belong to the measure, not
/// to the inner product on H.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    source_indices: Vec<usize>,
}

impl GramMatrix {
    /// Validating constructor: `entries` must be square, symmetric within
    /// `PSD_REL_TOL` relative to the largest entry magnitude, and positive
    /// semidefinite in the sense that no pivot candidate of the pivoted
    /// Cholesky factorization falls below `-PSD_REL_TOL` relative.
    pub fn new(entries: DMatrix<f64>, source_indices: Vec<usize>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "Gram matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() != source_indices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} Gram matrix with {} source indices",
                entries.nrows(),
                entries.nrows(),
                source_indices.len()
            )));
        }
        let scale = entries.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let k = entries.nrows();
        for i in 0..k {
            for j in (i + 1)..k {
                if (entries[(i, j)] - entries[(j, i)]).abs() > PSD_REL_TOL * scale {
                    return Err(Error::NotPositiveSemidefinite);
                }
            }
        }
        if !psd_pivots_nonnegative(&entries, PSD_REL_TOL * scale) {
            return Err(Error::NotPositiveSemidefinite);
        }
        Ok(Self {
            entries,
            source_indices,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// Runs pivoted Cholesky on a copy and reports whether every pivot candidate
/// stays above `-tol`. Pivots in `[-tol, tol]` terminate the factorization
/// (numerical rank reached) without failing the check.
fn psd_pivots_nonnegative(matrix: &DMatrix<f64>, tol: f64) -> bool {
    let mut a = matrix.clone();
    let mut active: Vec<usize> = (0..matrix.nrows()).collect();
    while !active.is_empty() {
        if active.iter().any(|&i| a[(i, i)] < -tol) {
            return false;
        }
        let pivot = *active
            .iter()
            .max_by(|&&i, &&j| a[(i, i)].total_cmp(&a[(j, j)]))
            .expect("active set is nonempty");
        let d = a[(pivot, pivot)];
        if d <= tol {
            // remaining diagonal is numerically zero; nothing left to factor
            break;
        }
        active.retain(|&i| i != pivot);
        for &i in &active {
            for &j in &active {
                let update = a[(i, pivot)] * a[(pivot, j)] / d;
                a[(i, j)] -= update;
            }
        }
    }
    true
}

/// Gram matrix of the columns selected by `indices` (repeats allowed, so a
/// tuple in the product space rather than a subset).
pub fn gram_matrix(f: &DiscretizedFunction, indices: &[usize]) -> Result<GramMatrix> {
    f.check_indices(indices)?;
    let k = indices.len();
    let mut entries = DMatrix::zeros(k, k);
    for (a, &ja) in indices.iter().enumerate() {
        for (b, &jb) in indices.iter().enumerate().skip(a) {
            let dot = f.values.column(ja).dot(&f.values.column(jb));
            entries[(a, b)] = dot;
            entries[(b, a)] = dot;
        }
    }
    GramMatrix::new(entries, indices.to_vec())
}

/// Squared weighted L2 norm: the sum of `w_j * ||f(y_j)||^2`.
pub fn total_l2_norm_squared(f: &DiscretizedFunction) -> f64 {
    f.values
        .column_iter()
        .zip(f.weights.iter())
        .map(|(col, &w)| w * col.norm_squared())
        .sum()
}
