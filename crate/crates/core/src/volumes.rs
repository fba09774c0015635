//! Gram-determinant volumes and the exact identities that connect them to
//! the singular values.
//!
//! For a tuple of sample points the determinant of their Gram matrix is the
//! squared volume of the parallelepiped spanned by the corresponding
//! columns. Three identities computed here:
//!
//! * expected volume: the weighted sum of `det G` over all k-tuples equals
//!   `k! * e_k(sigma^2)` with `e_k` the elementary symmetric polynomials of
//!   the squared singular values;
//! * Schur residual factorization: appending a point multiplies the volume
//!   by the squared projection residual of its column;
//! * expected projection error under volume sampling:
//!   `(k+1) * e_{k+1}(sigma^2) / e_k(sigma^2)`.
//!
//! Determinants are kept in log domain with an explicit exact-zero flag;
//! ratios are formed as log differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::{gram_matrix, DiscretizedFunction, GramMatrix};
use crate::ortho::{pivoted_basis, residual_norm_squared};
use crate::schmidt::SchmidtDecomposition;

/// A pivot below `ZERO_PIVOT_REL` times the largest Gram diagonal marks the
/// determinant as exactly zero.
pub const ZERO_PIVOT_REL: f64 = 1e-12;

/// A Gram determinant in log domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramVolume {
    log_value: f64,
    is_zero: bool,
}

impl GramVolume {
    pub fn zero() -> Self {
        Self {
            log_value: f64::NEG_INFINITY,
            is_zero: true,
        }
    }

    pub fn from_log(log_value: f64) -> Self {
        Self {
            log_value,
            is_zero: false,
        }
    }

    /// Natural log of the determinant; negative infinity when zero.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// The determinant itself. Exactly `0.0` when flagged zero.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.log_value.exp()
        }
    }
}

/// Log-determinant of a symmetric PSD matrix by diagonally pivoted Cholesky
/// elimination. A pivot candidate below `ZERO_PIVOT_REL` times the largest
/// initial diagonal entry flags the determinant as exactly zero.
pub fn log_det_psd(matrix: &DMatrix<f64>) -> GramVolume {
    let k = matrix.nrows();
    if k == 0 {
        return GramVolume::from_log(0.0);
    }
    let mut a = matrix.clone();
    let max_diag = (0..k).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    if max_diag <= 0.0 {
        return GramVolume::zero();
    }
    let threshold = ZERO_PIVOT_REL * max_diag;
    let mut active: Vec<usize> = (0..k).collect();
    let mut log_det = 0.0;
    while let Some(&pivot) = active
        .iter()
        .max_by(|&&i, &&j| a[(i, i)].total_cmp(&a[(j, j)]))
    {
        let d = a[(pivot, pivot)];
        if d < threshold {
            return GramVolume::zero();
        }
        log_det += d.ln();
        active.retain(|&i| i != pivot);
        for &i in &active {
            for &j in &active {
                let update = a[(i, pivot)] * a[(pivot, j)] / d;
                a[(i, j)] -= update;
            }
        }
    }
    GramVolume::from_log(log_det)
}

/// Log-volume of the Gram of a distinct index subset.
pub fn log_det_gram(f: &DiscretizedFunction, indices: &[usize]) -> Result<GramVolume> {
    f.check_distinct_indices(indices)?;
    let gram = gram_matrix(f, indices)?;
    Ok(log_det_psd(gram.entries()))
}

/// Log-volume of an already assembled Gram matrix (tuples with repeats are
/// allowed there and come out as exact zeros).
pub fn log_det_of_gram(gram: &GramMatrix) -> GramVolume {
    log_det_psd(gram.entries())
}

/// Elementary symmetric polynomials `e_0..e_K` of a set of nonnegative
/// values, here always the squared singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPolynomials {
    values: Vec<f64>,
}

impl SymmetricPolynomials {
    /// `e_0, e_1, ..., e_K`; `e_0 = 1` and `e_k = 0` for `k` beyond the
    /// number of inputs.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }
}

/// One-pass recurrence `e_k += x * e_{k-1}` (descending k per new value),
/// computed on inputs rescaled by their maximum to avoid overflow, then
/// scaled back.
pub fn elementary_symmetric(sigma_squared: &[f64], max_order: usize) -> SymmetricPolynomials {
    let (scaled, scale) = scaled_esp(sigma_squared, max_order);
    let mut values = scaled;
    let mut factor = 1.0;
    for value in values.iter_mut() {
        *value *= factor;
        factor *= scale;
    }
    SymmetricPolynomials { values }
}

/// ESPs of `vals / max(vals)` together with the scale, so ratios of
/// consecutive orders can be formed without overflow.
fn scaled_esp(vals: &[f64], max_order: usize) -> (Vec<f64>, f64) {
    let scale = vals.iter().fold(0.0f64, |acc, &x| acc.max(x));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut e = vec![0.0; max_order + 1];
    e[0] = 1.0;
    for &x in vals {
        let xs = x / scale;
        for k in (1..=max_order).rev() {
            e[k] += xs * e[k - 1];
        }
    }
    (e, scale)
}

/// Weighted integral of `det G` over all k-tuples: `k! * e_k(sigma^2)`.
/// Zero exactly when `rank(f) < k`.
pub fn expected_volume(d: &SchmidtDecomposition, k: usize) -> f64 {
    let esp = elementary_symmetric(&d.sigma_squared(), k);
    let ek = esp.get(k);
    if ek == 0.0 {
        return 0.0;
    }
    factorial(k) * ek
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Squared residual of column `j` after projecting onto the span of the
/// columns in `indices`. Uses the Schur complement `||a_j||^2 - w^T G^-1 w`
/// when the Gram volume is nonzero, and column-pivoted orthogonalization
/// when it is singular.
pub fn residual_volume(f: &DiscretizedFunction, indices: &[usize], j: usize) -> Result<f64> {
    f.check_distinct_indices(indices)?;
    if j >= f.num_points() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: f.num_points(),
        });
    }
    let target = f.column(j);
    if indices.is_empty() {
        return Ok(target.norm_squared());
    }
    let gram = gram_matrix(f, indices)?;
    let volume = log_det_of_gram(&gram);
    if !volume.is_zero() {
        if let Some(chol) = nalgebra::Cholesky::new(gram.entries().clone()) {
            let w = DVector::from_iterator(
                indices.len(),
                indices.iter().map(|&i| f.column(i).dot(&target)),
            );
            let solved = chol.solve(&w);
            return Ok((target.norm_squared() - w.dot(&solved)).max(0.0));
        }
    }
    let cols: Vec<DVector<f64>> = indices.iter().map(|&i| f.column(i)).collect();
    let basis = pivoted_basis(&cols, None, indices.len());
    Ok(residual_norm_squared(&basis.q, &target))
}

/// Mean squared projection error under the volume-sampling density:
/// `(k+1) * e_{k+1}(sigma^2) / e_k(sigma^2)`.
///
/// Requires `k <= rank(f)` so that the density's normalizer is positive.
pub fn expected_projection_error(d: &SchmidtDecomposition, k: usize) -> Result<f64> {
    if k > d.rank() {
        return Err(Error::RankDeficient { k });
    }
    let (scaled, scale) = scaled_esp(&d.sigma_squared(), k + 1);
    // e_{k+1}/e_k of the original values is the scaled ratio times the scale
    Ok((k + 1) as f64 * scaled[k + 1] / scaled[k] * scale)
}
