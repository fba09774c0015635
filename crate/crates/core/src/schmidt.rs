//! Weighted Schmidt decomposition.
//!
//! Viewing the discretized function as a Hilbert-Schmidt operator from the
//! weighted L2 space on the sample points into R^m, its singular value
//! decomposition `f = sum_i sigma_i u_i v_i` has left factors `u_i`
//! orthonormal in the Euclidean inner product and right factors `v_i`
//! orthonormal in the weighted inner product `<x, y>_w = sum_j w_j x_j y_j`.
//! Numerically this is the SVD of the column-scaled matrix with columns
//! `sqrt(w_j) * f(y_j)`; the right factors are recovered by dividing the
//! rows by `sqrt(w_j)` again.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::DiscretizedFunction;

/// Default relative cutoff below which singular values are discarded.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Singular values and factor matrices of a discretized function, truncated
/// to numerical rank.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    sigma: Vec<f64>,
    left_factors: DMatrix<f64>,
    right_factors: DMatrix<f64>,
}

impl SchmidtDecomposition {
    /// Strictly positive singular values in descending order.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Squared singular values in descending order.
    pub fn sigma_squared(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s * s).collect()
    }

    /// m x r matrix with Euclidean-orthonormal columns `u_i`.
    pub fn left_factors(&self) -> &DMatrix<f64> {
        &self.left_factors
    }

    /// n x r matrix whose columns `v_i` are orthonormal in the weighted
    /// inner product.
    pub fn right_factors(&self) -> &DMatrix<f64> {
        &self.right_factors
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }
}

/// Computes the weighted Schmidt decomposition, discarding singular values
/// at or below `rel_tol * sigma_1`.
pub fn schmidt_decompose(f: &DiscretizedFunction, rel_tol: f64) -> Result<SchmidtDecomposition> {
    let scaled = f.weighted_values();
    let (u, sv, v) = jacobi_svd(&scaled).ok_or(Error::ConvergenceFailure)?;

    // jacobi_svd sorts descending; truncate to numerical rank
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let rank = sv
        .iter()
        .take_while(|&&s| s > rel_tol * sigma_max && s > 0.0)
        .count();

    let sigma: Vec<f64> = sv[..rank].to_vec();
    let mut left = u.columns(0, rank).into_owned();
    let mut right = DMatrix::zeros(f.num_points(), rank);
    for i in 0..rank {
        for j in 0..f.num_points() {
            right[(j, i)] = v[(j, i)] / f.weights()[j].sqrt();
        }
    }
    fix_signs(&mut left, &mut right);

    Ok(SchmidtDecomposition {
        sigma,
        left_factors: left,
        right_factors: right,
    })
}

/// One-sided Jacobi SVD: repeatedly rotates column pairs of a working copy
/// until all columns are mutually orthogonal, accumulating the rotations
/// into `v`. Slower than bidiagonalization but accurate for clustered
/// singular values, where QR-iteration SVDs can silently lose digits.
///
/// Returns `(u, sigma, v)` with `sigma` descending; columns of `u` beyond
/// the rank (zero singular value) are left as zeros.
fn jacobi_svd(b: &DMatrix<f64>) -> Option<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (m, n) = b.shape();
    if m < n {
        let (u, sigma, v) = jacobi_svd(&b.transpose())?;
        return Some((v, sigma, u));
    }

    let mut a = b.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = a.column(p).norm_squared();
                let aqq = a.column(q).norm_squared();
                let apq = a.column(p).dot(&a.column(q));
                if apq.abs() <= JACOBI_OFF_TOL * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (aip, aiq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let (vip, viq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut sigma = Vec::with_capacity(n);
    let mut u = DMatrix::zeros(m, n);
    let mut v_sorted = DMatrix::zeros(n, n);
    for (out, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > 0.0 {
            u.column_mut(out).copy_from(&(a.column(j) / norms[j]));
        }
        v_sorted.column_mut(out).copy_from(&v.column(j));
    }
    Some((u, sigma, v_sorted))
}

/// Same as [`schmidt_decompose`] with the default rank cutoff.
pub fn schmidt_decompose_default(f: &DiscretizedFunction) -> Result<SchmidtDecomposition> {
    schmidt_decompose(f, DEFAULT_RANK_REL_TOL)
}

/// Sign convention: in each left factor the entry of largest magnitude is
/// made nonnegative (ties broken by lowest row index), flipping the paired
/// right factor to preserve the product.
fn fix_signs(left: &mut DMatrix<f64>, right: &mut DMatrix<f64>) {
    for i in 0..left.ncols() {
        let mut lead = 0usize;
        for row in 1..left.nrows() {
            if left[(row, i)].abs() > left[(lead, i)].abs() {
                lead = row;
            }
        }
        if left[(lead, i)] < 0.0 {
            left.column_mut(i).neg_mut();
            right.column_mut(i).neg_mut();
        }
    }
}

/// Optimal squared-error tail: `d_k = sqrt(sigma_{k+1}^2 + ... + sigma_r^2)`.
///
/// Nonincreasing in `k` and zero for `k >= rank`.
pub fn tail_width(d: &SchmidtDecomposition, k: usize) -> f64 {
    d.sigma
        .iter()
        .skip(k)
        .rev()
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt()
}

/// Number of retained singular values.
pub fn numerical_rank(d: &SchmidtDecomposition) -> usize {
    d.rank()
}

/// Reconstruction `left * diag(sigma) * right^T`; used by invariant checks.
pub fn reconstruct(d: &SchmidtDecomposition) -> DMatrix<f64> {
    let r = d.rank();
    let sigma = DMatrix::from_diagonal(&DVector::from_vec(d.sigma.clone()));
    if r == 0 {
        return DMatrix::zeros(d.left_factors.nrows(), d.right_factors.nrows());
    }
    &d.left_factors * sigma * d.right_factors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::total_l2_norm_squared;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn func(values: DMatrix<f64>, weights: Vec<f64>) -> DiscretizedFunction {
        DiscretizedFunction::new(values, DVector::from_vec(weights)).unwrap()
    }

    #[test]
    fn weighted_identity_has_sigma_two_one() {
        let f = func(DMatrix::identity(2, 2), vec![4.0, 1.0]);
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(d.rank(), 2);
        assert_relative_eq!(d.sigma()[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(d.sigma()[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_function_has_rank_zero() {
        let f = DiscretizedFunction::with_unit_weights(DMatrix::zeros(3, 4)).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(d.rank(), 0);
        assert!(d.sigma().is_empty());
        assert_eq!(tail_width(&d, 0), 0.0);
    }

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let f = func(dmatrix![3.0, 0.0; 0.0, 2.0], vec![1.0, 1.0]);
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(d.sigma(), &[3.0, 2.0]);
        // sign convention makes u_i = +e_i
        assert_relative_eq!(d.left_factors()[(0, 0)], 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.left_factors()[(1, 1)], 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.left_factors()[(1, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_cutoff_discards_tiny_sigma() {
        let f = func(dmatrix![1.0, 0.0; 0.0, 1e-20], vec![1.0, 1.0]);
        let d = schmidt_decompose(&f, 1e-12).unwrap();
        assert_eq!(numerical_rank(&d), 1);
    }

    #[test]
    fn identity_has_full_rank() {
        let f = DiscretizedFunction::with_unit_weights(DMatrix::identity(2, 2)).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(numerical_rank(&d), 2);
    }

    #[test]
    fn outer_product_has_rank_one() {
        let u = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let v = DVector::from_vec(vec![0.5, 1.0]);
        let f = DiscretizedFunction::with_unit_weights(&u * v.transpose()).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(numerical_rank(&d), 1);
    }

    #[test]
    fn tail_width_examples() {
        let f = func(
            dmatrix![3.0, 0.0, 0.0; 0.0, 2.0, 0.0; 0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
        );
        let d = schmidt_decompose_default(&f).unwrap();
        assert_relative_eq!(tail_width(&d, 1), 5.0f64.sqrt(), max_relative = 1e-14);
        assert_eq!(tail_width(&d, 3), 0.0);
        assert_eq!(tail_width(&d, 7), 0.0);
        assert_relative_eq!(
            tail_width(&d, 0),
            total_l2_norm_squared(&f).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn orthonormality_and_reconstruction() {
        let f = func(
            dmatrix![1.0, 2.0, 0.0, 1.0; -1.0, 0.5, 2.0, 0.0; 0.3, 0.0, 1.0, -2.0],
            vec![0.5, 1.5, 2.0, 0.25],
        );
        let d = schmidt_decompose_default(&f).unwrap();
        let r = d.rank();
        let ltl = d.left_factors().transpose() * d.left_factors();
        assert_relative_eq!(ltl, DMatrix::identity(r, r), epsilon = 1e-10);
        let w = DMatrix::from_diagonal(f.weights());
        let rtr = d.right_factors().transpose() * w * d.right_factors();
        assert_relative_eq!(rtr, DMatrix::identity(r, r), epsilon = 1e-10);
        assert_relative_eq!(reconstruct(&d), *f.values(), epsilon = 1e-10 * d.sigma()[0]);
    }

    #[test]
    fn sigma_invariant_under_permutation_and_split_and_rotation() {
        let f = func(dmatrix![1.0, 2.0, 0.5; -1.0, 0.0, 1.5], vec![0.5, 2.0, 1.0]);
        let d = schmidt_decompose_default(&f).unwrap();

        // permute columns together with weights
        let perm = func(dmatrix![0.5, 1.0, 2.0; 1.5, -1.0, 0.0], vec![1.0, 0.5, 2.0]);
        let dp = schmidt_decompose_default(&perm).unwrap();
        for (a, b) in d.sigma().iter().zip(dp.sigma()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }

        // split the middle column into two half-weight copies
        let split = func(
            dmatrix![1.0, 2.0, 2.0, 0.5; -1.0, 0.0, 0.0, 1.5],
            vec![0.5, 1.0, 1.0, 1.0],
        );
        let ds = schmidt_decompose_default(&split).unwrap();
        for (a, b) in d.sigma().iter().zip(ds.sigma()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }

        // rotate the ambient space by an orthogonal matrix
        let angle = 0.7f64;
        let q = dmatrix![angle.cos(), -angle.sin(); angle.sin(), angle.cos()];
        let rot = DiscretizedFunction::new(q * f.values(), f.weights().clone()).unwrap();
        let dr = schmidt_decompose_default(&rot).unwrap();
        for (a, b) in d.sigma().iter().zip(dr.sigma()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn clustered_singular_values_are_recovered_exactly() {
        // rotated diag(1, 0.99, 0.5): the near-degenerate leading pair is
        // a stress case where bidiagonalization SVDs have lost digits
        let f =
            crate::generators::gen_prescribed_spectrum(6, 6, 12, &[1.0, 0.99, 0.5], None).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(d.rank(), 3);
        assert_relative_eq!(d.sigma()[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(d.sigma()[1], 0.99, max_relative = 1e-12);
        assert_relative_eq!(d.sigma()[2], 0.5, max_relative = 1e-12);
        assert_relative_eq!(reconstruct(&d), *f.values(), epsilon = 1e-12);
    }

    #[test]
    fn parseval_tail_identity() {
        let f = func(
            dmatrix![1.0, 0.2, -0.7; 2.0, 1.0, 0.1; 0.0, -1.0, 1.0],
            vec![1.25, 0.4, 3.0],
        );
        let d = schmidt_decompose_default(&f).unwrap();
        let total = total_l2_norm_squared(&f);
        for k in 0..=d.rank() {
            let head: f64 = d.sigma().iter().take(k).map(|s| s * s).sum();
            let tail = tail_width(&d, k);
            assert_relative_eq!(head + tail * tail, total, max_relative = 1e-10);
        }
    }
}
