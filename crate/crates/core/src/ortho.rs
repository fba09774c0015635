//! Column-pivoted orthogonalization, shared by projection errors, the
//! singular-Gram fallback and the greedy selectors.

use nalgebra::DVector;

/// Residual norm below `ORTHO_DROP_REL * original column norm` counts as
/// linearly dependent on the columns already picked.
pub(crate) const ORTHO_DROP_REL: f64 = 1e-12;

pub(crate) struct PivotedBasis {
    /// Orthonormal basis vectors in pick order.
    pub q: Vec<DVector<f64>>,
    /// Positions into the candidate list, in pick order.
    pub picked: Vec<usize>,
}

/// Modified Gram-Schmidt with column pivoting over `candidates`, picking at
/// most `max_picks` columns. At each step the candidate maximizing
/// `score_weight[j] * ||residual_j||^2` is taken (ties by lowest position);
/// candidates whose residual has dropped below `ORTHO_DROP_REL` relative to
/// their original norm are no longer eligible.
pub(crate) fn pivoted_basis(
    candidates: &[DVector<f64>],
    score_weights: Option<&[f64]>,
    max_picks: usize,
) -> PivotedBasis {
    let mut residuals: Vec<DVector<f64>> = candidates.to_vec();
    let norms0: Vec<f64> = candidates.iter().map(|c| c.norm()).collect();
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut picked = Vec::new();

    while picked.len() < max_picks {
        let mut best: Option<(usize, f64)> = None;
        for (j, r) in residuals.iter().enumerate() {
            let rnorm = r.norm();
            if rnorm <= ORTHO_DROP_REL * norms0[j] || rnorm == 0.0 {
                continue;
            }
            let score = score_weights.map_or(1.0, |w| w[j]) * rnorm * rnorm;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        let mut v = residuals[j].clone();
        // one reorthogonalization pass keeps the basis orthonormal to
        // machine precision even for nearly dependent picks
        for b in &q {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        v /= v.norm();
        for r in residuals.iter_mut() {
            let c = v.dot(r);
            r.axpy(-c, &v, 1.0);
        }
        q.push(v);
        picked.push(j);
    }
    PivotedBasis { q, picked }
}

/// Squared norm of `x` minus its projection onto the span of `basis`
/// (assumed orthonormal). Computed from the explicit residual vector, so the
/// result is nonnegative by construction.
pub(crate) fn residual_norm_squared(basis: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let c = b.dot(&r);
        r.axpy(-c, b, 1.0);
    }
    r.norm_squared()
}
