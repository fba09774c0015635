//! Subset selection and certificates for the sample-based subspace bound.
//!
//! The projection error of a subset S is `sum_j w_j ||a_j - P_S a_j||^2`
//! where `P_S` projects onto the span of the selected columns. The optimal
//! k-dimensional error is the squared tail width, and the best k-subset is
//! guaranteed to come within a factor k+1 of it (squared); `certify_bound`
//! checks that guarantee on concrete instances.

use std::fmt;

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{total_l2_norm_squared, DiscretizedFunction};
use crate::ortho::{pivoted_basis, residual_norm_squared};
use crate::samplers::{
    binomial_capped, enumerate_distribution_capped, substream_rng, KdppSampler, McmcSampler,
    SamplerConfig, SamplerMethod, DEFAULT_ENUM_CAP,
};
use crate::schmidt::{schmidt_decompose_default, tail_width};
use crate::volumes::residual_volume;

/// Relative slack when comparing errors against the (k+1) bound.
const BOUND_REL_SLACK: f64 = 1e-9;
/// Errors below this fraction of the total norm count as zero.
const ZERO_ERROR_REL: f64 = 1e-12;

/// A selection strategy, identified on the CLI by a stable string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Minimum projection error over all subsets of size k.
    Exhaustive,
    /// Best of `draws` volume-sampled subsets.
    VolumeBestOf { draws: usize },
    /// Greedy pick of the largest weighted residual column.
    GreedyResidual,
    /// Greedy pick of the largest incremental volume (unweighted residual).
    GreedyVolume,
}

impl Strategy {
    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::VolumeBestOf { .. } => "volume-best-of",
            Strategy::GreedyResidual => "greedy-residual",
            Strategy::GreedyVolume => "greedy-volume",
        }
    }

    /// Replaces the draw count on the volume-best-of variant; no-op otherwise.
    pub fn with_draws(self, draws: usize) -> Self {
        match self {
            Strategy::VolumeBestOf { .. } => Strategy::VolumeBestOf { draws },
            other => other,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "volume-best-of" => Ok(Strategy::VolumeBestOf { draws: 1 }),
            "greedy-residual" => Ok(Strategy::GreedyResidual),
            "greedy-volume" => Ok(Strategy::GreedyVolume),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

/// Outcome of a selection strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Chosen column indices; greedy strategies keep pick order, the others
    /// sort ascending.
    pub indices: Vec<usize>,
    /// Squared weighted projection error of the chosen span.
    pub squared_error: f64,
    /// Strategy label, including the sampler method for volume-best-of and
    /// a `+padded` marker when the subset was extended past the rank.
    pub method: String,
    /// Number of random draws consumed; zero for deterministic strategies.
    pub draws_used: usize,
}

/// Comparison of an achieved error against the optimal tail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCertificate {
    pub k: usize,
    /// Squared optimal error: the tail of the squared singular values.
    pub optimal_tail_squared: f64,
    pub achieved_squared_error: f64,
    /// Achieved over optimal; absent when the optimal error is zero.
    pub prefactor_squared: Option<f64>,
    /// Whether achieved <= (k+1) * optimal (with zero-tail handling).
    pub satisfied: bool,
}

/// Squared weighted projection error of all columns onto the span of the
/// selected ones. Any number of indices, repeats and dependent columns
/// allowed; the span is what matters.
pub fn projection_error(f: &DiscretizedFunction, indices: &[usize]) -> Result<f64> {
    let n = f.num_points();
    for &j in indices {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
    }
    let selected: Vec<_> = indices.iter().map(|&j| f.column(j)).collect();
    let basis = pivoted_basis(&selected, None, selected.len());
    let mut total = 0.0;
    for j in 0..n {
        total += f.weights()[j] * residual_norm_squared(&basis.q, &f.column(j));
    }
    Ok(total)
}

/// Same quantity through per-column Schur complements; needs distinct
/// indices. Cross-validates the orthogonalization path.
pub fn projection_error_schur(f: &DiscretizedFunction, indices: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..f.num_points() {
        total += f.weights()[j] * residual_volume(f, indices, j)?;
    }
    Ok(total)
}

/// Minimum projection error over all subsets of size `min(k, n)`; ties go
/// to the lexicographically smallest subset.
pub fn select_exhaustive(f: &DiscretizedFunction, k: usize, cap: u64) -> Result<SelectionResult> {
    let n = f.num_points();
    let size = k.min(n);
    match binomial_capped(n, size, cap as u128) {
        Some(count) if count <= cap as u128 => {}
        _ => {
            return Err(Error::CombinatorialBlowup {
                subsets: binomial_capped(n, size, u128::MAX / 2).unwrap_or(u128::MAX),
                k: size,
                cap,
            })
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in (0..n).combinations(size) {
        let err = projection_error(f, &combo)?;
        if best.as_ref().is_none_or(|(b, _)| err < *b) {
            best = Some((err, combo));
        }
    }
    let (squared_error, indices) = best.expect("at least one subset of capped size");
    Ok(SelectionResult {
        indices,
        squared_error,
        method: "exhaustive".to_string(),
        draws_used: 0,
    })
}

/// Extends a subset with uniform draws from the unused indices; used when
/// the requested size exceeds the rank.
fn pad_subset(
    f: &DiscretizedFunction,
    mut subset: Vec<usize>,
    k: usize,
    seed: u64,
    draw_index: u64,
) -> Vec<usize> {
    let n = f.num_points();
    // top-of-range substreams keep padding disjoint from the draw streams
    let mut rng = substream_rng(seed, u64::MAX - draw_index);
    let mut available: Vec<usize> = (0..n).filter(|j| !subset.contains(j)).collect();
    while subset.len() < k && !available.is_empty() {
        let pick = rng.random_range(0..available.len());
        subset.push(available.swap_remove(pick));
    }
    subset.sort_unstable();
    subset
}

/// Draws `draws` volume-sampled subsets and keeps the one with the
/// smallest projection error. When k exceeds the rank, each draw selects
/// rank-many indices and is padded with uniform unused indices; the method
/// label gains a `+padded` marker.
pub fn select_volume_best_of(
    f: &DiscretizedFunction,
    k: usize,
    draws: usize,
    config: &SamplerConfig,
) -> Result<SelectionResult> {
    if draws == 0 {
        return Err(Error::Usage(
            "volume-best-of needs at least one draw".to_string(),
        ));
    }
    let d = schmidt_decompose_default(f)?;
    let k_eff = k.min(d.rank());
    let padded = k_eff < k;

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |subset: Vec<usize>, t: u64| -> Result<()> {
        let subset = if padded {
            pad_subset(f, subset, k, config.seed, t)
        } else {
            subset
        };
        let err = projection_error(f, &subset)?;
        if best.as_ref().is_none_or(|(b, _)| err < *b) {
            best = Some((err, subset));
        }
        Ok(())
    };
    match config.method {
        SamplerMethod::Enumerate => {
            let dist = enumerate_distribution_capped(f, k_eff, DEFAULT_ENUM_CAP)?;
            for t in 0..draws {
                let mut rng = substream_rng(config.seed, t as u64);
                consider(dist.sample(&mut rng), t as u64)?;
            }
        }
        SamplerMethod::Kdpp => {
            let sampler = KdppSampler::new(&d, f, k_eff, config)?;
            for t in 0..draws {
                consider(sampler.draw_at(t as u64), t as u64)?;
            }
        }
        SamplerMethod::Mcmc => {
            let mut sampler = McmcSampler::new(f, k_eff, config)?;
            for t in 0..draws {
                consider(sampler.draw_at(t as u64), t as u64)?;
            }
        }
    }
    let (squared_error, indices) = best.expect("draws >= 1");
    let mut method = format!("volume-best-of({})", config.method.as_str());
    if padded {
        method.push_str("+padded");
    }
    Ok(SelectionResult {
        indices,
        squared_error,
        method,
        draws_used: draws,
    })
}

/// Greedily picks the column with the largest weighted residual norm,
/// projects it out, and repeats. Stops early once every residual vanishes;
/// ties go to the lowest index.
pub fn select_greedy_residual(f: &DiscretizedFunction, k: usize) -> Result<SelectionResult> {
    let n = f.num_points();
    let cols: Vec<_> = (0..n).map(|j| f.column(j)).collect();
    let basis = pivoted_basis(&cols, Some(f.weights().as_slice()), k.min(n));
    let squared_error = projection_error(f, &basis.picked)?;
    Ok(SelectionResult {
        indices: basis.picked,
        squared_error,
        method: "greedy-residual".to_string(),
        draws_used: 0,
    })
}

/// Greedy maximum-volume surrogate: same loop with unweighted residual
/// norms, maximizing the incremental Gram determinant ratio.
pub fn select_greedy_max_volume(f: &DiscretizedFunction, k: usize) -> Result<SelectionResult> {
    let n = f.num_points();
    let cols: Vec<_> = (0..n).map(|j| f.column(j)).collect();
    let basis = pivoted_basis(&cols, None, k.min(n));
    let squared_error = projection_error(f, &basis.picked)?;
    Ok(SelectionResult {
        indices: basis.picked,
        squared_error,
        method: "greedy-volume".to_string(),
        draws_used: 0,
    })
}

/// Runs the given strategy. `cap` bounds exhaustive enumeration only.
pub fn run_strategy(
    f: &DiscretizedFunction,
    k: usize,
    strategy: Strategy,
    config: &SamplerConfig,
    cap: u64,
) -> Result<SelectionResult> {
    match strategy {
        Strategy::Exhaustive => select_exhaustive(f, k, cap),
        Strategy::VolumeBestOf { draws } => select_volume_best_of(f, k, draws, config),
        Strategy::GreedyResidual => select_greedy_residual(f, k),
        Strategy::GreedyVolume => select_greedy_max_volume(f, k),
    }
}

/// Builds the bound certificate for an already-computed selection.
pub fn certify_selection(
    f: &DiscretizedFunction,
    k: usize,
    selection: &SelectionResult,
) -> Result<BoundCertificate> {
    let d = schmidt_decompose_default(f)?;
    let t = tail_width(&d, k);
    let optimal = t * t;
    let achieved = selection.squared_error;
    let scale = total_l2_norm_squared(f);
    let prefactor_squared = (optimal > 0.0).then(|| achieved / optimal);
    let satisfied = if optimal == 0.0 {
        achieved <= ZERO_ERROR_REL * scale
    } else {
        achieved <= (k as f64 + 1.0) * optimal * (1.0 + BOUND_REL_SLACK) + ZERO_ERROR_REL * scale
    };
    Ok(BoundCertificate {
        k,
        optimal_tail_squared: optimal,
        achieved_squared_error: achieved,
        prefactor_squared,
        satisfied,
    })
}

/// Selects with `strategy` and certifies the result against the
/// existence bound `achieved <= (k+1) * optimal`.
pub fn certify_bound(
    f: &DiscretizedFunction,
    k: usize,
    strategy: Strategy,
    config: &SamplerConfig,
    cap: u64,
) -> Result<BoundCertificate> {
    let selection = run_strategy(f, k, strategy, config, cap)?;
    certify_selection(f, k, &selection)
}
