//! Drawing k-subsets from the volume-sampling distribution
//! `P(S) proportional to det G_S * prod_{j in S} w_j`.
//!
//! Three routes: exact enumeration over all subsets, exact spectral k-DPP
//! sampling through the eigendecomposition of the weighted Gram kernel, and
//! a Metropolis swap chain. The k-DPP kernel is the Gram of the
//! weight-scaled columns, so its nonzero eigenvalues are the squared
//! singular values and its eigenvectors come straight from the Schmidt
//! decomposition.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::DiscretizedFunction;
use crate::ortho::pivoted_basis;
use crate::schmidt::SchmidtDecomposition;
use crate::volumes::log_det_gram;

/// Default cap on the number of subsets an exhaustive enumeration may visit.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

/// How a subset is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMethod {
    /// Exact categorical sampling from the enumerated distribution.
    Enumerate,
    /// Exact spectral k-DPP sampling.
    Kdpp,
    /// Metropolis swap chain.
    Mcmc,
}

impl SamplerMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerMethod::Enumerate => "enumerate",
            SamplerMethod::Kdpp => "kdpp",
            SamplerMethod::Mcmc => "mcmc",
        }
    }
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(SamplerMethod::Enumerate),
            "kdpp" => Ok(SamplerMethod::Kdpp),
            "mcmc" => Ok(SamplerMethod::Mcmc),
            other => Err(Error::Usage(format!(
                "unknown sampler method {other:?} (expected enumerate, kdpp or mcmc)"
            ))),
        }
    }
}

/// Seed, method and chain length for the samplers.
///
/// `mcmc_steps = None` resolves to `50 * n * k` at sampling time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub method: SamplerMethod,
    pub mcmc_steps: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            method: SamplerMethod::Kdpp,
            mcmc_steps: None,
        }
    }
}

/// Substreams are indexed by draw so that parallel draws stay reproducible
/// independent of scheduling.
pub(crate) fn substream_rng(seed: u64, draw_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    rng
}

fn sample_categorical(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return i;
        }
        u -= w;
    }
    // rounding pushed u past the last positive weight
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("at least one positive weight")
}

/// Log of `det G_S * prod_{j in S} w_j`; negative infinity for dependent
/// columns.
pub fn log_weighted_volume(f: &DiscretizedFunction, subset: &[usize]) -> Result<f64> {
    let volume = log_det_gram(f, subset)?;
    if volume.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let log_w: f64 = subset.iter().map(|&j| f.weights()[j].ln()).sum();
    Ok(volume.log_value() + log_w)
}

/// Exact probability table over all k-subsets, in canonical order
/// (ascending indices inside a subset, subsets lexicographic).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDistribution {
    subsets: Vec<Vec<usize>>,
    probabilities: Vec<f64>,
}

impl SubsetDistribution {
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Probability of a specific subset (given with ascending indices).
    pub fn probability_of(&self, subset: &[usize]) -> f64 {
        match self.subsets.binary_search_by(|s| s.as_slice().cmp(subset)) {
            Ok(pos) => self.probabilities[pos],
            Err(_) => 0.0,
        }
    }

    /// Categorical draw from the table.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        self.subsets[sample_categorical(rng, &self.probabilities)].clone()
    }
}

/// `C(n, k)`, or `None` once the value exceeds `cap`.
pub(crate) fn binomial_capped(n: usize, k: usize, cap: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul((n - k + i) as u128)? / i as u128;
        if c > cap {
            return None;
        }
    }
    Some(c)
}

/// Enumerates the volume-sampling distribution with the default subset cap.
pub fn enumerate_distribution(f: &DiscretizedFunction, k: usize) -> Result<SubsetDistribution> {
    enumerate_distribution_capped(f, k, DEFAULT_ENUM_CAP)
}

/// Enumerates `P(S) = det G_S * prod w / normalizer` over all `C(n, k)`
/// subsets. Subsets with dependent columns receive exactly zero.
pub fn enumerate_distribution_capped(
    f: &DiscretizedFunction,
    k: usize,
    cap: u64,
) -> Result<SubsetDistribution> {
    let n = f.num_points();
    if k > n {
        return Err(Error::RankDeficient { k });
    }
    match binomial_capped(n, k, cap as u128) {
        Some(count) if count <= cap as u128 => {}
        _ => {
            return Err(Error::CombinatorialBlowup {
                subsets: binomial_capped(n, k, u128::MAX / 2).unwrap_or(u128::MAX),
                k,
                cap,
            })
        }
    }

    let mut subsets = Vec::new();
    let mut log_weights = Vec::new();
    let mut max_log = f64::NEG_INFINITY;
    for combo in (0..n).combinations(k) {
        let lw = log_weighted_volume(f, &combo)?;
        max_log = max_log.max(lw);
        subsets.push(combo);
        log_weights.push(lw);
    }
    if max_log == f64::NEG_INFINITY {
        return Err(Error::RankDeficient { k });
    }
    let unnormalized: Vec<f64> = log_weights
        .iter()
        .map(|&lw| {
            if lw == f64::NEG_INFINITY {
                0.0
            } else {
                (lw - max_log).exp()
            }
        })
        .collect();
    let total: f64 = unnormalized.iter().sum();
    let probabilities = unnormalized.into_iter().map(|q| q / total).collect();
    Ok(SubsetDistribution {
        subsets,
        probabilities,
    })
}

/// Exact spectral k-DPP sampler for the volume-sampling distribution.
///
/// Phase one picks k eigenvalue indices using the elementary-symmetric
/// recurrence over the kernel spectrum; phase two samples items one by one
/// from the squared row norms of the chosen eigenvectors, eliminating the
/// sampled coordinate after each pick.
pub struct KdppSampler {
    eigvecs: DMatrix<f64>,
    eigvals_scaled: Vec<f64>,
    /// esp_table[l][i] = e_l of the first i scaled eigenvalues.
    esp_table: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    next_draw: u64,
}

impl KdppSampler {
    pub fn new(
        d: &SchmidtDecomposition,
        f: &DiscretizedFunction,
        k: usize,
        config: &SamplerConfig,
    ) -> Result<Self> {
        let r = d.rank();
        if r < k {
            return Err(Error::RankDeficient { k });
        }
        let n = f.num_points();
        // Euclidean-orthonormal eigenvectors of the weighted Gram kernel
        let mut eigvecs = DMatrix::zeros(n, r);
        for i in 0..r {
            for j in 0..n {
                eigvecs[(j, i)] = f.weights()[j].sqrt() * d.right_factors()[(j, i)];
            }
        }
        let sigma2 = d.sigma_squared();
        let scale = sigma2
            .first()
            .copied()
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        let eigvals_scaled: Vec<f64> = sigma2.iter().map(|&l| l / scale).collect();

        let mut esp_table = vec![vec![0.0; r + 1]; k + 1];
        esp_table[0] = vec![1.0; r + 1];
        for l in 1..=k {
            for i in 1..=r {
                esp_table[l][i] =
                    esp_table[l][i - 1] + eigvals_scaled[i - 1] * esp_table[l - 1][i - 1];
            }
        }
        Ok(Self {
            eigvecs,
            eigvals_scaled,
            esp_table,
            k,
            seed: config.seed,
            next_draw: 0,
        })
    }

    /// Draws the next subset, advancing the internal draw counter.
    pub fn draw(&mut self) -> Vec<usize> {
        let index = self.next_draw;
        self.next_draw += 1;
        self.draw_at(index)
    }

    /// Deterministic draw on the substream for `draw_index`.
    pub fn draw_at(&self, draw_index: u64) -> Vec<usize> {
        let mut rng = substream_rng(self.seed, draw_index);
        let chosen = self.select_eigenvectors(&mut rng);
        self.sample_items(&chosen, &mut rng)
    }

    fn select_eigenvectors(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let r = self.eigvals_scaled.len();
        let mut chosen = Vec::with_capacity(self.k);
        let mut remaining = self.k;
        for i in (1..=r).rev() {
            if remaining == 0 {
                break;
            }
            // forced once only as many eigenvalues as slots remain
            let denom = self.esp_table[remaining][i];
            let p = if i == remaining {
                1.0
            } else {
                self.eigvals_scaled[i - 1] * self.esp_table[remaining - 1][i - 1] / denom
            };
            if rng.random::<f64>() < p {
                chosen.push(i - 1);
                remaining -= 1;
            }
        }
        chosen
    }

    fn sample_items(&self, eig_indices: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = self.eigvecs.nrows();
        let mut v = DMatrix::zeros(n, eig_indices.len());
        for (c, &i) in eig_indices.iter().enumerate() {
            v.set_column(c, &self.eigvecs.column(i));
        }
        let mut result = Vec::with_capacity(self.k);
        while v.ncols() > 0 {
            let row_norms: Vec<f64> = (0..n).map(|j| v.row(j).norm_squared()).collect();
            let item = sample_categorical(rng, &row_norms);
            result.push(item);
            if v.ncols() == 1 {
                break;
            }
            v = eliminate_coordinate(v, item);
        }
        result.sort_unstable();
        result
    }
}

/// Restricts the span of `v`'s columns to vectors vanishing at coordinate
/// `item`, returning an orthonormal basis with one column fewer.
fn eliminate_coordinate(v: DMatrix<f64>, item: usize) -> DMatrix<f64> {
    let cols = v.ncols();
    let pivot_col = (0..cols)
        .max_by(|&a, &b| v[(item, a)].abs().total_cmp(&v[(item, b)].abs()))
        .expect("at least one column");
    let pivot_val = v[(item, pivot_col)];
    let pivot = v.column(pivot_col).into_owned();
    let mut reduced = DMatrix::zeros(v.nrows(), cols - 1);
    let mut out = 0;
    for c in 0..cols {
        if c == pivot_col {
            continue;
        }
        let mut col = v.column(c).into_owned();
        col.axpy(-v[(item, c)] / pivot_val, &pivot, 1.0);
        reduced.set_column(out, &col);
        out += 1;
    }
    // re-orthonormalize with modified Gram-Schmidt
    for c in 0..reduced.ncols() {
        for prev in 0..c {
            let coeff = reduced.column(prev).dot(&reduced.column(c));
            let prev_col = reduced.column(prev).into_owned();
            reduced.column_mut(c).axpy(-coeff, &prev_col, 1.0);
        }
        let norm = reduced.column(c).norm();
        if norm > 0.0 {
            reduced.column_mut(c).unscale_mut(norm);
        }
    }
    reduced
}

/// Single k-DPP draw on substream zero; deterministic given the seed.
pub fn sample_kdpp(
    d: &SchmidtDecomposition,
    f: &DiscretizedFunction,
    k: usize,
    config: &SamplerConfig,
) -> Result<Vec<usize>> {
    Ok(KdppSampler::new(d, f, k, config)?.draw_at(0))
}

/// Metropolis swap chain targeting the volume-sampling distribution.
///
/// Proposals swap one in-subset index for one out-subset index, both
/// uniform; acceptance uses the ratio of weighted volumes in log domain.
/// The chain starts from the greedy maximum-volume subset.
pub struct McmcSampler<'a> {
    f: &'a DiscretizedFunction,
    k: usize,
    steps: usize,
    seed: u64,
    next_draw: u64,
    start: Vec<usize>,
    log_weight_cache: HashMap<Vec<usize>, f64>,
}

impl<'a> McmcSampler<'a> {
    pub fn new(f: &'a DiscretizedFunction, k: usize, config: &SamplerConfig) -> Result<Self> {
        let n = f.num_points();
        if k > n {
            return Err(Error::RankDeficient { k });
        }
        let steps = match config.mcmc_steps {
            Some(s) => {
                if s < n * k {
                    return Err(Error::Usage(format!(
                        "mcmc steps {s} below the minimum n*k = {}",
                        n * k
                    )));
                }
                s
            }
            None => 50 * n * k,
        };
        let cols: Vec<_> = (0..n).map(|j| f.column(j)).collect();
        let start_basis = pivoted_basis(&cols, None, k);
        if start_basis.picked.len() < k {
            return Err(Error::RankDeficient { k });
        }
        let mut start = start_basis.picked;
        start.sort_unstable();
        if log_weighted_volume(f, &start)? == f64::NEG_INFINITY {
            return Err(Error::NoNonzeroStart { k });
        }
        Ok(Self {
            f,
            k,
            steps,
            seed: config.seed,
            next_draw: 0,
            start,
            log_weight_cache: HashMap::new(),
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn log_weight(&mut self, subset: &[usize]) -> f64 {
        if let Some(&lw) = self.log_weight_cache.get(subset) {
            return lw;
        }
        let lw = log_weighted_volume(self.f, subset).expect("indices validated");
        self.log_weight_cache.insert(subset.to_vec(), lw);
        lw
    }

    fn step(&mut self, state: &mut Vec<usize>, log_w: &mut f64, rng: &mut ChaCha8Rng) {
        let n = self.f.num_points();
        if n == self.k {
            return;
        }
        let pos = rng.random_range(0..self.k);
        let out_rank = rng.random_range(0..n - self.k);
        let mut in_state = vec![false; n];
        for &j in state.iter() {
            in_state[j] = true;
        }
        let out_index = (0..n)
            .filter(|&j| !in_state[j])
            .nth(out_rank)
            .expect("out_rank < n - k");
        let mut proposal = state.clone();
        proposal[pos] = out_index;
        proposal.sort_unstable();
        let log_w_new = self.log_weight(&proposal);
        if log_w_new == f64::NEG_INFINITY {
            return;
        }
        let log_ratio = log_w_new - *log_w;
        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            *state = proposal;
            *log_w = log_w_new;
        }
    }

    /// Runs a fresh chain for `self.steps` steps on the next substream and
    /// returns the final state.
    pub fn draw(&mut self) -> Vec<usize> {
        let index = self.next_draw;
        self.next_draw += 1;
        self.draw_at(index)
    }

    /// Deterministic independent chain run for `draw_index`.
    pub fn draw_at(&mut self, draw_index: u64) -> Vec<usize> {
        let mut rng = substream_rng(self.seed, draw_index);
        let mut state = self.start.clone();
        let mut log_w = self.log_weight(&state);
        for _ in 0..self.steps {
            self.step(&mut state, &mut log_w, &mut rng);
        }
        state
    }

    /// One long chain: discards a burn-in of 20% of the configured step
    /// count, then records the state after each of `num_samples` further
    /// steps.
    pub fn sample_chain(&mut self, num_samples: usize) -> Vec<Vec<usize>> {
        let index = self.next_draw;
        self.next_draw += 1;
        let mut rng = substream_rng(self.seed, index);
        let mut state = self.start.clone();
        let mut log_w = self.log_weight(&state);
        let burn_in = self.steps / 5;
        for _ in 0..burn_in {
            self.step(&mut state, &mut log_w, &mut rng);
        }
        let mut out = Vec::with_capacity(num_samples);
        for _ in 0..num_samples {
            self.step(&mut state, &mut log_w, &mut rng);
            out.push(state.clone());
        }
        out
    }
}

/// Metropolis acceptance probability for moving from `current` to
/// `proposal` under the weighted-volume target.
pub fn swap_acceptance_probability(
    f: &DiscretizedFunction,
    current: &[usize],
    proposal: &[usize],
) -> Result<f64> {
    let log_cur = log_weighted_volume(f, current)?;
    let log_new = log_weighted_volume(f, proposal)?;
    if log_new == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if log_cur == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    Ok((log_new - log_cur).exp().min(1.0))
}

/// Single chain run on substream zero; deterministic given the seed.
pub fn sample_mcmc(
    f: &DiscretizedFunction,
    k: usize,
    config: &SamplerConfig,
) -> Result<Vec<usize>> {
    Ok(McmcSampler::new(f, k, config)?.draw_at(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schmidt::schmidt_decompose_default;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, DVector};

    fn diag21() -> DiscretizedFunction {
        DiscretizedFunction::with_unit_weights(dmatrix![2.0, 0.0; 0.0, 1.0]).unwrap()
    }

    #[test]
    fn enumerate_diag_k1() {
        let dist = enumerate_distribution(&diag21(), 1).unwrap();
        assert_eq!(dist.subsets(), &[vec![0], vec![1]]);
        assert_relative_eq!(dist.probabilities()[0], 0.8, max_relative = 1e-12);
        assert_relative_eq!(dist.probabilities()[1], 0.2, max_relative = 1e-12);
    }

    #[test]
    fn enumerate_full_subset_has_probability_one() {
        let dist = enumerate_distribution(&diag21(), 2).unwrap();
        assert_eq!(dist.len(), 1);
        assert_relative_eq!(dist.probabilities()[0], 1.0);
    }

    #[test]
    fn collinear_pair_gets_exact_zero() {
        let f = DiscretizedFunction::with_unit_weights(dmatrix![
            1.0, 2.0, 0.0;
            0.0, 0.0, 1.0
        ])
        .unwrap();
        let dist = enumerate_distribution(&f, 2).unwrap();
        assert_eq!(dist.probability_of(&[0, 1]), 0.0);
        assert!(dist.probability_of(&[0, 2]) > 0.0);
        assert!(dist.probability_of(&[1, 2]) > 0.0);
    }

    #[test]
    fn enumerate_rejects_rank_deficient() {
        let f = DiscretizedFunction::with_unit_weights(DMatrix::zeros(2, 3)).unwrap();
        assert!(matches!(
            enumerate_distribution(&f, 1),
            Err(Error::RankDeficient { k: 1 })
        ));
    }

    #[test]
    fn enumerate_rejects_blowup() {
        let f = DiscretizedFunction::with_unit_weights(DMatrix::from_fn(2, 40, |i, j| {
            ((i + 2) * (j + 1)) as f64
        }))
        .unwrap();
        assert!(matches!(
            enumerate_distribution_capped(&f, 20, 1_000_000),
            Err(Error::CombinatorialBlowup { .. })
        ));
    }

    #[test]
    fn probabilities_invariant_under_column_scaling() {
        let f = DiscretizedFunction::new(
            dmatrix![1.0, 0.4, -0.3; 0.2, 1.5, 0.9],
            DVector::from_vec(vec![0.5, 1.0, 2.0]),
        )
        .unwrap();
        let scaled = DiscretizedFunction::new(f.values() * 7.5, f.weights().clone()).unwrap();
        let a = enumerate_distribution(&f, 2).unwrap();
        let b = enumerate_distribution(&scaled, 2).unwrap();
        for (p, q) in a.probabilities().iter().zip(b.probabilities()) {
            assert_relative_eq!(p, q, max_relative = 1e-12);
        }
    }

    #[test]
    fn probabilities_permute_with_relabeling() {
        let f = DiscretizedFunction::new(
            dmatrix![1.0, 0.4, -0.3; 0.2, 1.5, 0.9],
            DVector::from_vec(vec![0.5, 1.0, 2.0]),
        )
        .unwrap();
        // relabel (0,1,2) -> (2,0,1): new column p is old column perm[p]
        let perm = [1usize, 2, 0];
        let values = DMatrix::from_fn(2, 3, |i, p| f.values()[(i, perm[p])]);
        let weights = DVector::from_iterator(3, perm.iter().map(|&p| f.weights()[p]));
        let g = DiscretizedFunction::new(values, weights).unwrap();
        let df = enumerate_distribution(&f, 2).unwrap();
        let dg = enumerate_distribution(&g, 2).unwrap();
        for (subset, &p) in dg.subsets().iter().zip(dg.probabilities()) {
            let mut orig: Vec<usize> = subset.iter().map(|&j| perm[j]).collect();
            orig.sort_unstable();
            assert_relative_eq!(p, df.probability_of(&orig), max_relative = 1e-12);
        }
    }

    #[test]
    fn kdpp_matches_exact_marginal() {
        let f = diag21();
        let d = schmidt_decompose_default(&f).unwrap();
        let sampler = KdppSampler::new(&d, &f, 1, &SamplerConfig::default()).unwrap();
        let draws = 100_000u64;
        let hits = (0..draws).filter(|&t| sampler.draw_at(t) == [0]).count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.8).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn kdpp_full_rank_draws_everything() {
        let f = diag21();
        let d = schmidt_decompose_default(&f).unwrap();
        let subset = sample_kdpp(&d, &f, 2, &SamplerConfig::default()).unwrap();
        assert_eq!(subset, vec![0, 1]);
    }

    #[test]
    fn kdpp_rejects_rank_deficient() {
        let f = DiscretizedFunction::with_unit_weights(dmatrix![1.0, 2.0; 2.0, 4.0]).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert!(matches!(
            sample_kdpp(&d, &f, 2, &SamplerConfig::default()),
            Err(Error::RankDeficient { k: 2 })
        ));
    }

    #[test]
    fn kdpp_total_variation_against_enumeration() {
        let f = DiscretizedFunction::new(
            dmatrix![
                1.0, 0.4, -0.3, 0.8, 0.1;
                0.2, 1.5, 0.9, -0.2, 0.5;
                -0.6, 0.3, 1.1, 0.4, -0.9;
                0.5, -0.2, 0.6, 1.3, 0.2
            ],
            DVector::from_vec(vec![0.5, 1.0, 2.0, 0.75, 1.25]),
        )
        .unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        let exact = enumerate_distribution(&f, 2).unwrap();
        let sampler = KdppSampler::new(&d, &f, 2, &SamplerConfig::default()).unwrap();
        let draws = 10_000u64;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for t in 0..draws {
            *counts.entry(sampler.draw_at(t)).or_insert(0) += 1;
        }
        let tv: f64 = exact
            .subsets()
            .iter()
            .zip(exact.probabilities())
            .map(|(s, &p)| {
                let observed = *counts.get(s).unwrap_or(&0) as f64 / draws as f64;
                (observed - p).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.02, "total variation {tv}");
    }

    #[test]
    fn kdpp_is_reproducible() {
        let f = diag21();
        let d = schmidt_decompose_default(&f).unwrap();
        let config = SamplerConfig {
            seed: 42,
            ..Default::default()
        };
        let a = sample_kdpp(&d, &f, 1, &config).unwrap();
        let b = sample_kdpp(&d, &f, 1, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mcmc_acceptance_probability_examples() {
        let f = diag21();
        // moving to the higher-volume subset is certain
        assert_relative_eq!(swap_acceptance_probability(&f, &[1], &[0]).unwrap(), 1.0);
        // self-proposal has ratio one
        assert_relative_eq!(swap_acceptance_probability(&f, &[0], &[0]).unwrap(), 1.0);
        // downhill move: ratio of weighted volumes 1/4
        assert_relative_eq!(
            swap_acceptance_probability(&f, &[0], &[1]).unwrap(),
            0.25,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mcmc_long_run_frequency() {
        let f = diag21();
        let mut sampler = McmcSampler::new(&f, 1, &SamplerConfig::default()).unwrap();
        let samples = sampler.sample_chain(100_000);
        let hits = samples.iter().filter(|s| s.as_slice() == [0]).count();
        let freq = hits as f64 / samples.len() as f64;
        assert!((freq - 0.8).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn mcmc_is_reproducible_and_validates_steps() {
        let f = diag21();
        let config = SamplerConfig {
            seed: 7,
            method: SamplerMethod::Mcmc,
            mcmc_steps: None,
        };
        assert_eq!(
            sample_mcmc(&f, 1, &config).unwrap(),
            sample_mcmc(&f, 1, &config).unwrap()
        );
        let too_few = SamplerConfig {
            mcmc_steps: Some(1),
            ..config
        };
        assert!(matches!(sample_mcmc(&f, 1, &too_few), Err(Error::Usage(_))));
    }

    #[test]
    fn mcmc_rejects_rank_deficient() {
        let f = DiscretizedFunction::with_unit_weights(dmatrix![1.0, 2.0; 2.0, 4.0]).unwrap();
        assert!(matches!(
            sample_mcmc(&f, 2, &SamplerConfig::default()),
            Err(Error::RankDeficient { k: 2 })
        ));
    }
}
