//! Reproducible instance families with controllable spectra.
//!
//! Three kinds: `prescribed_spectrum` builds a function with exactly the
//! requested singular values (so optimal tail errors are known in closed
//! form), `kernel_snapshot` discretizes smooth two-variable kernels on
//! tensor grids with trapezoidal quadrature weights, and `gaussian` is an
//! i.i.d. normal stress ensemble. All are deterministic under their seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscretizedFunction;

/// Serializable description of a generated instance.
///
/// JSON schema: `{"kind": ..., "m": ..., "n": ..., "seed": ...,
/// "params": {...}}` where `params` depends on the kind (absent for
/// `gaussian`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub kind: InstanceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InstanceKind {
    /// Exact singular values `spectrum`, random orthonormal factors,
    /// weights uniform in [0.5, 2] unless given.
    PrescribedSpectrum {
        spectrum: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// Snapshots of a two-variable kernel on uniform tensor grids.
    KernelSnapshot {
        kernel: KernelFamily,
        x_range: [f64; 2],
        y_range: [f64; 2],
        param: f64,
    },
    /// I.i.d. standard normal entries, unit weights.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `1 / (x + y + c)` with `c = param > 0`.
    Cauchy,
    /// `exp(-(x - y)^2 / l^2)` with `l = param > 0`.
    Gaussian,
}

impl InstanceSpec {
    /// One-line human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            InstanceKind::PrescribedSpectrum { spectrum, weights } => format!(
                "prescribed_spectrum m={} n={} seed={} r={}{}",
                self.m,
                self.n,
                self.seed,
                spectrum.len(),
                if weights.is_some() {
                    " explicit-weights"
                } else {
                    ""
                }
            ),
            InstanceKind::KernelSnapshot {
                kernel,
                x_range,
                y_range,
                param,
            } => format!(
                "kernel_snapshot {:?} m={} n={} x=[{},{}] y=[{},{}] param={}",
                kernel, self.m, self.n, x_range[0], x_range[1], y_range[0], y_range[1], param
            ),
            InstanceKind::Gaussian => {
                format!("gaussian m={} n={} seed={}", self.m, self.n, self.seed)
            }
        }
    }
}

/// Builds the instance described by `spec`.
pub fn generate(spec: &InstanceSpec) -> Result<DiscretizedFunction> {
    match &spec.kind {
        InstanceKind::PrescribedSpectrum { spectrum, weights } => {
            gen_prescribed_spectrum(spec.m, spec.n, spec.seed, spectrum, weights.as_deref())
        }
        InstanceKind::KernelSnapshot {
            kernel,
            x_range,
            y_range,
            param,
        } => gen_kernel_snapshot(spec.m, spec.n, *kernel, *x_range, *y_range, *param),
        InstanceKind::Gaussian => gen_gaussian(spec.m, spec.n, spec.seed),
    }
}

fn validate_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidGrid(format!(
            "dimensions must be at least 1, got {m}x{n}"
        )));
    }
    Ok(())
}

/// `values = U diag(sigma) V^T` with Euclidean-orthonormal `u_i` and
/// `v_i` orthonormal in the weighted inner product.
fn build_from_factors(
    u: &DMatrix<f64>,
    sigma: &[f64],
    v: &DMatrix<f64>,
    weights: DVector<f64>,
) -> Result<DiscretizedFunction> {
    let mut values = DMatrix::zeros(u.nrows(), v.nrows());
    for (i, &s) in sigma.iter().enumerate() {
        for x in 0..u.nrows() {
            for j in 0..v.nrows() {
                values[(x, j)] += s * u[(x, i)] * v[(j, i)];
            }
        }
    }
    DiscretizedFunction::new(values, weights)
}

/// Instance with the exact singular values `spectrum` (descending,
/// positive) and random orthonormal factors drawn from `seed`. Weights
/// default to i.i.d. uniform on [0.5, 2].
pub fn gen_prescribed_spectrum(
    m: usize,
    n: usize,
    seed: u64,
    spectrum: &[f64],
    weights: Option<&[f64]>,
) -> Result<DiscretizedFunction> {
    validate_dims(m, n)?;
    let r = spectrum.len();
    let max = m.min(n);
    if r > max {
        return Err(Error::SpectrumTooLong { len: r, max });
    }
    for pair in spectrum.windows(2) {
        if pair[1] > pair[0] {
            return Err(Error::InvalidSpectrum(format!(
                "spectrum must be descending, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    if let Some(&last) = spectrum.last() {
        // the finiteness check also rejects NaN entries
        if last <= 0.0 || !spectrum.iter().all(|s| s.is_finite()) {
            return Err(Error::InvalidSpectrum(
                "spectrum entries must be finite and positive".to_string(),
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = match weights {
        Some(given) => {
            if given.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "expected {} weights, got {}",
                    n,
                    given.len()
                )));
            }
            DVector::from_row_slice(given)
        }
        None => DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0)),
    };

    let gauss = |rng: &mut ChaCha8Rng, rows, cols| {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    // Euclidean-orthonormal left factors via Householder QR
    let u = if r == 0 {
        DMatrix::zeros(m, 0)
    } else {
        gauss(&mut rng, m, r).qr().q()
    };
    // right factors orthonormalized directly in the weighted inner product
    let mut v = gauss(&mut rng, n, r);
    let w_dot = |a: &DMatrix<f64>, ca: usize, b: &DMatrix<f64>, cb: usize| -> f64 {
        (0..n).map(|j| w[j] * a[(j, ca)] * b[(j, cb)]).sum()
    };
    for i in 0..r {
        for _ in 0..2 {
            for l in 0..i {
                let coeff = w_dot(&v, l, &v, i);
                for j in 0..n {
                    let vl = v[(j, l)];
                    v[(j, i)] -= coeff * vl;
                }
            }
        }
        let norm = w_dot(&v, i, &v, i).sqrt();
        if norm.is_nan() || norm <= 1e-150 {
            return Err(Error::ConvergenceFailure);
        }
        for j in 0..n {
            v[(j, i)] /= norm;
        }
    }
    build_from_factors(&u, spectrum, &v, w)
}

/// Snapshots `entry(i, j) = kernel(x_i, y_j)` on uniform grids with
/// composite trapezoidal weights on the y-grid. Both grids need at least
/// two nodes.
pub fn gen_kernel_snapshot(
    m: usize,
    n: usize,
    kernel: KernelFamily,
    x_range: [f64; 2],
    y_range: [f64; 2],
    param: f64,
) -> Result<DiscretizedFunction> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidGrid(format!(
            "kernel snapshots need at least 2 grid points per axis, got {m}x{n}"
        )));
    }
    for range in [x_range, y_range] {
        if !range[0].is_finite() || !range[1].is_finite() || range[0] >= range[1] {
            return Err(Error::InvalidGrid(format!(
                "grid range must be finite and increasing, got [{}, {}]",
                range[0], range[1]
            )));
        }
    }
    if param <= 0.0 || !param.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "kernel parameter must be positive, got {param}"
        )));
    }
    let grid = |range: [f64; 2], count: usize| -> Vec<f64> {
        let h = (range[1] - range[0]) / (count - 1) as f64;
        (0..count).map(|i| range[0] + i as f64 * h).collect()
    };
    let xs = grid(x_range, m);
    let ys = grid(y_range, n);
    let eval = |x: f64, y: f64| -> f64 {
        match kernel {
            KernelFamily::Cauchy => 1.0 / (x + y + param),
            KernelFamily::Gaussian => (-((x - y) * (x - y)) / (param * param)).exp(),
        }
    };
    let values = DMatrix::from_fn(m, n, |i, j| eval(xs[i], ys[j]));
    let h = (y_range[1] - y_range[0]) / (n - 1) as f64;
    let weights = DVector::from_fn(n, |j, _| if j == 0 || j == n - 1 { h / 2.0 } else { h });
    DiscretizedFunction::new(values, weights)
}

/// I.i.d. standard normal entries with unit weights.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<DiscretizedFunction> {
    validate_dims(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    DiscretizedFunction::with_unit_weights(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schmidt::{numerical_rank, schmidt_decompose_default, tail_width};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn identity_factors_give_diagonal_values() {
        let f = build_from_factors(
            &DMatrix::identity(2, 2),
            &[2.0, 1.0],
            &DMatrix::identity(2, 2),
            DVector::from_element(2, 1.0),
        )
        .unwrap();
        assert_eq!(f.values(), &dmatrix![2.0, 0.0; 0.0, 1.0]);
    }

    #[test]
    fn prescribed_spectrum_round_trips() {
        let spectrum = [3.0, 1.5, 0.7, 0.1];
        for seed in [0, 3, 17] {
            let f = gen_prescribed_spectrum(5, 7, seed, &spectrum, None).unwrap();
            let d = schmidt_decompose_default(&f).unwrap();
            assert_eq!(d.rank(), spectrum.len());
            for (got, want) in d.sigma().iter().zip(&spectrum) {
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
            for k in 0..=spectrum.len() {
                let expect: f64 = spectrum[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
                assert_relative_eq!(tail_width(&d, k), expect, epsilon = 1e-10 * spectrum[0]);
            }
        }
    }

    #[test]
    fn prescribed_spectrum_accepts_explicit_weights() {
        let weights = [1.0, 2.0, 0.5, 1.5, 0.25];
        let f = gen_prescribed_spectrum(4, 5, 9, &[2.0, 1.0], Some(&weights)).unwrap();
        assert_eq!(f.weights().as_slice(), &weights);
        let d = schmidt_decompose_default(&f).unwrap();
        assert_relative_eq!(d.sigma()[0], 2.0, max_relative = 1e-10);
        assert_relative_eq!(d.sigma()[1], 1.0, max_relative = 1e-10);
    }

    #[test]
    fn empty_spectrum_gives_zero_matrix() {
        let f = gen_prescribed_spectrum(3, 4, 1, &[], None).unwrap();
        assert_eq!(f.values(), &DMatrix::zeros(3, 4));
    }

    #[test]
    fn prescribed_spectrum_validates() {
        assert!(matches!(
            gen_prescribed_spectrum(2, 5, 0, &[1.0, 0.5, 0.2], None),
            Err(Error::SpectrumTooLong { len: 3, max: 2 })
        ));
        assert!(matches!(
            gen_prescribed_spectrum(3, 3, 0, &[1.0, 2.0], None),
            Err(Error::InvalidSpectrum(_))
        ));
        assert!(matches!(
            gen_prescribed_spectrum(3, 3, 0, &[1.0, 0.0], None),
            Err(Error::InvalidSpectrum(_))
        ));
        assert!(matches!(
            gen_prescribed_spectrum(3, 3, 0, &[1.0], Some(&[1.0, 2.0])),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn generators_are_deterministic() {
        let spec = InstanceSpec {
            m: 4,
            n: 6,
            seed: 123,
            kind: InstanceKind::PrescribedSpectrum {
                spectrum: vec![2.0, 1.0, 0.5],
                weights: None,
            },
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.weights(), b.weights());

        let g1 = gen_gaussian(5, 5, 77).unwrap();
        let g2 = gen_gaussian(5, 5, 77).unwrap();
        assert_eq!(g1.values(), g2.values());
        assert_ne!(g1.values(), gen_gaussian(5, 5, 78).unwrap().values());
    }

    #[test]
    fn cauchy_kernel_entries_and_weights() {
        let f =
            gen_kernel_snapshot(2, 3, KernelFamily::Cauchy, [0.0, 1.0], [0.0, 1.0], 1.0).unwrap();
        // x_0 = y_0 = 0 gives 1/(0 + 0 + 1)
        assert_relative_eq!(f.values()[(0, 0)], 1.0);
        assert_relative_eq!(f.values()[(1, 2)], 1.0 / 3.0);
        assert_eq!(f.weights().as_slice(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn gaussian_kernel_is_one_on_the_diagonal() {
        let f =
            gen_kernel_snapshot(4, 4, KernelFamily::Gaussian, [0.0, 1.0], [0.0, 1.0], 0.5).unwrap();
        for i in 0..4 {
            assert_relative_eq!(f.values()[(i, i)], 1.0);
        }
    }

    #[test]
    fn smooth_kernel_spectrum_decays_fast() {
        let f =
            gen_kernel_snapshot(16, 16, KernelFamily::Cauchy, [0.0, 1.0], [0.0, 1.0], 1.0).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert!(d.rank() >= 6, "rank {}", d.rank());
        assert!(d.sigma()[5] / d.sigma()[0] < 1e-6);
    }

    #[test]
    fn kernel_snapshot_validates_grids() {
        let ok = [0.0, 1.0];
        assert!(matches!(
            gen_kernel_snapshot(1, 4, KernelFamily::Cauchy, ok, ok, 1.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            gen_kernel_snapshot(4, 4, KernelFamily::Cauchy, [1.0, 0.0], ok, 1.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            gen_kernel_snapshot(4, 4, KernelFamily::Cauchy, ok, ok, 0.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            gen_kernel_snapshot(4, 4, KernelFamily::Gaussian, ok, ok, f64::NAN),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn gaussian_ensemble_has_full_rank() {
        let single = gen_gaussian(1, 1, 5).unwrap();
        assert_eq!(single.values().len(), 1);
        let f = gen_gaussian(6, 10, 42).unwrap();
        let d = schmidt_decompose_default(&f).unwrap();
        assert_eq!(numerical_rank(&d), 6);
    }

    #[test]
    fn spec_json_round_trip() {
        let specs = [
            InstanceSpec {
                m: 3,
                n: 5,
                seed: 7,
                kind: InstanceKind::PrescribedSpectrum {
                    spectrum: vec![1.5, 0.5],
                    weights: Some(vec![1.0, 1.0, 2.0, 0.5, 0.25]),
                },
            },
            InstanceSpec {
                m: 8,
                n: 8,
                seed: 0,
                kind: InstanceKind::KernelSnapshot {
                    kernel: KernelFamily::Cauchy,
                    x_range: [0.0, 1.0],
                    y_range: [0.0, 2.0],
                    param: 1.0,
                },
            },
            InstanceSpec {
                m: 4,
                n: 4,
                seed: 11,
                kind: InstanceKind::Gaussian,
            },
        ];
        for spec in &specs {
            let json = serde_json::to_string(spec).unwrap();
            let back: InstanceSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(&back, spec);
        }
        let literal = r#"{"kind": "gaussian", "m": 2, "n": 3, "seed": 4}"#;
        let parsed: InstanceSpec = serde_json::from_str(literal).unwrap();
        assert_eq!(parsed.kind, InstanceKind::Gaussian);
        assert_eq!((parsed.m, parsed.n, parsed.seed), (2, 3, 4));
    }
}
