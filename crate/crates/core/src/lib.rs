//! Volume sampling and weighted subspace approximation for discretized
//! vector-valued functions.
//!
//! A function sampled at n points with positive quadrature weights is an
//! m-by-n matrix plus a weight vector. Its weighted Schmidt decomposition
//! gives the optimal k-dimensional approximation error (the singular value
//! tail), and volume sampling — drawing k column indices with probability
//! proportional to the weighted Gram determinant — yields subsets whose
//! span comes provably close to that optimum: the best subset satisfies
//! `error^2 <= (k+1) * tail^2`. This crate implements the decomposition,
//! the determinant and expectation identities behind that bound, exact and
//! approximate samplers, selection strategies, and a CLI that checks the
//! identities numerically on concrete instances.
//!
//! ```
//! use nalgebra::dmatrix;
//! use volsample::measure::DiscretizedFunction;
//! use volsample::samplers::enumerate_distribution;
//! use volsample::selection::{certify_bound, Strategy};
//! use volsample::samplers::{SamplerConfig, DEFAULT_ENUM_CAP};
//!
//! let f = DiscretizedFunction::with_unit_weights(dmatrix![2.0, 0.0; 0.0, 1.0]).unwrap();
//! let dist = enumerate_distribution(&f, 1).unwrap();
//! assert!((dist.probabilities()[0] - 0.8).abs() < 1e-12);
//!
//! let cert = certify_bound(&f, 1, Strategy::Exhaustive, &SamplerConfig::default(),
//!                          DEFAULT_ENUM_CAP).unwrap();
//! assert!(cert.satisfied);
//! ```

pub mod cli;
pub mod error;
pub mod generators;
pub mod io;
pub mod measure;
mod ortho;
pub mod report;
pub mod samplers;
pub mod schmidt;
pub mod selection;
pub mod volumes;

pub use error::{Error, Result};
