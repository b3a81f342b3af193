//! Simulation-calibrated max-type tests for high-dimensional mean vectors.
//!
//! The library tests H0: mu = mu0 (one sample) or H0: mu1 = mu2 (two
//! samples) through the maximum of marginal statistics, with critical values
//! drawn by Monte Carlo from a Gaussian vector whose covariance is the
//! plug-in estimate (or its correlation for the studentized variants). A
//! marginal t-statistic screening step can shrink the maximization set
//! first, which sharpens power against sparse alternatives without
//! inflating size.
//!
//! Entry points:
//! - [`engine::run_one_sample`] / [`engine::run_two_sample`] for a single
//!   configured test,
//! - [`engine::run_one_sample_variants`] / [`engine::run_two_sample_variants`]
//!   for all four (studentized x screened) variants over shared draws,
//! - [`io::run_batch`] for many feature sets with BH false-discovery control,
//! - [`sim::run_scenario`] for empirical size and power studies.
//!
//! All randomness is keyed by a [`rng::RngSpec`]; results are bit-for-bit
//! reproducible for a fixed seed regardless of thread count.

pub mod engine;
pub mod error;
pub mod io;
pub mod matrix;
pub mod mc;
pub mod multiplicity;
pub mod rng;
pub mod screening;
pub mod sim;
pub mod stats;

pub use engine::{
    run_one_sample, run_one_sample_variants, run_two_sample, run_two_sample_variants,
    CovarianceOverride, TestFamily, TestResult, TestSpec, VariantResults,
};
pub use error::{Error, Result};
pub use matrix::{DataMatrix, PsdFactor, SymmetricMatrix};
pub use mc::{MonteCarloQuantileEstimate, DEFAULT_BATCH_DRAWS, DEFAULT_DRAWS, MIN_DRAWS};
pub use multiplicity::{benjamini_hochberg, bonferroni, BatchDecision};
pub use rng::RngSpec;
pub use screening::{lambda_threshold, screen, screening_threshold, ScreenResult};
pub use sim::{CovModel, SignalSpec, SimReport, SimScenario};
