//! Estimation of sparse, sufficiently volatile, maximally mean-reverting
//! baskets from multivariate time series, together with a cost-aware
//! contrarian backtest.
//!
//! The crate is organized as a pipeline:
//!
//! - [`timeseries`] ingests and centers sample paths and estimates lagged
//!   autocovariance matrices,
//! - [`proxies`] evaluates mean-reversion proxies (predictability,
//!   portmanteau, crossing rate) for a candidate weight vector,
//! - [`sdp`] solves the small dense semidefinite relaxations of the three
//!   basket programs over the spectahedron with a variance floor and an
//!   elementwise L1 penalty,
//! - [`sparse_eig`] extracts k-sparse leading/smallest eigenvectors, used to
//!   deflate SDP solutions and for the sparse-PCA baseline,
//! - [`estimators`] wires the above into the five basket estimators,
//! - [`universe`] selects candidate asset pools by greedy search on the
//!   smallest covariance eigenvalue,
//! - [`backtest`] trades a basket with the log-utility contrarian rule under
//!   per-contract-unit transaction costs,
//! - [`synth`] generates reproducible synthetic data with known ground truth.
//!
//! All operations are pure functions of immutable inputs and safe to call
//! concurrently.

pub mod backtest;
mod error;
pub mod estimators;
pub mod linalg;
pub mod proxies;
pub mod rng;
pub mod sdp;
pub mod sparse_eig;
pub mod synth;
pub mod timeseries;
pub mod universe;

pub use error::{Error, Result};
