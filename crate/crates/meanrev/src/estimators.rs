//! Basket weight estimators.
//!
//! Two spectral baselines (dense and sparse minimum-variance eigenvectors of
//! A0), the closed-form minimum-predictability solution, and the three
//! relaxation-based estimators (predictability, portmanteau, crossing) that
//! lift to a semidefinite program, solve it, and deflate the solution back to
//! a k-sparse unit vector.
//!
//! Every estimator returns a [`BasketWeights`] with exact unit norm, the
//! first nonzero coordinate positive, and the achieved proxy values attached.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::linalg::{canonicalize_sign, quadratic_form, ridged_inv_sqrt, sorted_symmetric_eigen, sym_part};
use crate::proxies;
use crate::sdp;
use crate::sparse_eig;
use crate::timeseries::AutocovarianceSet;
use crate::{Error, Result};

/// Which estimator produced a basket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Pca,
    Spca,
    Predictability,
    Portmanteau,
    Crossing,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Pca,
        EstimatorKind::Spca,
        EstimatorKind::Predictability,
        EstimatorKind::Portmanteau,
        EstimatorKind::Crossing,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Pca => "pca",
            EstimatorKind::Spca => "spca",
            EstimatorKind::Predictability => "predictability",
            EstimatorKind::Portmanteau => "portmanteau",
            EstimatorKind::Crossing => "crossing",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(EstimatorKind::Pca),
            "spca" => Ok(EstimatorKind::Spca),
            "predictability" => Ok(EstimatorKind::Predictability),
            "portmanteau" => Ok(EstimatorKind::Portmanteau),
            "crossing" => Ok(EstimatorKind::Crossing),
            other => Err(Error::InvalidInput(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Relaxation-based criteria accepted by [`estimate_basket`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Predictability,
    Portmanteau,
    Crossing,
}

impl Criterion {
    pub fn estimator_kind(&self) -> EstimatorKind {
        match self {
            Criterion::Predictability => EstimatorKind::Predictability,
            Criterion::Portmanteau => EstimatorKind::Portmanteau,
            Criterion::Crossing => EstimatorKind::Crossing,
        }
    }
}

/// Parameters a basket was estimated with; fields are set when meaningful
/// for the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasketParams {
    /// Sparsity target (support size bound).
    pub k: Option<usize>,
    /// Variance floor nu in absolute variance units.
    pub variance_floor: Option<f64>,
    /// L1 weight rho.
    pub l1_weight: Option<f64>,
    /// Quadratic-term weight mu (crossing criterion).
    pub quad_weight: Option<f64>,
    /// Autocovariance order p used.
    pub order: Option<usize>,
}

/// Achieved proxy values at the returned weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasketDiagnostics {
    /// Sample variance y'A0y.
    pub variance: f64,
    /// Plug-in predictability, when lag-1 information is available.
    pub predictability: Option<f64>,
    /// Portmanteau statistic at the set's full order.
    pub portmanteau: Option<f64>,
    /// The optimized criterion evaluated at y (relaxation estimators only).
    pub criterion_value: Option<f64>,
}

/// Unit-norm basket weights with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BasketWeights {
    pub y: DVector<f64>,
    /// Indices of nonzero weights, ascending.
    pub support: Vec<usize>,
    pub estimator: EstimatorKind,
    pub params: BasketParams,
    pub diagnostics: BasketDiagnostics,
}

impl BasketWeights {
    /// Wraps an externally supplied weight vector: normalizes it, fixes the
    /// sign, and computes diagnostics against the given autocovariances.
    pub fn new(
        y: DVector<f64>,
        estimator: EstimatorKind,
        params: BasketParams,
        acs: &AutocovarianceSet,
    ) -> Result<Self> {
        Self::build(y, estimator, params, acs, None)
    }

    fn build(
        mut y: DVector<f64>,
        estimator: EstimatorKind,
        params: BasketParams,
        acs: &AutocovarianceSet,
        criterion_value: Option<f64>,
    ) -> Result<Self> {
        let norm = y.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("estimated weights are all zero".into()));
        }
        y /= norm;
        canonicalize_sign(&mut y);
        let support = (0..y.len()).filter(|&i| y[i] != 0.0).collect();
        let variance = quadratic_form(&y, acs.a0());
        let predictability = (acs.order() >= 1)
            .then(|| proxies::predictability(&y, acs).ok())
            .flatten();
        let portmanteau = (acs.order() >= 1)
            .then(|| proxies::portmanteau(&y, acs, acs.order()).ok())
            .flatten();
        Ok(Self {
            y,
            support,
            estimator,
            params,
            diagnostics: BasketDiagnostics {
                variance,
                predictability,
                portmanteau,
                criterion_value,
            },
        })
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// Dense eigenvector of A0 with the smallest eigenvalue. Degenerate spectra
/// are broken by the deterministic eigen-order of the decomposition.
pub fn estimate_pca(acs: &AutocovarianceSet) -> Result<BasketWeights> {
    let (_, vectors) = sorted_symmetric_eigen(acs.a0());
    let y = vectors.column(0).into_owned();
    BasketWeights::build(y, EstimatorKind::Pca, BasketParams::default(), acs, None)
}

/// k-sparse eigenvector of A0 with the smallest Rayleigh quotient.
pub fn estimate_spca(acs: &AutocovarianceSet, k: usize) -> Result<BasketWeights> {
    let y = sparse_eig::sparse_smallest_eigvec(acs.a0(), k)?;
    let params = BasketParams { k: Some(k), ..BasketParams::default() };
    BasketWeights::build(y, EstimatorKind::Spca, params, acs, None)
}

/// Closed-form minimum-predictability basket: y = A0^(-1/2) y0 with y0 the
/// smallest eigenvector of A0^(-1/2) M A0^(-1/2).
pub fn estimate_box_tiao(acs: &AutocovarianceSet) -> Result<BasketWeights> {
    let m = proxies::predictability_matrix(acs)?;
    let whitener = ridged_inv_sqrt(acs.a0())?;
    let whitened = sym_part(&(&whitener * &m * &whitener));
    let (_, vectors) = sorted_symmetric_eigen(&whitened);
    let y = &whitener * vectors.column(0).into_owned();
    let basket = BasketWeights::build(
        y,
        EstimatorKind::Predictability,
        BasketParams::default(),
        acs,
        None,
    )?;
    let lambda = basket.diagnostics.predictability;
    Ok(BasketWeights {
        diagnostics: BasketDiagnostics {
            criterion_value: lambda,
            ..basket.diagnostics
        },
        ..basket
    })
}

/// The criterion objective evaluated at a weight vector, used both for
/// diagnostics and for selection across an L1-weight grid.
pub fn criterion_value(
    criterion: Criterion,
    y: &DVector<f64>,
    acs: &AutocovarianceSet,
    quad_weight: f64,
    p: usize,
) -> Result<f64> {
    match criterion {
        Criterion::Predictability => proxies::predictability(y, acs),
        Criterion::Portmanteau => proxies::portmanteau(y, acs, p),
        Criterion::Crossing => {
            let mut value = quadratic_form(y, acs.mat(1));
            for i in 2..=p {
                value += quad_weight * quadratic_form(y, acs.mat(i)).powi(2);
            }
            Ok(value)
        }
    }
}

/// Rescales every autocovariance by the mean diagonal variance of A0, so
/// that solver inputs are O(1) regardless of the data's units. The variance
/// floor scales along with A0, which leaves the constraint unchanged; the
/// L1 weight and the crossing criterion's quadratic weight are interpreted
/// against the normalized matrices.
fn normalized_acs(acs: &AutocovarianceSet) -> Result<(AutocovarianceSet, f64)> {
    let scale = acs.a0().trace() / acs.dim() as f64;
    if !(scale > 0.0) {
        return Err(Error::DegenerateVariance(scale));
    }
    let mats = (0..=acs.order()).map(|i| acs.mat(i) / scale).collect();
    Ok((AutocovarianceSet::new(mats, acs.sample_size())?, scale))
}

/// Relaxation pipeline: build the criterion's semidefinite program, solve it,
/// and deflate the solution to a k-sparse unit vector.
///
/// The variance floor holds for the relaxation solution but is only
/// encouraged, not guaranteed, for the deflated vector; the achieved y'A0y is
/// reported in the diagnostics so callers can filter.
pub fn estimate_basket(
    criterion: Criterion,
    acs: &AutocovarianceSet,
    k: usize,
    variance_floor: f64,
    l1_weight: f64,
    quad_weight: f64,
    p: usize,
) -> Result<BasketWeights> {
    let n = acs.dim();
    if k < 1 || k > n {
        return Err(Error::SupportSizeOutOfRange { k, n });
    }
    let (scaled, scale) = normalized_acs(acs)?;
    let scaled_floor = variance_floor / scale;
    let problem = match criterion {
        Criterion::Predictability => sdp::make_sdp1(&scaled, l1_weight, scaled_floor)?,
        Criterion::Portmanteau => sdp::make_sdp2(&scaled, p, l1_weight, scaled_floor)?,
        Criterion::Crossing => sdp::make_sdp3(&scaled, p, quad_weight, l1_weight, scaled_floor)?,
    };
    let solution = sdp::solve_default(&problem)?;
    let y = sparse_eig::sparse_leading_eigvec(&solution.y, k, sparse_eig::DEFAULT_RESTARTS)?;
    let value = criterion_value(criterion, &y, &scaled, quad_weight, p)?;
    let params = BasketParams {
        k: Some(k),
        variance_floor: Some(variance_floor),
        l1_weight: Some(l1_weight),
        quad_weight: (criterion == Criterion::Crossing).then_some(quad_weight),
        order: Some(p),
    };
    BasketWeights::build(y, criterion.estimator_kind(), params, acs, Some(value))
}

/// Runs [`estimate_basket`] for every L1 weight in the grid and keeps the
/// basket with the best in-sample criterion value (ties go to the smaller
/// weight). The default grid is {0, 1e-3, 1e-2}.
pub fn estimate_basket_best_rho(
    criterion: Criterion,
    acs: &AutocovarianceSet,
    k: usize,
    variance_floor: f64,
    rho_grid: &[f64],
    quad_weight: f64,
    p: usize,
) -> Result<BasketWeights> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidInput("rho grid is empty".into()));
    }
    let mut best: Option<BasketWeights> = None;
    for &rho in rho_grid {
        let basket = estimate_basket(criterion, acs, k, variance_floor, rho, quad_weight, p)?;
        let value = basket
            .diagnostics
            .criterion_value
            .expect("relaxation baskets carry a criterion value");
        let replace = match &best {
            None => true,
            Some(current) => {
                value
                    < current
                        .diagnostics
                        .criterion_value
                        .expect("relaxation baskets carry a criterion value")
            }
        };
        if replace {
            best = Some(basket);
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Default L1 weight grid for the relaxation estimators.
pub const DEFAULT_RHO_GRID: [f64; 3] = [0.0, 1e-3, 1e-2];
