//! Batch protocol: windowing, in-sample pool search, estimation, cost-sweep
//! backtests, and report emission.
//!
//! Every (window, pool, estimator, nu-fraction, sparsity-fraction) cell is an
//! independent job: weights are estimated on the in-sample slice only, then
//! backtested over the whole window at every cost level. Cells run on a
//! worker pool and are reassembled in enumeration order, so reports are
//! byte-identical across runs regardless of scheduling. Per-cell failures
//! are logged to stderr and skipped; only config/data errors abort.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use meanrev::backtest::{cost_sweep, SweepPoint};
use meanrev::estimators::{
    estimate_basket_best_rho, estimate_pca, estimate_spca, BasketWeights, Criterion,
    EstimatorKind,
};
use meanrev::timeseries::{build_autocov_set, AutocovarianceSet, SamplePath};
use meanrev::universe::{greedy_pool_search, group_indices, keep_best, read_groups_path, PoolSearchParams};

use crate::config::ExperimentConfig;
use crate::report::{self, CellRow};

/// One unit of work before execution.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub window: usize,
    pub window_start: usize,
    pub pool_rank: usize,
    /// Global column indices, ascending.
    pub pool_assets: Vec<usize>,
    pub estimator: EstimatorKind,
    pub nu_fraction: Option<f64>,
    pub sparsity_fraction: Option<f64>,
}

/// Paths of the emitted report files.
#[derive(Debug, Clone)]
pub struct ExperimentArtifacts {
    pub cells: PathBuf,
    pub curves: PathBuf,
    pub aggregate: PathBuf,
    pub cells_run: usize,
    pub cells_failed: usize,
}

/// Support target k = floor(u * d), at least 1.
pub fn sparsity_to_k(u: f64, d: usize) -> usize {
    ((u * d as f64).floor() as usize).max(1)
}

/// Median of the diagonal of A0 (per-asset sample variances).
pub fn median_diag_variance(acs: &AutocovarianceSet) -> f64 {
    let mut diag: Vec<f64> = (0..acs.dim()).map(|i| acs.a0()[(i, i)]).collect();
    diag.sort_by(|a, b| a.partial_cmp(b).expect("non-finite variance"));
    let n = diag.len();
    if n % 2 == 1 {
        diag[n / 2]
    } else {
        0.5 * (diag[n / 2 - 1] + diag[n / 2])
    }
}

/// Estimates one cell's weights from in-sample autocovariances only.
pub fn estimate_for_cell(
    acs: &AutocovarianceSet,
    estimator: EstimatorKind,
    sparsity_fraction: Option<f64>,
    nu_fraction: Option<f64>,
    config: &ExperimentConfig,
) -> meanrev::Result<BasketWeights> {
    let d = acs.dim();
    let k = sparsity_fraction.map(|u| sparsity_to_k(u, d));
    match estimator {
        EstimatorKind::Pca => estimate_pca(acs),
        EstimatorKind::Spca => estimate_spca(acs, k.expect("spca cells carry a sparsity fraction")),
        EstimatorKind::Predictability | EstimatorKind::Portmanteau | EstimatorKind::Crossing => {
            let criterion = match estimator {
                EstimatorKind::Predictability => Criterion::Predictability,
                EstimatorKind::Portmanteau => Criterion::Portmanteau,
                _ => Criterion::Crossing,
            };
            let nu_abs =
                nu_fraction.expect("relaxation cells carry a nu fraction") * median_diag_variance(acs);
            estimate_basket_best_rho(
                criterion,
                acs,
                k.expect("relaxation cells carry a sparsity fraction"),
                nu_abs,
                &config.rho_grid,
                config.quad_weight,
                config.order,
            )
        }
    }
}

fn cell_params(
    estimator: EstimatorKind,
    config: &ExperimentConfig,
) -> Vec<(Option<f64>, Option<f64>)> {
    match estimator {
        EstimatorKind::Pca => vec![(None, None)],
        EstimatorKind::Spca => config
            .sparsity_fractions
            .iter()
            .map(|&u| (None, Some(u)))
            .collect(),
        _ => {
            let mut params = Vec::new();
            for &nu in &config.nu_fractions {
                for &u in &config.sparsity_fractions {
                    params.push((Some(nu), Some(u)));
                }
            }
            params
        }
    }
}

struct CellOutcome {
    labels: String,
    k: Option<usize>,
    nu_abs: Option<f64>,
    rho: Option<f64>,
    support_size: usize,
    variance: f64,
    points: Vec<SweepPoint>,
}

fn run_cell(
    spec: &CellSpec,
    path: &SamplePath,
    config: &ExperimentConfig,
    in_len: usize,
) -> meanrev::Result<CellOutcome> {
    let window_path = path.window(spec.window_start, config.window_length)?;
    let pool_window = window_path.select_assets(&spec.pool_assets)?;
    let pool_in = pool_window.window(0, in_len)?;
    let acs = build_autocov_set(&pool_in, config.order)?;
    let weights = estimate_for_cell(
        &acs,
        spec.estimator,
        spec.sparsity_fraction,
        spec.nu_fraction,
        config,
    )?;
    let points = cost_sweep(&pool_window, &weights, config.split, &config.cost_grid)?;
    Ok(CellOutcome {
        labels: pool_window.labels().join(";"),
        k: weights.params.k,
        nu_abs: weights.params.variance_floor,
        rho: weights.params.l1_weight,
        support_size: weights.support_size(),
        variance: weights.diagnostics.variance,
        points,
    })
}

/// Runs the full batch and writes cells.csv, curves.csv, aggregate.csv into
/// the config's out_dir.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentArtifacts> {
    config.validate()?;
    let in_len = (config.split * config.window_length as f64).ceil() as usize;
    if in_len < 10 || in_len + 2 > config.window_length {
        bail!(
            "window_length {} with split {} leaves no usable in/out segments",
            config.window_length,
            config.split
        );
    }
    if in_len < config.order + 3 {
        bail!("in-sample segment too short for autocovariance order {}", config.order);
    }

    let path = SamplePath::from_csv_path(&config.data)
        .with_context(|| format!("loading data {}", config.data.display()))?;
    let groups: BTreeMap<String, Vec<usize>> = match &config.groups {
        Some(groups_path) => {
            let pairs = read_groups_path(groups_path)
                .with_context(|| format!("loading groups {}", groups_path.display()))?;
            group_indices(&path, &pairs).context("resolving group labels")?
        }
        None => {
            let mut all = BTreeMap::new();
            all.insert("all".to_string(), (0..path.n_assets()).collect());
            all
        }
    };

    // Window starts: `window_count` windows of `window_length` days, offset
    // by `window_stride`, clipped to the available history.
    let mut window_starts = Vec::new();
    for w in 0..config.window_count {
        let start = w * config.window_stride;
        if start + config.window_length > path.len() {
            break;
        }
        window_starts.push(start);
    }
    if window_starts.is_empty() {
        bail!(
            "no window of length {} fits into {} rows",
            config.window_length,
            path.len()
        );
    }

    let search_params = PoolSearchParams {
        n_min: config.pool_n_min,
        n_max: config.pool_n_max,
        max_candidates: config.max_candidates,
    };

    let mut specs: Vec<CellSpec> = Vec::new();
    for (window, &window_start) in window_starts.iter().enumerate() {
        let window_path = path.window(window_start, config.window_length)?;
        let in_path = window_path.window(0, in_len)?;
        let mut candidates = Vec::new();
        for (group_name, indices) in &groups {
            match greedy_pool_search(&in_path, indices, &search_params) {
                Ok(found) => {
                    if found.is_empty() {
                        eprintln!(
                            "warning: window {window} group '{group_name}': no pool in size band [{}, {}]",
                            search_params.n_min, search_params.n_max
                        );
                    }
                    candidates.extend(found);
                }
                Err(e) => {
                    eprintln!("warning: window {window} group '{group_name}': pool search failed: {e}");
                }
            }
        }
        let pools = keep_best(candidates, config.keep_best);
        for (pool_rank, pool) in pools.iter().enumerate() {
            for &estimator in &config.estimators {
                for (nu_fraction, sparsity_fraction) in cell_params(estimator, config) {
                    specs.push(CellSpec {
                        window,
                        window_start,
                        pool_rank,
                        pool_assets: pool.assets.clone(),
                        estimator,
                        nu_fraction,
                        sparsity_fraction,
                    });
                }
            }
        }
    }
    if specs.is_empty() {
        bail!("no cells to run: pool search found nothing");
    }

    // Independent cells on a worker pool; reassembled in spec order below.
    let outcomes: Vec<(usize, meanrev::Result<CellOutcome>)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| (i, run_cell(spec, &path, config, in_len)))
        .collect();

    let mut ordered: Vec<(usize, meanrev::Result<CellOutcome>)> = outcomes;
    ordered.sort_by_key(|(i, _)| *i);

    let mut rows: Vec<CellRow> = Vec::new();
    let mut cells_failed = 0;
    for (i, outcome) in ordered {
        let spec = &specs[i];
        match outcome {
            Ok(cell) => {
                for point in &cell.points {
                    rows.push(CellRow {
                        window: spec.window,
                        pool: spec.pool_rank,
                        assets: cell.labels.clone(),
                        estimator: spec.estimator.as_str().to_string(),
                        nu_fraction: spec.nu_fraction,
                        sparsity_fraction: spec.sparsity_fraction,
                        k: cell.k,
                        nu: cell.nu_abs,
                        rho: cell.rho,
                        cost: point.cost_per_unit,
                        sharpe: point.sharpe,
                        sharpe_degenerate: point.sharpe_sd_is_zero,
                        total_cost: point.total_cost,
                        support_size: cell.support_size,
                        variance: cell.variance,
                    });
                }
            }
            Err(e) => {
                cells_failed += 1;
                eprintln!(
                    "warning: cell skipped (window {}, pool {}, {}, nu={:?}, u={:?}): {e}",
                    spec.window, spec.pool_rank, spec.estimator, spec.nu_fraction, spec.sparsity_fraction
                );
            }
        }
    }

    std::fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating {}", config.out_dir.display()))?;
    let cells_path = config.out_dir.join("cells.csv");
    report::write_cells_csv(&cells_path, &rows)?;
    let (curves_path, aggregate_path) = report::write_reports(&config.out_dir, &rows)?;

    Ok(ExperimentArtifacts {
        cells: cells_path,
        curves: curves_path,
        aggregate: aggregate_path,
        cells_run: specs.len() - cells_failed,
        cells_failed,
    })
}
