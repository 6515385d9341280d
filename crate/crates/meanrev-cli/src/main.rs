//! Command-line driver: synthetic data generation, pool search, single-basket
//! estimation and backtests, the full windowed experiment, and report
//! aggregation. All outputs are CSV; logs go to standard error.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use meanrev::backtest::{cost_sweep, default_cost_grid, intercept_slope};
use meanrev::estimators::{BasketWeights, EstimatorKind};
use meanrev::timeseries::{build_autocov_set, SamplePath};
use meanrev::universe::{
    greedy_pool_search, group_indices, keep_best, read_groups_path, PoolSearchParams,
};
use meanrev_cli::config::ExperimentConfig;
use meanrev_cli::experiment::{estimate_for_cell, run_experiment};
use meanrev_cli::gen::{generate_universe, write_groups_csv};
use meanrev_cli::report::{read_cells_csv, write_reports};

#[derive(Parser)]
#[command(
    name = "meanrev",
    about = "Sparse mean-reverting basket estimation and cost-aware backtesting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic universe of cointegrated pools.
    Gen {
        /// Output CSV for the asset panel.
        #[arg(long)]
        out: PathBuf,
        /// Optional output CSV mapping assets to groups.
        #[arg(long)]
        groups_out: Option<PathBuf>,
        /// Number of independent pools.
        #[arg(long, default_value_t = 1)]
        pools: usize,
        /// Assets per pool.
        #[arg(long, default_value_t = 10)]
        assets: usize,
        /// Path length in days.
        #[arg(long, default_value_t = 255)]
        t: usize,
        /// AR(1) coefficients of the planted stationary directions.
        #[arg(long, default_value = "0.1,0.3", value_delimiter = ',')]
        coeffs: Vec<f64>,
        /// Observation noise standard deviation.
        #[arg(long, default_value_t = 0.02)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search candidate asset pools inside groups.
    Pools {
        #[arg(long)]
        data: PathBuf,
        /// asset_label,group_label CSV; all assets form one group if absent.
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 200)]
        max_candidates: usize,
        /// Keep the best pools across all groups.
        #[arg(long, default_value_t = 50)]
        keep: usize,
        /// Output CSV (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a single basket on a whole data file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        estimator: EstimatorKind,
        /// Support size target (required for sparse estimators).
        #[arg(long)]
        k: Option<usize>,
        /// Variance floor as a fraction of the median asset variance.
        #[arg(long, default_value_t = 0.0)]
        nu_fraction: f64,
        /// Fixed L1 weight; the default grid {0, 1e-3, 1e-2} is searched if absent.
        #[arg(long)]
        rho: Option<f64>,
        /// Quadratic-term weight for the crossing criterion.
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Autocovariance order.
        #[arg(long, default_value_t = 3)]
        p: usize,
        /// Output CSV (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate on the in-sample split and backtest across a cost grid.
    Backtest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        estimator: EstimatorKind,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        nu_fraction: f64,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long, default_value_t = 0.85)]
        split: f64,
        /// Cost levels per contract unit; the 0.03..0.17 grid if absent.
        #[arg(long, value_delimiter = ',')]
        costs: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full windowed experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Aggregate an existing cells.csv into curves.csv and aggregate.csv.
    Report {
        #[arg(long)]
        cells: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout()),
    })
}

fn estimate_command_config(rho: Option<f64>, mu: f64, p: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    if let Some(rho) = rho {
        config.rho_grid = vec![rho];
    }
    config.quad_weight = mu;
    config.order = p;
    config
}

fn estimate_single(
    path: &SamplePath,
    estimator: EstimatorKind,
    k: Option<usize>,
    nu_fraction: f64,
    config: &ExperimentConfig,
) -> Result<BasketWeights> {
    let acs = build_autocov_set(path, config.order)?;
    let d = path.n_assets();
    let sparsity_fraction = match estimator {
        EstimatorKind::Pca => None,
        _ => {
            let k = k.with_context(|| format!("estimator '{estimator}' needs --k"))?;
            if k < 1 || k > d {
                bail!("--k {k} out of range 1..={d}");
            }
            Some(k as f64 / d as f64)
        }
    };
    let nu = matches!(
        estimator,
        EstimatorKind::Predictability | EstimatorKind::Portmanteau | EstimatorKind::Crossing
    )
    .then_some(nu_fraction);
    Ok(estimate_for_cell(&acs, estimator, sparsity_fraction, nu, config)?)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { out, groups_out, pools, assets, t, coeffs, noise_sd, seed } => {
            let (path, groups) = generate_universe(pools, assets, t, &coeffs, noise_sd, seed)?;
            let file = std::fs::File::create(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            path.write_csv(file)?;
            eprintln!(
                "wrote {} ({} days x {} assets)",
                out.display(),
                path.len(),
                path.n_assets()
            );
            if let Some(groups_path) = groups_out {
                let file = std::fs::File::create(&groups_path)
                    .with_context(|| format!("creating {}", groups_path.display()))?;
                write_groups_csv(file, &groups)?;
                eprintln!("wrote {}", groups_path.display());
            }
        }
        Command::Pools { data, groups, n_min, n_max, max_candidates, keep, out } => {
            let path = SamplePath::from_csv_path(&data)?;
            let group_map = match groups {
                Some(groups_path) => {
                    let pairs = read_groups_path(&groups_path)?;
                    group_indices(&path, &pairs)?
                }
                None => std::iter::once(("all".to_string(), (0..path.n_assets()).collect()))
                    .collect(),
            };
            let params = PoolSearchParams { n_min, n_max, max_candidates };
            let mut labeled = Vec::new();
            for (name, indices) in &group_map {
                let found = greedy_pool_search(&path, indices, &params)?;
                if found.is_empty() {
                    eprintln!("warning: group '{name}': no pool in the size band");
                }
                labeled.extend(found.into_iter().map(|pool| (name.clone(), pool)));
            }
            labeled.sort_by(|a, b| {
                a.1.score
                    .total_cmp(&b.1.score)
                    .then_with(|| a.1.assets.cmp(&b.1.assets))
            });
            let kept = keep_best(labeled.iter().map(|(_, p)| p.clone()).collect(), keep);
            let mut wtr = csv::Writer::from_writer(open_out(&out)?);
            wtr.write_record(["group", "assets", "score"])?;
            for pool in kept {
                let group_name = labeled
                    .iter()
                    .find(|(_, p)| p.assets == pool.assets)
                    .map(|(g, _)| g.clone())
                    .unwrap_or_default();
                let names: Vec<&str> = pool
                    .assets
                    .iter()
                    .map(|&i| path.labels()[i].as_str())
                    .collect();
                wtr.write_record([group_name, names.join(";"), format!("{}", pool.score)])?;
            }
            wtr.flush()?;
        }
        Command::Estimate { data, estimator, k, nu_fraction, rho, mu, p, out } => {
            let path = SamplePath::from_csv_path(&data)?;
            let config = estimate_command_config(rho, mu, p);
            let weights = estimate_single(&path, estimator, k, nu_fraction, &config)?;
            let mut wtr = csv::Writer::from_writer(open_out(&out)?);
            wtr.write_record(["asset", "weight"])?;
            for (label, value) in path.labels().iter().zip(weights.y.iter()) {
                wtr.write_record([label.clone(), format!("{value}")])?;
            }
            wtr.flush()?;
            eprintln!(
                "estimator={} support={} variance={:.6e} predictability={:?} portmanteau={:?}",
                weights.estimator,
                weights.support_size(),
                weights.diagnostics.variance,
                weights.diagnostics.predictability,
                weights.diagnostics.portmanteau,
            );
        }
        Command::Backtest {
            data,
            estimator,
            k,
            nu_fraction,
            rho,
            mu,
            p,
            split,
            costs,
            out,
        } => {
            let path = SamplePath::from_csv_path(&data)?;
            let t_len = path.len();
            let in_len = (split * t_len as f64).ceil() as usize;
            if in_len < 10 || in_len + 2 > t_len {
                bail!("split {split} leaves no usable in/out segments for {t_len} rows");
            }
            let config = estimate_command_config(rho, mu, p);
            let in_path = path.window(0, in_len)?;
            let weights = estimate_single(&in_path, estimator, k, nu_fraction, &config)?;
            let grid = costs.unwrap_or_else(default_cost_grid);
            let sweep = cost_sweep(&path, &weights, split, &grid)?;
            let mut wtr = csv::Writer::from_writer(open_out(&out)?);
            wtr.write_record(["estimator", "cost", "sharpe", "total_cost", "support_size", "variance"])?;
            for point in &sweep {
                wtr.write_record([
                    estimator.to_string(),
                    format!("{}", point.cost_per_unit),
                    format!("{}", point.sharpe),
                    format!("{}", point.total_cost),
                    weights.support_size().to_string(),
                    format!("{}", weights.diagnostics.variance),
                ])?;
            }
            wtr.flush()?;
            if sweep.len() >= 2 {
                let points: Vec<(f64, f64)> =
                    sweep.iter().map(|s| (s.cost_per_unit, s.sharpe)).collect();
                let (intercept, slope) = intercept_slope(&points)?;
                eprintln!("intercept={intercept} slope={slope}");
            }
        }
        Command::Experiment { config } => {
            let config = ExperimentConfig::from_path(&config)?;
            let artifacts = run_experiment(&config)?;
            eprintln!(
                "ran {} cells ({} failed); wrote {}, {}, {}",
                artifacts.cells_run,
                artifacts.cells_failed,
                artifacts.cells.display(),
                artifacts.curves.display(),
                artifacts.aggregate.display()
            );
        }
        Command::Report { cells, out_dir } => {
            let rows = read_cells_csv(&cells)?;
            std::fs::create_dir_all(&out_dir)?;
            let (curves, aggregate) = write_reports(&out_dir, &rows)?;
            eprintln!("wrote {} and {}", curves.display(), aggregate.display());
        }
    }
    Ok(())
}
