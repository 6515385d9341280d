//! Report files: per-cell sweep rows, aggregated sharpe-vs-cost curves, and
//! the intercept/slope summary table.
//!
//! The aggregate table is produced by averaging the per-cell sharpe at each
//! cost level within an (estimator, nu_fraction, sparsity_fraction) group and
//! fitting the same least-squares line the per-cell analysis uses — there is
//! no separate aggregation code path.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use meanrev::backtest::intercept_slope;

/// One cost point of one cell, as written to cells.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub window: usize,
    pub pool: usize,
    /// Pool asset labels joined with ';'.
    pub assets: String,
    pub estimator: String,
    pub nu_fraction: Option<f64>,
    pub sparsity_fraction: Option<f64>,
    pub k: Option<usize>,
    /// Variance floor in absolute units.
    pub nu: Option<f64>,
    /// Winning L1 weight.
    pub rho: Option<f64>,
    pub cost: f64,
    pub sharpe: f64,
    pub sharpe_degenerate: bool,
    pub total_cost: f64,
    pub support_size: usize,
    pub variance: f64,
}

const CELL_HEADER: [&str; 15] = [
    "window",
    "pool",
    "assets",
    "estimator",
    "nu_fraction",
    "sparsity_fraction",
    "k",
    "nu",
    "rho",
    "cost",
    "sharpe",
    "sharpe_degenerate",
    "total_cost",
    "support_size",
    "variance",
];

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_cells_csv<P: AsRef<Path>>(path: P, rows: &[CellRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(&path)
        .with_context(|| format!("writing {}", path.as_ref().display()))?;
    wtr.write_record(CELL_HEADER)?;
    for row in rows {
        wtr.write_record([
            row.window.to_string(),
            row.pool.to_string(),
            row.assets.clone(),
            row.estimator.clone(),
            fmt_opt_f64(row.nu_fraction),
            fmt_opt_f64(row.sparsity_fraction),
            fmt_opt_usize(row.k),
            fmt_opt_f64(row.nu),
            fmt_opt_f64(row.rho),
            format!("{}", row.cost),
            format!("{}", row.sharpe),
            (row.sharpe_degenerate as u8).to_string(),
            format!("{}", row.total_cost),
            row.support_size.to_string(),
            format!("{}", row.variance),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_cells_csv<P: AsRef<Path>>(path: P) -> Result<Vec<CellRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .with_context(|| format!("reading {}", path.as_ref().display()))?;
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse::<f64>()?))
        }
    };
    let mut rows = Vec::new();
    for record in rdr.records() {
        let r = record?;
        rows.push(CellRow {
            window: r[0].parse()?,
            pool: r[1].parse()?,
            assets: r[2].to_string(),
            estimator: r[3].to_string(),
            nu_fraction: parse_opt(&r[4])?,
            sparsity_fraction: parse_opt(&r[5])?,
            k: if r[6].is_empty() { None } else { Some(r[6].parse()?) },
            nu: parse_opt(&r[7])?,
            rho: parse_opt(&r[8])?,
            cost: r[9].parse()?,
            sharpe: r[10].parse()?,
            sharpe_degenerate: &r[11] == "1",
            total_cost: r[12].parse()?,
            support_size: r[13].parse()?,
            variance: r[14].parse()?,
        });
    }
    Ok(rows)
}

/// Grouping key for curves and the aggregate table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParamKey {
    pub estimator: String,
    pub nu_fraction: String,
    pub sparsity_fraction: String,
}

impl ParamKey {
    fn of(row: &CellRow) -> Self {
        Self {
            estimator: row.estimator.clone(),
            nu_fraction: fmt_opt_f64(row.nu_fraction),
            sparsity_fraction: fmt_opt_f64(row.sparsity_fraction),
        }
    }
}

/// Mean sharpe per cost level within each parameter group, cost-ascending.
pub fn mean_curves(rows: &[CellRow]) -> Vec<(ParamKey, Vec<(f64, f64)>)> {
    let mut groups: std::collections::BTreeMap<ParamKey, Vec<(f64, f64)>> = Default::default();
    for row in rows {
        groups.entry(ParamKey::of(row)).or_default().push((row.cost, row.sharpe));
    }
    groups
        .into_iter()
        .map(|(key, points)| {
            let mut sums: Vec<(f64, f64, usize)> = Vec::new();
            for (cost, sharpe) in points {
                match sums.iter_mut().find(|(c, _, _)| *c == cost) {
                    Some((_, sum, count)) => {
                        *sum += sharpe;
                        *count += 1;
                    }
                    None => sums.push((cost, sharpe, 1)),
                }
            }
            sums.sort_by(|a, b| a.0.total_cmp(&b.0));
            let curve = sums
                .into_iter()
                .map(|(cost, sum, count)| (cost, sum / count as f64))
                .collect();
            (key, curve)
        })
        .collect()
}

/// Writes curves.csv (plot-ready mean sharpe vs cost) and aggregate.csv
/// (intercept/slope per parameter group). Returns both paths.
pub fn write_reports<P: AsRef<Path>>(out_dir: P, rows: &[CellRow]) -> Result<(PathBuf, PathBuf)> {
    let curves = mean_curves(rows);

    let curves_path = out_dir.as_ref().join("curves.csv");
    let mut wtr = csv::Writer::from_path(&curves_path)
        .with_context(|| format!("writing {}", curves_path.display()))?;
    wtr.write_record(["estimator", "nu_fraction", "sparsity_fraction", "cost", "mean_sharpe"])?;
    for (key, curve) in &curves {
        for (cost, mean_sharpe) in curve {
            wtr.write_record([
                key.estimator.clone(),
                key.nu_fraction.clone(),
                key.sparsity_fraction.clone(),
                format!("{cost}"),
                format!("{mean_sharpe}"),
            ])?;
        }
    }
    wtr.flush()?;

    let aggregate_path = out_dir.as_ref().join("aggregate.csv");
    let mut wtr = csv::Writer::from_path(&aggregate_path)
        .with_context(|| format!("writing {}", aggregate_path.display()))?;
    wtr.write_record(["estimator", "nu_fraction", "sparsity_fraction", "intercept", "slope", "n_costs"])?;
    for (key, curve) in &curves {
        match intercept_slope(curve) {
            Ok((intercept, slope)) => {
                wtr.write_record([
                    key.estimator.clone(),
                    key.nu_fraction.clone(),
                    key.sparsity_fraction.clone(),
                    format!("{intercept}"),
                    format!("{slope}"),
                    curve.len().to_string(),
                ])?;
            }
            Err(e) => {
                eprintln!(
                    "warning: no intercept/slope for {}/{}/{}: {e}",
                    key.estimator, key.nu_fraction, key.sparsity_fraction
                );
            }
        }
    }
    wtr.flush()?;
    Ok((curves_path, aggregate_path))
}
