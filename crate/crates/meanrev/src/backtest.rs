//! Contrarian backtest of a fixed basket under linear per-unit transaction
//! costs.
//!
//! The basket value b_t = y'x_t is traded as if it were a single asset. An
//! AR(1) fit on the in-sample segment supplies (mean, coeff, noise_sd); each
//! out-sample day the target position is the log-utility rule
//!
//! ```text
//! N_t = coeff * (mean - b_t) / noise_sd^2 * W_t
//! ```
//!
//! long below the mean, short above it when coeff > 0. Day 0 of the ledger is
//! the flat baseline at the first out-sample day; the entry trade is charged
//! on day 1 and the final day forces liquidation, so initial and final
//! positions are flat and the wealth recursion
//! `wealth[t] = wealth[t-1] + pnl[t] - trade_cost[t]` holds exactly.
//!
//! The wealth W_t used for sizing is the running mark-to-market wealth
//! gross of costs, floored at 0.01 * initial; keeping it cost-free makes
//! positions independent of the cost level, so doubling the per-unit cost
//! exactly doubles every trade_cost entry and a cost sweep reuses one
//! position path. Weights are never re-estimated out of sample.

use nalgebra::DVector;

use crate::estimators::BasketWeights;
use crate::proxies::{fit_ar1, Ar1Fit};
use crate::timeseries::SamplePath;
use crate::{Error, Result};

/// Trading days per year used to annualize Sharpe ratios.
pub const ANNUALIZATION_DAYS: f64 = 252.0;

/// Fraction of initial wealth used as the sizing floor.
const WEALTH_FLOOR_FRACTION: f64 = 0.01;

/// One out-sample day of the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerDay {
    /// Basket value b_t.
    pub basket_value: f64,
    /// Position N_t in basket units held at the close.
    pub position: f64,
    /// Per-asset holdings N_t * y.
    pub holdings: DVector<f64>,
    /// Cost charged for moving to N_t, >= 0.
    pub trade_cost: f64,
    /// Mark-to-market gain N_{t-1} * (b_t - b_{t-1}).
    pub pnl: f64,
    /// Running wealth net of costs.
    pub wealth: f64,
}

/// Per-day accounting of one backtest episode.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeLedger {
    pub days: Vec<LedgerDay>,
    pub initial_wealth: f64,
    pub cost_per_unit: f64,
    /// AR(1) fit the positions were derived from.
    pub fit: Ar1Fit,
}

impl TradeLedger {
    /// Daily wealth increments (length = days - 1).
    pub fn wealth_deltas(&self) -> Vec<f64> {
        self.days.windows(2).map(|w| w[1].wealth - w[0].wealth).collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.days.iter().map(|d| d.trade_cost).sum()
    }
}

/// Annualized Sharpe ratio with a degeneracy flag for flat wealth paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpeRatio {
    pub value: f64,
    /// True when the daily-increment standard deviation was zero; `value` is
    /// reported as 0 in that case.
    pub sd_is_zero: bool,
}

/// Aggregated episode summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub sharpe: SharpeRatio,
    pub mean_daily_pnl: f64,
    pub sd_daily_pnl: f64,
    pub total_cost: f64,
    pub cost_per_unit: f64,
    pub basket: BasketWeights,
}

/// Log-utility contrarian position: coeff * (mean - x_t) / noise_sd^2 * wealth.
pub fn jurek_position(fit: &Ar1Fit, basket_value: f64, wealth: f64) -> Result<f64> {
    if fit.noise_sd <= 1e-12 {
        return Err(Error::DegenerateNoise(fit.noise_sd));
    }
    Ok(fit.coeff * (fit.mean - basket_value) / (fit.noise_sd * fit.noise_sd) * wealth)
}

/// Runs one episode: fits AR(1) on the first ceil(split * T) days, trades the
/// remainder with daily rebalancing to the contrarian target, charges
/// `cost_per_unit * sum_i |delta holdings_i|` per rebalance, and returns the
/// full ledger. Initial wealth is 1.
pub fn run_backtest(
    path: &SamplePath,
    weights: &BasketWeights,
    split: f64,
    cost_per_unit: f64,
) -> Result<TradeLedger> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidInput(format!("split must be in (0,1), got {split}")));
    }
    if cost_per_unit < 0.0 {
        return Err(Error::InvalidInput("cost_per_unit must be >= 0".into()));
    }
    let basket = path.basket_series(&weights.y)?;
    let t_len = basket.len();
    let in_len = (split * t_len as f64).ceil() as usize;
    if in_len < 10 {
        return Err(Error::SeriesTooShort { len: in_len, min: 10 });
    }
    let out_len = t_len - in_len;
    if out_len < 2 {
        return Err(Error::SeriesTooShort { len: out_len, min: 2 });
    }

    let fit = fit_ar1(&basket.as_slice()[..in_len])?;
    let weight_l1: f64 = weights.y.iter().map(|v| v.abs()).sum();
    let initial_wealth = 1.0;
    let floor = WEALTH_FLOOR_FRACTION * initial_wealth;

    let mut days = Vec::with_capacity(out_len);
    days.push(LedgerDay {
        basket_value: basket[in_len],
        position: 0.0,
        holdings: DVector::zeros(weights.y.len()),
        trade_cost: 0.0,
        pnl: 0.0,
        wealth: initial_wealth,
    });

    let mut gross_wealth = initial_wealth;
    for j in 1..out_len {
        let t = in_len + j;
        let previous = &days[j - 1];
        let pnl = previous.position * (basket[t] - basket[t - 1]);
        gross_wealth += pnl;
        let position = if j == out_len - 1 {
            0.0
        } else {
            jurek_position(&fit, basket[t], gross_wealth.max(floor))?
        };
        let trade_cost = cost_per_unit * weight_l1 * (position - previous.position).abs();
        let wealth = previous.wealth + pnl - trade_cost;
        days.push(LedgerDay {
            basket_value: basket[t],
            position,
            holdings: &weights.y * position,
            trade_cost,
            pnl,
            wealth,
        });
    }

    Ok(TradeLedger { days, initial_wealth, cost_per_unit, fit })
}

/// Annualized Sharpe ratio of the daily wealth increments, using the
/// population standard deviation. Needs at least two ledger days.
pub fn sharpe(ledger: &TradeLedger) -> Result<SharpeRatio> {
    let deltas = ledger.wealth_deltas();
    if deltas.is_empty() {
        return Err(Error::SeriesTooShort { len: ledger.days.len(), min: 2 });
    }
    let (mean, sd) = mean_sd(&deltas);
    if sd == 0.0 {
        return Ok(SharpeRatio { value: 0.0, sd_is_zero: true });
    }
    Ok(SharpeRatio {
        value: mean / sd * ANNUALIZATION_DAYS.sqrt(),
        sd_is_zero: false,
    })
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Runs one episode and summarizes it.
pub fn backtest_report(
    path: &SamplePath,
    weights: &BasketWeights,
    split: f64,
    cost_per_unit: f64,
) -> Result<BacktestReport> {
    let ledger = run_backtest(path, weights, split, cost_per_unit)?;
    let deltas = ledger.wealth_deltas();
    let (mean, sd) = mean_sd(&deltas);
    Ok(BacktestReport {
        sharpe: sharpe(&ledger)?,
        mean_daily_pnl: mean,
        sd_daily_pnl: sd,
        total_cost: ledger.total_cost(),
        cost_per_unit,
        basket: weights.clone(),
    })
}

/// One point of a cost sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub cost_per_unit: f64,
    pub sharpe: f64,
    pub sharpe_sd_is_zero: bool,
    pub total_cost: f64,
}

/// Backtests the same basket at every cost level; nothing else varies.
pub fn cost_sweep(
    path: &SamplePath,
    weights: &BasketWeights,
    split: f64,
    costs: &[f64],
) -> Result<Vec<SweepPoint>> {
    costs
        .iter()
        .map(|&cost| {
            let report = backtest_report(path, weights, split, cost)?;
            Ok(SweepPoint {
                cost_per_unit: cost,
                sharpe: report.sharpe.value,
                sharpe_sd_is_zero: report.sharpe.sd_is_zero,
                total_cost: report.total_cost,
            })
        })
        .collect()
}

/// The per-contract-unit cost grid 0.03, 0.05, .., 0.17 (currency cents).
pub fn default_cost_grid() -> Vec<f64> {
    (0..8).map(|i| 0.03 + 0.02 * i as f64).collect()
}

/// Ordinary least-squares fit of sharpe on cost: returns (intercept, slope).
/// Needs at least two distinct cost levels.
pub fn intercept_slope(sweep: &[(f64, f64)]) -> Result<(f64, f64)> {
    if sweep.len() < 2 {
        return Err(Error::TooFewPoints { got: sweep.len(), min: 2 });
    }
    let n = sweep.len() as f64;
    let mean_c = sweep.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_s = sweep.iter().map(|p| p.1).sum::<f64>() / n;
    let var_c: f64 = sweep.iter().map(|p| (p.0 - mean_c) * (p.0 - mean_c)).sum();
    if var_c == 0.0 {
        return Err(Error::TooFewPoints { got: 1, min: 2 });
    }
    let cov: f64 = sweep
        .iter()
        .map(|p| (p.0 - mean_c) * (p.1 - mean_s))
        .sum();
    let slope = cov / var_c;
    Ok((mean_s - slope * mean_c, slope))
}
