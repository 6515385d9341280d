//! Experiment configuration: a flat key-value text file with optional
//! `[section]` headers (headers are decorative; keys are global and must be
//! unique). Lines starting with `#` or `;` are comments.
//!
//! ```text
//! [data]
//! data = universe.csv
//! groups = groups.csv
//! out_dir = reports
//!
//! [protocol]
//! window_length = 255
//! window_count = 20
//! split = 0.85
//! cost_grid = 0.03,0.05,0.07,0.09,0.11,0.13,0.15,0.17
//! estimators = pca,spca,predictability,portmanteau,crossing
//! nu_fractions = 0,0.1,0.2,0.3,0.4,0.5
//! sparsity_fractions = 0.3,0.5,0.7
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use meanrev::backtest::default_cost_grid;
use meanrev::estimators::{EstimatorKind, DEFAULT_RHO_GRID};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Asset value panel (CSV).
    pub data: PathBuf,
    /// Sidecar asset_label,group_label CSV; all assets form one group when
    /// absent.
    pub groups: Option<PathBuf>,
    /// Output directory for cells.csv, curves.csv, aggregate.csv.
    pub out_dir: PathBuf,
    pub window_length: usize,
    pub window_count: usize,
    /// Offset between window starts; equal to `window_length` for disjoint
    /// windows, smaller for sliding ones.
    pub window_stride: usize,
    /// In-sample fraction of each window.
    pub split: f64,
    pub cost_grid: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    /// Variance floor as fractions of the median asset variance in the pool.
    pub nu_fractions: Vec<f64>,
    /// Support-size targets as fractions of the pool size.
    pub sparsity_fractions: Vec<f64>,
    /// Autocovariance order for the portmanteau/crossing criteria.
    pub order: usize,
    /// Quadratic-term weight for the crossing criterion.
    pub quad_weight: f64,
    /// L1 weight grid; the best in-sample criterion value wins.
    pub rho_grid: Vec<f64>,
    /// Recorded for provenance; estimation itself is deterministic.
    pub seed: u64,
    pub pool_n_min: usize,
    pub pool_n_max: usize,
    /// Candidate pools kept per group.
    pub max_candidates: usize,
    /// Candidate pools kept per window across all groups.
    pub keep_best: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::new(),
            groups: None,
            out_dir: PathBuf::from("reports"),
            window_length: 255,
            window_count: 20,
            window_stride: 255,
            split: 0.85,
            cost_grid: default_cost_grid(),
            estimators: EstimatorKind::ALL.to_vec(),
            nu_fractions: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            sparsity_fractions: vec![0.3, 0.5, 0.7],
            order: 3,
            quad_weight: 1.0,
            rho_grid: DEFAULT_RHO_GRID.to_vec(),
            seed: 0,
            pool_n_min: 8,
            pool_n_max: 12,
            max_candidates: 200,
            keep_best: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.as_ref().display()))?;
        let mut config = Self::from_str_contents(&text)?;
        // Relative paths resolve against the config file's directory.
        if let Some(dir) = path.as_ref().parent() {
            if config.data.is_relative() {
                config.data = dir.join(&config.data);
            }
            if let Some(groups) = &config.groups {
                if groups.is_relative() {
                    config.groups = Some(dir.join(groups));
                }
            }
            if config.out_dir.is_relative() {
                config.out_dir = dir.join(&config.out_dir);
            }
        }
        Ok(config)
    }

    pub fn from_str_contents(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value'", line_no + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), value).is_some() {
                bail!("line {}: duplicate key '{key}'", line_no + 1);
            }
        }

        let mut config = ExperimentConfig::default();
        let mut stride_set = false;
        for (key, value) in &entries {
            match key.as_str() {
                "data" => config.data = PathBuf::from(value),
                "groups" => config.groups = Some(PathBuf::from(value)),
                "out_dir" => config.out_dir = PathBuf::from(value),
                "window_length" => config.window_length = parse(key, value)?,
                "window_count" => config.window_count = parse(key, value)?,
                "window_stride" => {
                    config.window_stride = parse(key, value)?;
                    stride_set = true;
                }
                "split" => config.split = parse(key, value)?,
                "cost_grid" => config.cost_grid = parse_f64_list(key, value)?,
                "estimators" => {
                    config.estimators = value
                        .split(',')
                        .map(|s| s.trim().parse::<EstimatorKind>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| anyhow!("key '{key}': {e}"))?;
                }
                "nu_fractions" => config.nu_fractions = parse_f64_list(key, value)?,
                "sparsity_fractions" => config.sparsity_fractions = parse_f64_list(key, value)?,
                "p" => config.order = parse(key, value)?,
                "mu" => config.quad_weight = parse(key, value)?,
                "rho_grid" => config.rho_grid = parse_f64_list(key, value)?,
                "seed" => config.seed = parse(key, value)?,
                "pool_n_min" => config.pool_n_min = parse(key, value)?,
                "pool_n_max" => config.pool_n_max = parse(key, value)?,
                "max_candidates" => config.max_candidates = parse(key, value)?,
                "keep_best" => config.keep_best = parse(key, value)?,
                other => bail!("unknown config key '{other}'"),
            }
        }
        if !stride_set {
            config.window_stride = config.window_length;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.as_os_str().is_empty() {
            bail!("config is missing the 'data' key");
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            bail!("split must be in (0,1), got {}", self.split);
        }
        if self.window_length < 12 {
            bail!("window_length {} too short", self.window_length);
        }
        if self.window_stride == 0 {
            bail!("window_stride must be >= 1");
        }
        if self.window_count == 0 {
            bail!("window_count must be >= 1");
        }
        if self.cost_grid.is_empty() {
            bail!("cost_grid must not be empty");
        }
        if self.estimators.is_empty() {
            bail!("estimators must not be empty");
        }
        if self.sparsity_fractions.is_empty() {
            bail!("sparsity_fractions must not be empty");
        }
        if self.nu_fractions.is_empty() {
            bail!("nu_fractions must not be empty");
        }
        if self.rho_grid.is_empty() {
            bail!("rho_grid must not be empty");
        }
        if self.order < 1 {
            bail!("p must be >= 1");
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("key '{key}': cannot parse '{value}': {e}"))
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split([',', ' '])
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse::<f64>(key, s.trim()))
        .collect()
}
