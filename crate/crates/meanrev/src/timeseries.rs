//! Sample-path ingestion, centering, and lagged autocovariance estimation.
//!
//! A lag-k autocovariance is estimated as
//!
//! ```text
//! A_k = 1/(T-k-1) * sum_{t=1..T-k} x~_t x~_{t+k}'
//! ```
//!
//! with `x~` the column-centered path. [`build_autocov_set`] additionally
//! symmetrizes every matrix, since only the symmetric part enters quadratic
//! forms y'Ay. The normalization divisor is exactly `T-k-1`; no alternative
//! convention is offered so fixtures stay bit-stable.
//!
//! CSV layout: header row with asset labels, one column per asset, optional
//! leading date column. Missing values are rejected, not imputed.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::linalg::sym_part;
use crate::{Error, Result};

/// A T x n panel of asset values over time (rows = time, columns = assets).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    values: DMatrix<f64>,
    labels: Vec<String>,
    t_index: Option<Vec<String>>,
}

impl SamplePath {
    /// Validates and wraps a panel. Requires T >= 3, n >= 1, finite entries,
    /// unique labels (one per column), and a date index matching T when
    /// present.
    pub fn new(
        values: DMatrix<f64>,
        labels: Vec<String>,
        t_index: Option<Vec<String>>,
    ) -> Result<Self> {
        let (t_len, n) = (values.nrows(), values.ncols());
        if t_len < 3 {
            return Err(Error::InvalidInput(format!(
                "sample path needs T >= 3 rows, got {t_len}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidInput("sample path needs n >= 1 assets".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sample path contains non-finite values".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} assets",
                labels.len(),
                n
            )));
        }
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != n {
            return Err(Error::InvalidInput("asset labels are not unique".into()));
        }
        if let Some(idx) = &t_index {
            if idx.len() != t_len {
                return Err(Error::InvalidInput(format!(
                    "date index has {} entries for {} rows",
                    idx.len(),
                    t_len
                )));
            }
        }
        Ok(Self { values, labels, t_index })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn t_index(&self) -> Option<&[String]> {
        self.t_index.as_deref()
    }

    /// Number of time steps T.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// Number of assets n.
    pub fn n_assets(&self) -> usize {
        self.values.ncols()
    }

    /// Basket value series b_t = y'x_t for a weight vector.
    pub fn basket_series(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.n_assets() {
            return Err(Error::DimensionMismatch(format!(
                "weights have {} entries for {} assets",
                y.len(),
                self.n_assets()
            )));
        }
        Ok(&self.values * y)
    }

    /// Contiguous row window [start, start+len).
    pub fn window(&self, start: usize, len: usize) -> Result<SamplePath> {
        if start + len > self.len() {
            return Err(Error::InvalidInput(format!(
                "window [{start}, {}) exceeds {} rows",
                start + len,
                self.len()
            )));
        }
        let values = self.values.rows(start, len).into_owned();
        let t_index = self
            .t_index
            .as_ref()
            .map(|idx| idx[start..start + len].to_vec());
        SamplePath::new(values, self.labels.clone(), t_index)
    }

    /// Column subset, preserving the given asset order.
    pub fn select_assets(&self, indices: &[usize]) -> Result<SamplePath> {
        for &i in indices {
            if i >= self.n_assets() {
                return Err(Error::DimensionMismatch(format!(
                    "asset index {i} out of range for {} assets",
                    self.n_assets()
                )));
            }
        }
        let values = DMatrix::from_fn(self.len(), indices.len(), |r, c| {
            self.values[(r, indices[c])]
        });
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        SamplePath::new(values, labels, self.t_index.clone())
    }

    /// Position of a label, if present.
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Reads the CSV layout described in the module docs. The first column is
    /// treated as a date index when its header is one of `date`, `time`, `t`,
    /// `index` (case-insensitive) or its first entry does not parse as a
    /// number.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
        if headers.is_empty() {
            return Err(Error::Parse {
                location: "header".into(),
                reason: "empty header row".into(),
            });
        }
        let records: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
        if records.is_empty() {
            return Err(Error::Parse {
                location: "body".into(),
                reason: "no data rows".into(),
            });
        }

        let first_header = headers[0].to_ascii_lowercase();
        let named_date = matches!(first_header.as_str(), "date" | "time" | "t" | "index");
        let first_cell_numeric = records[0]
            .get(0)
            .map(|c| c.parse::<f64>().is_ok())
            .unwrap_or(false);
        let has_date = named_date || !first_cell_numeric;
        let first_asset_col = usize::from(has_date);

        let labels: Vec<String> = headers[first_asset_col..].to_vec();
        if labels.is_empty() {
            return Err(Error::Parse {
                location: "header".into(),
                reason: "no asset columns".into(),
            });
        }
        let t_len = records.len();
        let n = labels.len();
        let mut values = DMatrix::zeros(t_len, n);
        let mut t_index = has_date.then(|| Vec::with_capacity(t_len));
        for (row, record) in records.iter().enumerate() {
            if record.len() != headers.len() {
                return Err(Error::Parse {
                    location: format!("row {}", row + 2),
                    reason: format!("{} fields, expected {}", record.len(), headers.len()),
                });
            }
            if let Some(idx) = &mut t_index {
                idx.push(record.get(0).unwrap_or("").to_string());
            }
            for col in 0..n {
                let cell = record.get(first_asset_col + col).unwrap_or("");
                if cell.is_empty() {
                    return Err(Error::Parse {
                        location: format!("row {}, column {}", row + 2, labels[col]),
                        reason: "missing value".into(),
                    });
                }
                values[(row, col)] = cell.parse::<f64>().map_err(|e| Error::Parse {
                    location: format!("row {}, column {}", row + 2, labels[col]),
                    reason: e.to_string(),
                })?;
            }
        }
        SamplePath::new(values, labels, t_index)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Writes the same CSV layout back out, including the date column when an
    /// index is present.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = Vec::new();
        if self.t_index.is_some() {
            header.push("date".to_string());
        }
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header)?;
        for row in 0..self.len() {
            let mut record = Vec::with_capacity(header.len());
            if let Some(idx) = &self.t_index {
                record.push(idx[row].clone());
            }
            for col in 0..self.n_assets() {
                record.push(format!("{}", self.values[(row, col)]));
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Symmetrized empirical autocovariances A_0..A_p for one asset pool.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceSet {
    mats: Vec<DMatrix<f64>>,
    sample_size: usize,
}

impl AutocovarianceSet {
    /// Wraps pre-computed symmetric matrices. A_0 must be PSD up to the clip
    /// threshold `-1e-10 * trace(A0)`.
    pub fn new(mats: Vec<DMatrix<f64>>, sample_size: usize) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("autocovariance set needs at least A0".into()));
        }
        let n = mats[0].nrows();
        for (k, m) in mats.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "A{k} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let asym = (m - m.transpose()).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if asym > 1e-12 * scale.max(1e-300) {
                return Err(Error::InvalidInput(format!(
                    "A{k} is not symmetric (max asymmetry {asym:.3e})"
                )));
            }
        }
        let a0 = clip_a0_psd(mats[0].clone())?;
        let mut mats = mats;
        mats[0] = a0;
        Ok(Self { mats, sample_size })
    }

    /// Highest available lag p.
    pub fn order(&self) -> usize {
        self.mats.len() - 1
    }

    /// Asset count n.
    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Lag-k matrix; panics if k > order.
    pub fn mat(&self, k: usize) -> &DMatrix<f64> {
        &self.mats[k]
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.mats[0]
    }
}

/// Removes each column's mean.
pub fn center(path: &SamplePath) -> SamplePath {
    SamplePath {
        values: center_matrix(path.values()),
        labels: path.labels.clone(),
        t_index: path.t_index.clone(),
    }
}

fn center_matrix(values: &DMatrix<f64>) -> DMatrix<f64> {
    let t_len = values.nrows() as f64;
    let mut out = values.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / t_len;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Raw (unsymmetrized) lag-k autocovariance with divisor T-k-1.
pub fn autocovariance(path: &SamplePath, k: usize) -> Result<DMatrix<f64>> {
    let t_len = path.len();
    if k + 3 > t_len {
        return Err(Error::LagTooLarge { lag: k, t_len, max: t_len - 3 });
    }
    let centered = center_matrix(path.values());
    let head = centered.rows(0, t_len - k);
    let tail = centered.rows(k, t_len - k);
    Ok(head.transpose() * tail / (t_len - k - 1) as f64)
}

/// Builds the symmetrized set {A_0, .., A_p}. A_0 is clipped to PSD when its
/// smallest eigenvalue lies in (-1e-10 * trace(A0), 0); anything lower is
/// rejected as degenerate data.
pub fn build_autocov_set(path: &SamplePath, p: usize) -> Result<AutocovarianceSet> {
    let t_len = path.len();
    if p + 3 > t_len {
        return Err(Error::LagTooLarge { lag: p, t_len, max: t_len - 3 });
    }
    let mut mats = Vec::with_capacity(p + 1);
    for k in 0..=p {
        mats.push(sym_part(&autocovariance(path, k)?));
    }
    mats[0] = clip_a0_psd(mats[0].clone())?;
    Ok(AutocovarianceSet { mats, sample_size: t_len })
}

fn clip_a0_psd(a0: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let threshold = 1e-10 * a0.trace();
    let eig = a0.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig >= 0.0 {
        return Ok(a0);
    }
    if min_eig > -threshold {
        let clipped = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&v| v.max(0.0)),
        );
        return Ok(&eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose());
    }
    Err(Error::DegenerateCovariance { min_eig, threshold: -threshold })
}
