//! Synthetic data with known ground truth: univariate AR(1) paths and
//! rotated cointegrated panels with planted stationary directions.
//!
//! Everything is driven by the counter-based generator in [`crate::rng`], so
//! paths are bit-exactly reproducible from (spec, seed).

use nalgebra::{DMatrix, DVector};

use crate::linalg::canonicalize_sign;
use crate::rng::CounterRng;
use crate::timeseries::SamplePath;
use crate::{Error, Result};

/// Recipe for a cointegrated panel.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    /// Number of observed assets.
    pub n: usize,
    /// Path length T.
    pub t_len: usize,
    /// Count of planted stationary directions (0..=n).
    pub n_stationary: usize,
    /// AR(1) coefficient per stationary direction, each |a| < 1.
    pub ar_coeffs: Vec<f64>,
    /// PSD innovation covariance of the observation noise.
    pub noise_cov: DMatrix<f64>,
    pub seed: u64,
}

impl SynthSpec {
    /// Convenience constructor with isotropic observation noise.
    pub fn isotropic(
        n: usize,
        t_len: usize,
        ar_coeffs: Vec<f64>,
        noise_sd: f64,
        seed: u64,
    ) -> Self {
        Self {
            n,
            t_len,
            n_stationary: ar_coeffs.len(),
            ar_coeffs,
            noise_cov: DMatrix::identity(n, n) * noise_sd * noise_sd,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        if self.t_len < 3 {
            return Err(Error::InvalidInput("t_len must be >= 3".into()));
        }
        if self.n_stationary > self.n {
            return Err(Error::InvalidInput(format!(
                "n_stationary {} exceeds n {}",
                self.n_stationary, self.n
            )));
        }
        if self.ar_coeffs.len() != self.n_stationary {
            return Err(Error::InvalidInput(format!(
                "{} AR coefficients for {} stationary directions",
                self.ar_coeffs.len(),
                self.n_stationary
            )));
        }
        for &a in &self.ar_coeffs {
            if !(a.abs() < 1.0) {
                return Err(Error::ArCoefficientOutOfRange(a));
            }
        }
        if self.noise_cov.nrows() != self.n || self.noise_cov.ncols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "noise covariance is {}x{}, expected {}x{}",
                self.noise_cov.nrows(),
                self.noise_cov.ncols(),
                self.n,
                self.n
            )));
        }
        Ok(())
    }
}

/// Simulates x_t = mu + a (x_{t-1} - mu) + sigma eps_t with a stationary
/// start (x_0 drawn from the stationary distribution).
pub fn gen_ar1(a: f64, sigma: f64, mu: f64, t_len: usize, seed: u64) -> Result<Vec<f64>> {
    if !(a.abs() < 1.0) {
        return Err(Error::ArCoefficientOutOfRange(a));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be > 0, got {sigma}")));
    }
    let mut rng = CounterRng::new(seed);
    let mut out = Vec::with_capacity(t_len);
    let stationary_sd = sigma / (1.0 - a * a).sqrt();
    let mut x = mu + stationary_sd * rng.next_gaussian();
    out.push(x);
    for _ in 1..t_len {
        x = mu + a * (x - mu) + sigma * rng.next_gaussian();
        out.push(x);
    }
    Ok(out)
}

/// Generates an observed panel by rotating latent coordinates with a random
/// orthonormal basis: the first `n_stationary` coordinates follow AR(1)
/// recursions with unit innovations, the rest are random walks, and
/// observation noise with covariance `noise_cov` is added on top.
///
/// Returns the path together with the true stationary directions (unit
/// vectors w such that w'x_t is the corresponding latent AR(1) series plus
/// observation noise).
pub fn gen_cointegrated(spec: &SynthSpec) -> Result<(SamplePath, Vec<DVector<f64>>)> {
    spec.validate()?;
    let n = spec.n;
    let rng = CounterRng::new(spec.seed);

    let basis = random_orthonormal(n, &mut rng.derive(1));
    let noise_factor = psd_factor(&spec.noise_cov)?;

    // Latent coordinates, one column per direction.
    let mut latent = DMatrix::zeros(spec.t_len, n);
    let mut coord_rng = rng.derive(2);
    for i in 0..n {
        if i < spec.n_stationary {
            let a = spec.ar_coeffs[i];
            let mut x = coord_rng.next_gaussian() / (1.0 - a * a).sqrt();
            latent[(0, i)] = x;
            for t in 1..spec.t_len {
                x = a * x + coord_rng.next_gaussian();
                latent[(t, i)] = x;
            }
        } else {
            let mut x = 0.0;
            for t in 0..spec.t_len {
                x += coord_rng.next_gaussian();
                latent[(t, i)] = x;
            }
        }
    }

    let mut values = latent * basis.transpose();
    let mut noise_rng = rng.derive(3);
    if spec.noise_cov.iter().any(|&v| v != 0.0) {
        for t in 0..spec.t_len {
            let eta = DVector::from_fn(n, |_, _| noise_rng.next_gaussian());
            let shock = &noise_factor * eta;
            for j in 0..n {
                values[(t, j)] += shock[j];
            }
        }
    }

    let labels = (0..n).map(|i| format!("a{i}")).collect();
    let path = SamplePath::new(values, labels, None)?;

    let directions = (0..spec.n_stationary)
        .map(|i| {
            let mut w = basis.column(i).into_owned();
            canonicalize_sign(&mut w);
            w
        })
        .collect();
    Ok((path, directions))
}

fn random_orthonormal(n: usize, rng: &mut CounterRng) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            g[(r, c)] = rng.next_gaussian();
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix column signs so the factorization is unique.
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            for row in 0..n {
                q[(row, c)] = -q[(row, c)];
            }
        }
    }
    q
}

fn psd_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = cov.clone().symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if min_eig < -1e-10 * scale.max(1e-300) {
        return Err(Error::InvalidInput(format!(
            "noise covariance has negative eigenvalue {min_eig:.3e}"
        )));
    }
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()),
    );
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxies::{cosine_crossing, crossing_rate, fit_ar1};
    use crate::timeseries::{autocovariance, build_autocov_set};
    use crate::linalg::min_eigenvalue;
    use approx::assert_relative_eq;

    #[test]
    fn gen_ar1_is_deterministic() {
        let a = gen_ar1(0.5, 1.0, 0.0, 1000, 99).unwrap();
        let b = gen_ar1(0.5, 1.0, 0.0, 1000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gen_ar1_fit_recovers_coefficient() {
        let t_len = 50_000;
        let series = gen_ar1(0.5, 0.01, 1.0, t_len, 12).unwrap();
        let fit = fit_ar1(&series).unwrap();
        assert!((fit.coeff - 0.5).abs() <= 3.0 / (t_len as f64).sqrt());
        assert!((fit.mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn gen_ar1_white_noise_crosses_half_the_time() {
        let t_len = 100_000;
        let series = gen_ar1(0.0, 1.0, 0.0, t_len, 5).unwrap();
        let mean = series.iter().sum::<f64>() / t_len as f64;
        let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
        let rate = crossing_rate(&centered).unwrap();
        assert!((rate - 0.5).abs() <= 3.0 / (t_len as f64).sqrt());
    }

    #[test]
    fn gen_ar1_rejects_bad_coefficient() {
        assert!(gen_ar1(1.0, 1.0, 0.0, 100, 1).is_err());
        assert!(gen_ar1(-1.5, 1.0, 0.0, 100, 1).is_err());
    }

    #[test]
    fn cointegrated_panel_is_reproducible() {
        let spec = SynthSpec::isotropic(5, 500, vec![0.3], 0.01, 77);
        let (path_a, dirs_a) = gen_cointegrated(&spec).unwrap();
        let (path_b, dirs_b) = gen_cointegrated(&spec).unwrap();
        assert_eq!(path_a, path_b);
        assert_eq!(dirs_a, dirs_b);
    }

    #[test]
    fn planted_directions_are_orthonormal() {
        let spec = SynthSpec::isotropic(6, 300, vec![0.2, 0.5], 0.0, 3);
        let (_, dirs) = gen_cointegrated(&spec).unwrap();
        assert_eq!(dirs.len(), 2);
        assert_relative_eq!(dirs[0].norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(dirs[1].norm(), 1.0, epsilon = 1e-12);
        assert!(dirs[0].dot(&dirs[1]).abs() < 1e-12);
    }

    #[test]
    fn planted_direction_matches_cosine_formula() {
        let spec = SynthSpec::isotropic(4, 50_000, vec![0.3], 0.01, 21);
        let (path, dirs) = gen_cointegrated(&spec).unwrap();
        let series = path.basket_series(&dirs[0]).unwrap();
        let mean = series.sum() / series.len() as f64;
        let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
        let rate = crossing_rate(&centered).unwrap();
        let expected = cosine_crossing(0.3).unwrap();
        assert!((rate - expected).abs() <= 0.02, "rate {rate} vs {expected}");
    }

    #[test]
    fn all_stationary_white_panel_has_no_correlated_direction() {
        let spec = SynthSpec::isotropic(4, 20_000, vec![0.0, 0.0, 0.0, 0.0], 0.0, 9);
        let (path, _) = gen_cointegrated(&spec).unwrap();
        // lag-1 autocovariance should be near zero in every direction
        let a1 = autocovariance(&path, 1).unwrap();
        let a0 = autocovariance(&path, 0).unwrap();
        assert!(a1.norm() / a0.norm() < 0.03);
    }

    #[test]
    fn pure_random_walk_panel_has_growing_smallest_eigenvalue() {
        let short = SynthSpec::isotropic(3, 500, vec![], 0.0, 15);
        let long = SynthSpec {
            t_len: 8_000,
            ..short.clone()
        };
        let (path_short, _) = gen_cointegrated(&short).unwrap();
        let (path_long, _) = gen_cointegrated(&long).unwrap();
        let eig_short = min_eigenvalue(build_autocov_set(&path_short, 0).unwrap().a0());
        let eig_long = min_eigenvalue(build_autocov_set(&path_long, 0).unwrap().a0());
        assert!(
            eig_long > 4.0 * eig_short,
            "lambda_min did not grow: {eig_short} -> {eig_long}"
        );
    }
}
