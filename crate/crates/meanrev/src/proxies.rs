//! Mean-reversion proxies for a candidate weight vector, and AR(1) fitting
//! for univariate basket series.
//!
//! All three proxies are small for fast mean-reverting series:
//!
//! - predictability: lambda(y) = y'A1 A0^-1 A1'y / y'A0y (plug-in
//!   Yule-Walker form),
//! - portmanteau of order p: (1/p) * sum_i (y'A_i y / y'A0 y)^2,
//! - crossing rate: empirical frequency of x_t * x_{t-1} <= 0, which for an
//!   AR(1) process with coefficient a has expectation arccos(a)/pi (the
//!   cosine formula).
//!
//! Quadratic-form proxies are invariant to rescaling of y. A0 inverses use
//! the crate's standard ridge.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{quadratic_form, ridged_inverse, sym_part};
use crate::timeseries::AutocovarianceSet;
use crate::{Error, Result};

/// Fitted AR(1) recursion x_t = mean + coeff * (x_{t-1} - mean) + noise_sd * eps_t.
///
/// The coefficient is named `coeff` rather than rho to avoid a clash with the
/// L1 weight used by the semidefinite programs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Fit {
    /// Long-term mean in series units.
    pub mean: f64,
    /// Lag-1 autocorrelation, clamped to [-0.999, 0.999].
    pub coeff: f64,
    /// Residual standard deviation (population convention), >= 0.
    pub noise_sd: f64,
}

fn basket_variance(y: &DVector<f64>, acs: &AutocovarianceSet) -> Result<f64> {
    if y.len() != acs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "weight vector has {} entries for {} assets",
            y.len(),
            acs.dim()
        )));
    }
    let var = quadratic_form(y, acs.a0());
    if var <= 1e-14 * y.norm_squared() {
        return Err(Error::DegenerateVariance(var));
    }
    Ok(var)
}

/// Predictability matrix M = A1 (A0 + delta I)^-1 A1', symmetrized.
pub fn predictability_matrix(acs: &AutocovarianceSet) -> Result<DMatrix<f64>> {
    if acs.order() < 1 {
        return Err(Error::InvalidInput(
            "predictability needs autocovariances up to lag 1".into(),
        ));
    }
    let inv = ridged_inverse(acs.a0())?;
    Ok(sym_part(&(acs.mat(1) * inv * acs.mat(1).transpose())))
}

/// Plug-in predictability lambda(y); scale-invariant in y, non-negative.
pub fn predictability(y: &DVector<f64>, acs: &AutocovarianceSet) -> Result<f64> {
    let var = basket_variance(y, acs)?;
    let m = predictability_matrix(acs)?;
    Ok(quadratic_form(y, &m) / var)
}

/// Portmanteau statistic of order p; zero for white noise, scale-invariant.
pub fn portmanteau(y: &DVector<f64>, acs: &AutocovarianceSet, p: usize) -> Result<f64> {
    if p < 1 || p > acs.order() {
        return Err(Error::InvalidInput(format!(
            "portmanteau order {p} outside 1..={}",
            acs.order()
        )));
    }
    let var = basket_variance(y, acs)?;
    let mut total = 0.0;
    for i in 1..=p {
        let ratio = quadratic_form(y, acs.mat(i)) / var;
        total += ratio * ratio;
    }
    Ok(total / p as f64)
}

/// Fraction of adjacent-step sign changes about zero, counting exact zeros as
/// crossings: #{t : x_t * x_{t-1} <= 0} / (T-1). The caller centers the
/// series first.
pub fn crossing_rate(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::SeriesTooShort { len: series.len(), min: 2 });
    }
    let crossings = series
        .windows(2)
        .filter(|w| w[0] * w[1] <= 0.0)
        .count();
    Ok(crossings as f64 / (series.len() - 1) as f64)
}

/// Expected crossing rate of an AR(1) process: arccos(a)/pi.
pub fn cosine_crossing(coeff: f64) -> Result<f64> {
    if !(coeff.abs() < 1.0) {
        return Err(Error::ArCoefficientOutOfRange(coeff));
    }
    Ok(coeff.acos() / std::f64::consts::PI)
}

/// Fits an AR(1) by the scalar Yule-Walker estimator: mean = sample mean,
/// coeff = lag-1 autocorrelation of the demeaned series (clamped to
/// [-0.999, 0.999]), noise_sd = standard deviation of the one-step residuals.
pub fn fit_ar1(series: &[f64]) -> Result<Ar1Fit> {
    if series.len() < 10 {
        return Err(Error::SeriesTooShort { len: series.len(), min: 10 });
    }
    let t_len = series.len();
    let mean = series.iter().sum::<f64>() / t_len as f64;
    let demeaned: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = demeaned.iter().map(|x| x * x).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let numer: f64 = demeaned.windows(2).map(|w| w[0] * w[1]).sum();
    // |numer| <= denom by Cauchy-Schwarz, so the ratio is already in [-1, 1].
    let coeff = (numer / denom).clamp(-0.999, 0.999);
    let residual_sq: f64 = demeaned
        .windows(2)
        .map(|w| {
            let e = w[1] - coeff * w[0];
            e * e
        })
        .sum();
    let noise_sd = (residual_sq / (t_len - 1) as f64).sqrt();
    Ok(Ar1Fit { mean, coeff, noise_sd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use crate::synth::gen_ar1;
    use crate::timeseries::AutocovarianceSet;
    use approx::assert_relative_eq;

    fn scalar_acs(a0: f64, a1: f64) -> AutocovarianceSet {
        AutocovarianceSet::new(
            vec![
                DMatrix::from_element(1, 1, a0),
                DMatrix::from_element(1, 1, a1),
            ],
            100,
        )
        .unwrap()
    }

    fn random_acs(n: usize, seed: u64) -> AutocovarianceSet {
        let mut rng = CounterRng::new(seed);
        let g = DMatrix::from_fn(2 * n, n, |_, _| rng.next_gaussian());
        let a0 = g.transpose() * &g / (2 * n) as f64;
        let raw = DMatrix::from_fn(n, n, |_, _| 0.3 * rng.next_gaussian());
        let a1 = sym_part(&raw);
        AutocovarianceSet::new(vec![a0, a1], 2 * n).unwrap()
    }

    #[test]
    fn predictability_vanishes_when_a1_is_zero() {
        let mut rng = CounterRng::new(2);
        let g = DMatrix::from_fn(8, 4, |_, _| rng.next_gaussian());
        let a0 = g.transpose() * &g / 8.0;
        let acs = AutocovarianceSet::new(vec![a0, DMatrix::zeros(4, 4)], 8).unwrap();
        let y = DVector::from_fn(4, |_, _| rng.next_gaussian());
        assert_relative_eq!(predictability(&y, &acs).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn predictability_scalar_fixture() {
        let acs = scalar_acs(2.0, 1.0);
        let y = DVector::from_element(1, 1.0);
        // (1 * 1/2 * 1) / 2 = 0.25, up to the 1e-8 ridge
        assert_relative_eq!(predictability(&y, &acs).unwrap(), 0.25, epsilon = 1e-7);
    }

    #[test]
    fn predictability_identity_case() {
        let acs = AutocovarianceSet::new(
            vec![DMatrix::identity(3, 3), DMatrix::identity(3, 3)],
            50,
        )
        .unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(predictability(&y, &acs).unwrap(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn degenerate_variance_is_rejected() {
        let acs = AutocovarianceSet::new(
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
            10,
        )
        .unwrap();
        let y = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            predictability(&y, &acs),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn portmanteau_white_noise_is_zero() {
        let acs = AutocovarianceSet::new(
            vec![DMatrix::identity(3, 3), DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)],
            50,
        )
        .unwrap();
        let y = DVector::from_vec(vec![0.3, -0.2, 0.9]);
        assert_eq!(portmanteau(&y, &acs, 2).unwrap(), 0.0);
    }

    #[test]
    fn portmanteau_scalar_fixture() {
        let acs = scalar_acs(1.0, 0.5);
        let y = DVector::from_element(1, 1.0);
        assert_relative_eq!(portmanteau(&y, &acs, 1).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn proxies_are_scale_invariant() {
        let acs = random_acs(5, 31);
        let mut rng = CounterRng::new(37);
        for _ in 0..20 {
            let y = DVector::from_fn(5, |_, _| rng.next_gaussian());
            let scale = 10.0_f64.powf(rng.next_f64() * 4.0 - 2.0)
                * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
            let ys = &y * scale;
            let lam = predictability(&y, &acs).unwrap();
            let lam_s = predictability(&ys, &acs).unwrap();
            assert!((lam - lam_s).abs() <= 1e-10 * lam.abs().max(1e-300));
            let phi = portmanteau(&y, &acs, 1).unwrap();
            let phi_s = portmanteau(&ys, &acs, 1).unwrap();
            assert!((phi - phi_s).abs() <= 1e-10 * phi.abs().max(1e-300));
        }
    }

    #[test]
    fn crossing_rate_fixtures() {
        assert_eq!(crossing_rate(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(crossing_rate(&[0.5, 1.5, 2.5, 0.1]).unwrap(), 0.0);
        // exact zeros count as crossings
        assert_eq!(crossing_rate(&[1.0, 0.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn crossing_rate_is_negation_invariant() {
        let mut rng = CounterRng::new(41);
        let series: Vec<f64> = (0..500).map(|_| rng.next_gaussian()).collect();
        let negated: Vec<f64> = series.iter().map(|x| -x).collect();
        assert_eq!(
            crossing_rate(&series).unwrap(),
            crossing_rate(&negated).unwrap()
        );
    }

    #[test]
    fn cosine_formula_fixtures() {
        assert_relative_eq!(cosine_crossing(0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(cosine_crossing(-0.5).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert!(cosine_crossing(0.9999).unwrap() < 0.01);
        assert!(cosine_crossing(1.0).is_err());
        assert!(cosine_crossing(-1.2).is_err());
    }

    #[test]
    fn crossing_rate_matches_cosine_formula_on_ar1() {
        let t_len = 100_000;
        for (i, &a) in [-0.6, 0.0, 0.6].iter().enumerate() {
            let series = gen_ar1(a, 1.0, 0.0, t_len, 100 + i as u64).unwrap();
            let mean = series.iter().sum::<f64>() / t_len as f64;
            let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
            let rate = crossing_rate(&centered).unwrap();
            let expected = cosine_crossing(a).unwrap();
            assert!(
                (rate - expected).abs() <= 0.01,
                "a={a}: rate {rate} vs {expected}"
            );
        }
    }

    #[test]
    fn fit_then_cosine_agrees_with_observed_crossings() {
        let series = gen_ar1(0.4, 1.0, 2.0, 100_000, 7).unwrap();
        let fit = fit_ar1(&series).unwrap();
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
        let rate = crossing_rate(&centered).unwrap();
        let predicted = cosine_crossing(fit.coeff).unwrap();
        assert!((rate - predicted).abs() <= 0.02);
    }

    #[test]
    fn fit_ar1_recovers_known_recursion() {
        // Strong signal, tiny innovation: the fit pins the coefficient.
        let series = gen_ar1(0.5, 0.001, 0.0, 50_000, 3).unwrap();
        let fit = fit_ar1(&series).unwrap();
        assert!((fit.coeff - 0.5).abs() <= 3.0 / (50_000f64).sqrt());
        assert_relative_eq!(fit.noise_sd, 0.001, max_relative = 0.05);
        assert!(fit.mean.abs() < 1e-3);
    }

    #[test]
    fn fit_ar1_on_iid_noise_is_near_zero() {
        let t_len = 40_000;
        let mut rng = CounterRng::new(13);
        let series: Vec<f64> = (0..t_len).map(|_| rng.next_gaussian()).collect();
        let fit = fit_ar1(&series).unwrap();
        assert!(fit.coeff.abs() <= 3.0 / (t_len as f64).sqrt());
    }

    #[test]
    fn fit_ar1_rejects_constant_series() {
        let series = vec![1.0; 100];
        assert!(matches!(fit_ar1(&series), Err(Error::ZeroVariance)));
    }

    #[test]
    fn fit_ar1_rejects_short_series() {
        let series = vec![1.0, 2.0, 3.0];
        assert!(matches!(fit_ar1(&series), Err(Error::SeriesTooShort { .. })));
    }
}
