//! Dense symmetric linear-algebra helpers shared across the crate.
//!
//! Problem sizes here are small (n <= ~50 assets, pools <= 12), so every
//! routine goes through a full symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Symmetric part (M + M')/2.
pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending. Ties keep the decomposition's original order, which makes
/// degenerate-spectrum picks deterministic.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("non-finite eigenvalue")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Ridge added to A0 before inversion: 1e-8 * trace(A0) / n.
pub fn ridge_delta(a0: &DMatrix<f64>) -> f64 {
    1e-8 * a0.trace() / a0.nrows() as f64
}

/// Inverse of A0 + delta*I via eigendecomposition, with the crate's standard
/// ridge. Fails if the ridged matrix is still numerically singular.
pub fn ridged_inverse(a0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral_map(a0, ridge_delta(a0), |v| 1.0 / v)
}

/// Inverse square root of A0 + delta*I, same ridge policy as
/// [`ridged_inverse`].
pub fn ridged_inv_sqrt(a0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral_map(a0, ridge_delta(a0), |v| 1.0 / v.sqrt())
}

fn spectral_map(
    a0: &DMatrix<f64>,
    delta: f64,
    f: impl Fn(f64) -> f64,
) -> Result<DMatrix<f64>> {
    let (values, vectors) = sorted_symmetric_eigen(a0);
    let floor = 1e-300;
    if values[0] + delta <= floor {
        return Err(Error::DegenerateCovariance {
            min_eig: values[0],
            threshold: -delta,
        });
    }
    let mapped = DVector::from_iterator(values.len(), values.iter().map(|&v| f(v + delta)));
    Ok(&vectors * DMatrix::from_diagonal(&mapped) * vectors.transpose())
}

/// Quadratic form y'My.
pub fn quadratic_form(y: &DVector<f64>, m: &DMatrix<f64>) -> f64 {
    (m * y).dot(y)
}

/// Flips the vector's sign so its first nonzero coordinate is positive.
pub fn canonicalize_sign(y: &mut DVector<f64>) {
    for &v in y.iter() {
        if v != 0.0 {
            if v < 0.0 {
                *y = -&*y;
            }
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sorted_eigen_is_ascending_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0]);
        let (values, vectors) = sorted_symmetric_eigen(&m);
        assert!(values[0] <= values[1] && values[1] <= values[2]);
        let rebuilt = &vectors * DMatrix::from_diagonal(&values) * vectors.transpose();
        assert_relative_eq!(rebuilt, m, epsilon = 1e-12);
    }

    #[test]
    fn ridged_inverse_matches_direct_inverse_on_well_conditioned_input() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let inv = ridged_inverse(&m).unwrap();
        let prod = &m * &inv;
        assert_relative_eq!(prod, DMatrix::identity(2, 2), epsilon = 1e-6);
    }

    #[test]
    fn ridged_inverse_rejects_zero_matrix() {
        let m = DMatrix::zeros(3, 3);
        assert!(ridged_inverse(&m).is_err());
    }

    #[test]
    fn sign_canonicalization_uses_first_nonzero() {
        let mut y = DVector::from_vec(vec![0.0, -0.4, 0.6]);
        canonicalize_sign(&mut y);
        assert_eq!(y[1], 0.4);
        assert_eq!(y[2], -0.6);
    }
}
