//! k-sparse extreme eigenvectors via truncated power iteration.
//!
//! Used to deflate relaxation solutions back to a weight vector and to
//! implement the sparse-PCA baseline. The iteration is
//! `y <- normalize(truncate_k(S y))`, where `truncate_k` keeps the k entries
//! of largest magnitude. The best of several initializations is returned:
//! the dense leading eigenvector truncated to k, plus deterministically
//! seeded random k-subsets.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{canonicalize_sign, quadratic_form, sorted_symmetric_eigen};
use crate::rng::CounterRng;
use crate::{Error, Result};

/// Default number of initializations tried by the estimators.
pub const DEFAULT_RESTARTS: usize = 20;

const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1_000;
const RESTART_SEED: u64 = 0x5EED_CAFE;

/// Keeps the k largest-magnitude entries, zeroing the rest. Magnitude ties
/// keep the lower index.
fn truncate_k(y: &DVector<f64>, k: usize) -> DVector<f64> {
    let n = y.len();
    if k >= n {
        return y.clone();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        y[b].abs()
            .partial_cmp(&y[a].abs())
            .expect("non-finite weight")
            .then(a.cmp(&b))
    });
    let mut out = DVector::zeros(n);
    for &i in order.iter().take(k) {
        out[i] = y[i];
    }
    out
}

fn support_of(y: &DVector<f64>) -> Vec<usize> {
    (0..y.len()).filter(|&i| y[i] != 0.0).collect()
}

fn power_iterate(s: &DMatrix<f64>, start: DVector<f64>, k: usize) -> DVector<f64> {
    let mut y = start;
    let norm = y.norm();
    if norm == 0.0 {
        return y;
    }
    y /= norm;
    for _ in 0..MAX_ITERATIONS {
        let mut next = truncate_k(&(s * &y), k);
        let norm = next.norm();
        if norm == 0.0 {
            // S y vanished (e.g. S = 0): the current iterate is already a
            // fixed point of the dynamics.
            break;
        }
        next /= norm;
        if next.dot(&y) < 0.0 {
            next = -next;
        }
        let displacement = (&next - &y).norm();
        y = next;
        if displacement < CONVERGENCE_TOL {
            break;
        }
    }
    y
}

/// k-sparse unit vector approximately maximizing y'Sy, best over `restarts`
/// initializations. The output has at most k nonzeros, exact unit norm, and
/// its first nonzero coordinate positive. Deterministic given (S, k,
/// restarts).
pub fn sparse_leading_eigvec(
    s: &DMatrix<f64>,
    k: usize,
    restarts: usize,
) -> Result<DVector<f64>> {
    let n = s.nrows();
    if s.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::SupportSizeOutOfRange { k, n });
    }

    let (_, vectors) = sorted_symmetric_eigen(s);
    let dense_leading = vectors.column(n - 1).into_owned();

    let mut starts = vec![truncate_k(&dense_leading, k)];
    let mut rng = CounterRng::new(RESTART_SEED).derive(n as u64).derive(k as u64);
    while starts.len() < restarts.max(1) {
        let mut indices: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut indices);
        let mut start = DVector::zeros(n);
        for &i in indices.iter().take(k) {
            start[i] = rng.next_gaussian();
        }
        starts.push(start);
    }

    let mut best: Option<(f64, Vec<usize>, DVector<f64>)> = None;
    for start in starts {
        if start.norm() == 0.0 {
            continue;
        }
        let candidate = power_iterate(s, start, k);
        if candidate.norm() == 0.0 {
            continue;
        }
        let rayleigh = quadratic_form(&candidate, s);
        let support = support_of(&candidate);
        let better = match &best {
            None => true,
            Some((best_rayleigh, best_support, _)) => {
                rayleigh > *best_rayleigh + 1e-12 * best_rayleigh.abs().max(1.0)
                    || ((rayleigh - best_rayleigh).abs()
                        <= 1e-12 * best_rayleigh.abs().max(1.0)
                        && support < *best_support)
            }
        };
        if better {
            best = Some((rayleigh, support, candidate));
        }
    }
    let (_, _, mut y) = best.ok_or_else(|| {
        Error::InvalidInput("sparse eigenvector iteration produced no candidate".into())
    })?;
    let norm = y.norm();
    y /= norm;
    canonicalize_sign(&mut y);
    Ok(y)
}

/// k-sparse unit vector approximately minimizing y'Sy, computed as the
/// sparse leading eigenvector of `lambda I - S` with
/// `lambda = lambda_max(S) + 1`.
pub fn sparse_smallest_eigvec(s: &DMatrix<f64>, k: usize) -> Result<DVector<f64>> {
    let n = s.nrows();
    if s.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if k < 1 || k > n {
        return Err(Error::SupportSizeOutOfRange { k, n });
    }
    let shift = crate::linalg::max_eigenvalue(s) + 1.0;
    let shifted = DMatrix::identity(n, n) * shift - s;
    sparse_leading_eigvec(&shifted, k, DEFAULT_RESTARTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use approx::assert_relative_eq;

    fn random_psd(n: usize, rng: &mut CounterRng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(2 * n, n, |_, _| rng.next_gaussian());
        g.transpose() * &g / (2 * n) as f64
    }

    /// Exact k-sparse optimum by support enumeration with dense eigensolves.
    fn brute_force_leading(s: &DMatrix<f64>, k: usize) -> f64 {
        let n = s.nrows();
        let mut best = f64::NEG_INFINITY;
        let mut support = vec![0usize; k];
        fn recurse(
            s: &DMatrix<f64>,
            support: &mut Vec<usize>,
            depth: usize,
            start: usize,
            n: usize,
            k: usize,
            best: &mut f64,
        ) {
            if depth == k {
                let sub = DMatrix::from_fn(k, k, |r, c| s[(support[r], support[c])]);
                let eig = sub.symmetric_eigen();
                let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if top > *best {
                    *best = top;
                }
                return;
            }
            for i in start..n {
                support[depth] = i;
                recurse(s, support, depth + 1, i + 1, n, k, best);
            }
        }
        recurse(s, &mut support, 0, 0, n, k, &mut best);
        best
    }

    #[test]
    fn full_support_matches_dense_eigenvector() {
        let mut rng = CounterRng::new(31);
        let s = random_psd(5, &mut rng);
        let y = sparse_leading_eigvec(&s, 5, 5).unwrap();
        let (values, vectors) = sorted_symmetric_eigen(&s);
        let mut dense = vectors.column(4).into_owned();
        canonicalize_sign(&mut dense);
        assert!((quadratic_form(&y, &s) - values[4]).abs() <= 1e-8);
        assert!((&y - dense).norm() <= 1e-6);
    }

    #[test]
    fn axis_aligned_optimum() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let y = sparse_leading_eigvec(&s, 1, 10).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-12);
        assert_eq!(y[1], 0.0);
        assert_eq!(y[2], 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = CounterRng::new(37);
        let mut hits = 0;
        let trials = 25;
        for _ in 0..trials {
            let s = random_psd(6, &mut rng);
            let y = sparse_leading_eigvec(&s, 2, DEFAULT_RESTARTS).unwrap();
            let achieved = quadratic_form(&y, &s);
            let optimal = brute_force_leading(&s, 2);
            assert!(achieved <= optimal + 1e-9, "rayleigh exceeded optimum");
            if (achieved - optimal).abs() <= 1e-8 {
                hits += 1;
            }
        }
        assert!(hits >= trials - 1, "{hits}/{trials} matched the oracle");
    }

    #[test]
    fn output_contract_holds() {
        let mut rng = CounterRng::new(41);
        for _ in 0..10 {
            let s = random_psd(7, &mut rng);
            let k = 1 + rng.next_below(7);
            let y = sparse_leading_eigvec(&s, k, DEFAULT_RESTARTS).unwrap();
            assert_eq!(y.norm(), 1.0);
            assert!(support_of(&y).len() <= k);
            let first = y.iter().find(|&&v| v != 0.0).copied().unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn beats_truncated_dense_baseline() {
        let mut rng = CounterRng::new(43);
        for _ in 0..10 {
            let s = random_psd(6, &mut rng);
            let k = 2 + rng.next_below(3);
            let y = sparse_leading_eigvec(&s, k, DEFAULT_RESTARTS).unwrap();
            let (_, vectors) = sorted_symmetric_eigen(&s);
            let mut baseline = truncate_k(&vectors.column(5).into_owned(), k);
            baseline /= baseline.norm();
            assert!(
                quadratic_form(&y, &s) >= quadratic_form(&baseline, &s) - 1e-12,
                "worse than truncation baseline"
            );
        }
    }

    #[test]
    fn deterministic_given_identical_inputs() {
        let mut rng = CounterRng::new(47);
        let s = random_psd(6, &mut rng);
        let a = sparse_leading_eigvec(&s, 3, DEFAULT_RESTARTS).unwrap();
        let b = sparse_leading_eigvec(&s, 3, DEFAULT_RESTARTS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn smallest_variants() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let y = sparse_smallest_eigvec(&s, 1).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-12);

        let mut rng = CounterRng::new(53);
        let s = random_psd(4, &mut rng);
        let y = sparse_smallest_eigvec(&s, 4).unwrap();
        let (values, vectors) = sorted_symmetric_eigen(&s);
        let mut dense = vectors.column(0).into_owned();
        canonicalize_sign(&mut dense);
        assert!((quadratic_form(&y, &s) - values[0]).abs() <= 1e-8);
        assert!((&y - dense).norm() <= 1e-5);
    }

    #[test]
    fn smallest_matches_brute_force() {
        let mut rng = CounterRng::new(59);
        let mut hits = 0;
        let trials = 15;
        for _ in 0..trials {
            let s = random_psd(6, &mut rng);
            let y = sparse_smallest_eigvec(&s, 2).unwrap();
            let achieved = quadratic_form(&y, &s);
            // brute-force the minimum Rayleigh quotient over supports
            let shift = crate::linalg::max_eigenvalue(&s) + 1.0;
            let shifted = DMatrix::identity(6, 6) * shift - &s;
            let optimal = shift - brute_force_leading(&shifted, 2);
            assert!(achieved >= optimal - 1e-9);
            if (achieved - optimal).abs() <= 1e-8 {
                hits += 1;
            }
        }
        assert!(hits >= trials - 1, "{hits}/{trials}");
    }

    #[test]
    fn rejects_bad_support_sizes() {
        let s = DMatrix::identity(3, 3);
        assert!(matches!(
            sparse_leading_eigvec(&s, 0, 5),
            Err(Error::SupportSizeOutOfRange { .. })
        ));
        assert!(matches!(
            sparse_leading_eigvec(&s, 4, 5),
            Err(Error::SupportSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_matrix_returns_a_valid_vector() {
        let s = DMatrix::zeros(4, 4);
        let y = sparse_leading_eigvec(&s, 2, 5).unwrap();
        assert_relative_eq!(y.norm(), 1.0, epsilon = 1e-12);
        assert!(support_of(&y).len() <= 2);
    }
}
