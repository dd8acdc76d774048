//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Orders up to this size use the dense symmetric eigensolver.
pub const DENSE_EIGEN_CAP: usize = 4096;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn max_abs_eigenvalue(m: &Matrix) -> f64 {
    sym_eigenvalues(m).into_iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0, |acc, &s| acc.max(s))
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest entry of `|m - mᵀ|`.
pub fn asymmetry(m: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs_entry(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `m^e` by repeated squaring.
pub fn mat_pow(m: &Matrix, mut e: u32) -> Matrix {
    let n = m.nrows();
    let mut result = Matrix::identity(n, n);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// PSD test by Cholesky of `m + shift·I`. Returns `false` for non-square input.
pub fn cholesky_psd(m: &Matrix, shift: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    Cholesky::new(m + Matrix::identity(n, n) * shift).is_some()
}

/// Spectral radius of a symmetric operator given by its action.
///
/// Plain power iteration; when `deflate` is given the iterate is kept
/// orthogonal to that (unit) vector. Returns `max |λ|` on the complement.
pub fn power_radius<F>(n: usize, apply: F, deflate: Option<&[f64]>, tol: f64, max_iter: usize) -> f64
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return 0.0;
    }
    let project = |x: &mut [f64]| {
        if let Some(d) = deflate {
            let dot: f64 = x.iter().zip(d).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(d).for_each(|(a, b)| *a -= dot * b);
        }
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
        norm
    };
    // Deterministic, generic starting vector.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * ((i as f64) * 1.618_033_988_75).sin()).collect();
    project(&mut x);
    if normalize(&mut x) == 0.0 {
        return 0.0;
    }
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        apply(&x, &mut y);
        project(&mut y);
        let norm = normalize(&mut y);
        if norm == 0.0 {
            return 0.0;
        }
        std::mem::swap(&mut x, &mut y);
        if (norm - estimate).abs() <= tol * norm.max(1e-300) {
            return norm;
        }
        estimate = norm;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_pow_matches_repeated_product() {
        let m = Matrix::from_row_slice(3, 3, &[0.5, 0.25, 0.25, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4]);
        let direct = &m * &m * &m * &m * &m;
        assert!((mat_pow(&m, 5) - direct).abs().max() < 1e-14);
        assert_eq!(mat_pow(&m, 0), Matrix::identity(3, 3));
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let n = 40;
        let m = Matrix::from_fn(n, n, |i, j| (((i * 7 + j * 7) % 11) as f64 - 5.0) / 10.0 + if i == j { 0.3 } else { 0.0 });
        let dense = max_abs_eigenvalue(&m);
        let power = power_radius(
            n,
            |x, y| {
                let v = &m * Vector::from_column_slice(x);
                y.copy_from_slice(v.as_slice());
            },
            None,
            1e-13,
            200_000,
        );
        assert!((dense - power).abs() < 1e-7 * dense, "{dense} vs {power}");
    }

    #[test]
    fn cholesky_psd_detects_indefinite() {
        let good = Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_psd(&good, 0.0));
        assert!(!cholesky_psd(&bad, 1e-12));
    }
}
