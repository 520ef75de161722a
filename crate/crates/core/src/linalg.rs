//! Small dense-matrix helpers used throughout the crate.
//!
//! All matrices here are tiny (the normal space of a geodesic in our models
//! has dimension at most a few), so everything goes through explicit SVD or
//! symmetric eigendecompositions without performance concerns.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition-number ceiling for matrix inversion; beyond it the matrix is
/// treated as numerically singular.
pub const COND_LIMIT: f64 = 1e12;

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Smallest singular value.
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.min()
}

/// Maximum absolute entry of `m - m^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `(m + m^T) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)[0]
}

/// Inverse with an explicit condition-number check.
///
/// Returns the inverse together with the 2-norm condition number; condition
/// numbers above [`COND_LIMIT`] escalate to [`Error::SingularMatrix`].
pub fn try_invert(m: &DMatrix<f64>, context: &str) -> Result<(DMatrix<f64>, f64)> {
    let svd = m.clone().svd(true, true);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::SingularMatrix {
            cond,
            limit: COND_LIMIT,
            context: context.to_string(),
        });
    }
    let inv = svd
        .pseudo_inverse(0.0)
        .map_err(|e| Error::invalid(format!("{context}: {e}")))?;
    Ok((inv, cond))
}

/// Solve `m x = b` for small systems (LU with partial pivoting).
pub fn solve(m: &DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::SingularMatrix {
            cond: f64::INFINITY,
            limit: COND_LIMIT,
            context: context.to_string(),
        })
}

/// log(det m) for a matrix with positive determinant, accumulated as a sum of
/// log singular values so that large exponential growth stays representable.
pub fn log_abs_det(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.ln())
        .sum()
}

/// Volume of the Euclidean unit sphere S^{n-1} in R^n: 2 pi^{n/2} / Gamma(n/2).
pub fn unit_sphere_volume(n: usize) -> f64 {
    assert!(n >= 1, "sphere dimension must be positive");
    let half = 0.5 * n as f64;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(n)
}

// Gamma(n/2) for integer n >= 1 via the recursion Gamma(z+1) = z Gamma(z).
fn gamma_half_integer(n: usize) -> f64 {
    let mut z = 0.5 * n as f64;
    let mut acc = 1.0;
    while z > 1.0 + 1e-12 {
        z -= 1.0;
        acc *= z;
    }
    if (z - 0.5).abs() < 1e-12 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// Least-squares fit of `y ~ sum_k c_k basis_k(x)`; returns the coefficients.
pub fn least_squares_fit(
    xs: &[f64],
    ys: &[f64],
    basis: &[&dyn Fn(f64) -> f64],
) -> Result<Vec<f64>> {
    let n = xs.len();
    let k = basis.len();
    if n < k {
        return Err(Error::invalid(format!(
            "least squares needs at least {k} points, got {n}"
        )));
    }
    let a = DMatrix::from_fn(n, k, |i, j| basis[j](xs[i]));
    let b = DVector::from_column_slice(ys);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    let sol = solve(&ata, &atb, "least squares normal equations")?;
    Ok(sol.iter().copied().collect())
}

/// Slope of the ordinary least-squares line through `(xs, ys)`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let c = least_squares_fit(xs, ys, &[&|_| 1.0, &|x| x])?;
    Ok(c[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_volumes_match_closed_forms() {
        assert_relative_eq!(unit_sphere_volume(2), 2.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_volume(3), 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(
            unit_sphere_volume(4),
            2.0 * std::f64::consts::PI * std::f64::consts::PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn invert_reports_condition() {
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 0.5]));
        let (inv, cond) = try_invert(&m, "test").unwrap();
        assert_relative_eq!(inv[(0, 0)], 0.5);
        assert_relative_eq!(cond, 4.0, max_relative = 1e-12);

        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(try_invert(&sing, "test").is_err());
    }

    #[test]
    fn slope_recovers_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert_relative_eq!(ls_slope(&xs, &ys).unwrap(), 3.0, max_relative = 1e-12);
    }
}
