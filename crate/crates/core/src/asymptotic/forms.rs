//! The asymptotic data of a direction: `U(v)`, `S(v)`, `D`, `H`, mean
//! curvature, determinant, rank.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::jacobi::{stable_limit, LimitOptions};
use crate::linalg;

/// Stable/unstable second fundamental forms and everything derived from them
/// at one tangent vector.
#[derive(Debug, Clone)]
pub struct AsymptoticData {
    pub u: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// `D = U - S` (positive semidefinite).
    pub d: DMatrix<f64>,
    /// `H = -(U + S)/2`.
    pub h_op: DMatrix<f64>,
    /// Mean curvature `h = tr U`.
    pub h: f64,
    pub det_d: f64,
    /// Smallest eigenvalue of `D`.
    pub rho_min: f64,
    /// `dim ker D + 1`, kernel read off below `eps_rank`.
    pub rank: usize,
    pub eps_rank: f64,
    /// Eigenvalue gap around the kernel threshold (smallest eigenvalue above
    /// it, when any).
    pub rank_gap: Option<f64>,
    pub r_used: f64,
    /// A-posteriori error estimate from the limit diagnostics.
    pub err_bound: f64,
    pub converged: bool,
    pub slow_convergence: bool,
    /// Positive-semidefiniteness defect of `D` (should be ~0).
    pub d_psd_defect: f64,
    /// Excess of the eigenvalues of `U` and `-S` over the `sqrt(R0)` band.
    pub band_defect: f64,
}

/// Compute `U(v)`, `S(v)` and derived data from the profile of `v`.
pub fn asymptotic_forms(profile: &CurvatureProfile, opts: &LimitOptions) -> Result<AsymptoticData> {
    let s_lim = stable_limit(profile, opts)?;
    let u_lim = stable_limit(&profile.reversed(), opts)?;
    let s = s_lim.matrix.clone();
    let u = -u_lim.matrix.clone();
    let d = &u - &s;
    let h_op = -(&u + &s) * 0.5;
    let h = u.trace();
    let det_d = d.determinant();
    let eig_d = linalg::sym_eigenvalues(&d);
    let rho_min = eig_d[0];
    let sqrt_r0 = profile.curvature_bound.sqrt();
    let eps_rank = 1e-5 * (1.0 + sqrt_r0);
    let kernel_dim = eig_d.iter().filter(|e| **e < eps_rank).count();
    let rank_gap = eig_d.iter().find(|e| **e >= eps_rank).copied();

    let band = sqrt_r0 + 1e-6;
    let mut band_defect = 0.0f64;
    for e in linalg::sym_eigenvalues(&u) {
        band_defect = band_defect.max((e.abs() - band).max(0.0));
    }
    for e in linalg::sym_eigenvalues(&(-&s)) {
        band_defect = band_defect.max((e.abs() - band).max(0.0));
    }

    Ok(AsymptoticData {
        u,
        s,
        d,
        h_op,
        h,
        det_d,
        rho_min,
        rank: kernel_dim + 1,
        eps_rank,
        rank_gap,
        r_used: s_lim.r_star.max(u_lim.r_star),
        err_bound: s_lim.cauchy.max(u_lim.cauchy),
        converged: s_lim.converged && u_lim.converged,
        slow_convergence: s_lim.slow_convergence || u_lim.slow_convergence,
        d_psd_defect: (-rho_min).max(0.0),
        band_defect,
    })
}

/// Mean-curvature statistics over a direction sample.
#[derive(Debug, Clone)]
pub struct HarmonicityReport {
    pub h_mean: f64,
    pub h_max_dev: f64,
    pub h_values: Vec<f64>,
    /// Verdict at the tolerance supplied to the check.
    pub asymptotically_harmonic: bool,
    pub any_unconverged: bool,
}

/// Check whether `tr U` is constant over the sampled directions.
pub fn check_asymptotic_harmonicity(
    profiles: &[CurvatureProfile],
    tol: f64,
    opts: &LimitOptions,
) -> Result<HarmonicityReport> {
    if profiles.len() < 16 {
        return Err(Error::precondition(format!(
            "harmonicity check needs at least 16 sampled directions, got {}",
            profiles.len()
        )));
    }
    let data: Vec<AsymptoticData> = profiles
        .par_iter()
        .map(|p| asymptotic_forms(p, opts))
        .collect::<Result<_>>()?;
    let h_values: Vec<f64> = data.iter().map(|d| d.h).collect();
    let h_mean = h_values.iter().sum::<f64>() / h_values.len() as f64;
    let h_max_dev = h_values.iter().map(|h| (h - h_mean).abs()).fold(0.0, f64::max);
    Ok(HarmonicityReport {
        h_mean,
        h_max_dev,
        h_values,
        asymptotically_harmonic: h_max_dev < tol,
        any_unconverged: data.iter().any(|d| !d.converged && !d.slow_convergence),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_curvature_forms() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let a = asymptotic_forms(&p, &LimitOptions::default()).unwrap();
        assert_relative_eq!(a.u[(0, 0)], 1.0, epsilon = 1e-8);
        assert_relative_eq!(a.s[(0, 0)], -1.0, epsilon = 1e-8);
        assert_relative_eq!(a.d[(0, 0)], 2.0, epsilon = 1e-8);
        assert!(a.h_op[(0, 0)].abs() < 1e-9);
        assert_relative_eq!(a.h, 1.0, epsilon = 1e-8);
        assert_relative_eq!(a.det_d, 2.0, epsilon = 1e-8);
        assert_eq!(a.rank, 1);
        assert!(a.converged);
        assert!(a.band_defect == 0.0);
    }

    #[test]
    fn flat_forms_have_full_kernel() {
        let p = CurvatureProfile::constant_diag(&[0.0, 0.0, 0.0]).unwrap();
        let a = asymptotic_forms(&p, &LimitOptions::default()).unwrap();
        assert!(a.d.norm() < 1e-9, "D = {}", a.d);
        assert_eq!(a.rank, 4); // = n
        assert!(a.det_d.abs() < 1e-12);
        assert!(a.h.abs() < 1e-9);
        assert!(a.slow_convergence);
    }

    #[test]
    fn rank_one_symmetric_forms() {
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0, -1.0]).unwrap();
        let a = asymptotic_forms(&p, &LimitOptions::default()).unwrap();
        assert_relative_eq!(a.h, 4.0, epsilon = 1e-8);
        assert_relative_eq!(a.det_d, 16.0, epsilon = 1e-7);
        assert_relative_eq!(a.rho_min, 2.0, epsilon = 1e-8);
        assert_eq!(a.rank, 1);
        // closed form D = 2 diag(sqrt|k_i|)
        assert_relative_eq!(a.d[(0, 0)], 4.0, epsilon = 1e-8);
        assert_relative_eq!(a.d[(1, 1)], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn harmonicity_of_homogeneous_sample() {
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0, -1.0]).unwrap();
        let profiles: Vec<_> = (0..16).map(|_| p.clone()).collect();
        let rep = check_asymptotic_harmonicity(&profiles, 1e-8, &LimitOptions::default()).unwrap();
        assert!(rep.asymptotically_harmonic);
        assert_relative_eq!(rep.h_mean, 4.0, epsilon = 1e-8);
        assert!(rep.h_max_dev < 1e-8);
    }

    #[test]
    fn harmonicity_requires_enough_samples() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let profiles: Vec<_> = (0..4).map(|_| p.clone()).collect();
        assert!(matches!(
            check_asymptotic_harmonicity(&profiles, 1e-8, &LimitOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
