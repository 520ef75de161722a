//! Identities relating boundary data along the flow: the quotient identity
//! for shifted boundary derivatives, the two Wronskian product forms, the
//! inverse-integral form, and the boundary-tensor transformation rule.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg;
use crate::quad;

use super::boundary::{boundary_derivative_s, boundary_tensor_s_on, two_section_grid};
use super::limits::{stable_limit, unstable_tensor_path, LimitOptions};
use super::paths::JacobiOptions;

/// Residuals of the three flow identities at one time.
#[derive(Debug, Clone)]
pub struct IdentityEntry {
    pub t: f64,
    /// Quotient identity for the shifted boundary derivative.
    pub c1: f64,
    /// Worst of the two Wronskian product expressions.
    pub c2: f64,
    /// Inverse-integral expression with truncated tail.
    pub c3: f64,
}

#[derive(Debug, Clone)]
pub struct CentralIdentityReport {
    pub r: f64,
    pub t_tail: f64,
    pub entries: Vec<IdentityEntry>,
    pub max_c1: f64,
    pub max_c2: f64,
    pub max_c3: f64,
    /// Drift of the Wronskian of the unstable and boundary tensors.
    pub wronskian_drift: f64,
    /// Relative bound on the neglected integral tail.
    pub tail_bound_rel: f64,
}

/// Verify the three identities on `t_list` for the boundary problem of
/// radius `r`; the improper integral is truncated at `-t_tail`.
pub fn verify_central_identities(
    profile: &CurvatureProfile,
    r: f64,
    t_list: &[f64],
    t_tail: f64,
    lim: &LimitOptions,
) -> Result<CentralIdentityReport> {
    if t_list.is_empty() {
        return Err(Error::invalid("need at least one evaluation time"));
    }
    if t_list.iter().any(|t| *t <= 0.0 || *t >= r) {
        return Err(Error::precondition("identity times must satisfy 0 < t < r"));
    }
    if t_tail <= 0.0 {
        return Err(Error::invalid("tail truncation must be positive"));
    }
    let grid_h = 0.005;
    let snap = |t: f64| (t / grid_h).round() * grid_h;
    let t_list: Vec<f64> = t_list.iter().map(|t| snap(*t)).collect();
    let t_max = t_list.iter().fold(0.0f64, |a, b| a.max(*b));

    // boundary tensor path across the tail and up to r
    let grid = two_section_grid(-t_tail, r, grid_h);
    let jopts = JacobiOptions { ode: lim.ode.clone(), grid_h };
    let s_path = boundary_tensor_s_on(profile, r, &grid, &jopts)?;

    // unstable tensor path with U(v) = U_v'(0)
    let u_path = unstable_tensor_path(profile, 0.0, t_max, grid_h, lim)?;
    let u_form = u_path.deriv_at(0.0)?.clone();
    let s_prime_0 = s_path.deriv_at(0.0)?.clone();
    let d_r0 = &u_form - &s_prime_0;

    // cumulative integral of (S^T S)^{-1} from -t_tail up to the largest
    // requested time (the integrand blows up toward the vanishing end)
    let m = profile.normal_dim();
    let i_tail = s_path
        .index_of(-t_tail)
        .ok_or_else(|| Error::invalid("tail endpoint missing from grid"))?;
    let i_hi = s_path
        .index_of(t_max)
        .ok_or_else(|| Error::invalid("largest requested time missing from grid"))?;
    let integrand: Vec<DMatrix<f64>> = (i_tail..=i_hi)
        .map(|i| {
            let s = &s_path.values[i];
            linalg::try_invert(&(s.transpose() * s), "identity integrand").map(|(inv, _)| inv)
        })
        .collect::<Result<_>>()?;
    let cum = cumulative_matrix(&s_path.ts[i_tail..=i_hi], &integrand, m)?;

    // tail bound from the growth of the smallest singular value on the tail,
    // relative to the smallest integral actually used
    let tail_bound_rel = {
        let sqrt_r0 = profile.curvature_bound.sqrt().max(1e-3);
        let mut c_fit = f64::INFINITY;
        for i in i_tail..=i_hi {
            let u = s_path.ts[i];
            if u > -t_tail + 2.0 {
                break;
            }
            let smin = linalg::min_singular_value(&s_path.values[i]);
            c_fit = c_fit.min(smin * (-sqrt_r0 * u.abs()).exp());
        }
        let tail = m as f64 / (c_fit * c_fit * 2.0 * sqrt_r0) * (-2.0 * sqrt_r0 * t_tail).exp();
        let t_min = t_list.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        let idx_min = s_path.index_of(t_min).unwrap() - i_tail;
        tail / linalg::min_singular_value(&cum[idx_min]).max(1e-300)
    };

    let mut entries = Vec::new();
    for &t in &t_list {
        let s_t = s_path.value_at(t)?.clone();
        let sp_t = s_path.deriv_at(t)?.clone();
        let (s_t_inv, _) = linalg::try_invert(&s_t, "S(t) inverse (t too close to r)")?;

        // independent left sides on the shifted problem
        let lhs_c1 = boundary_derivative_s(&profile.shifted(t), r - t, &lim.ode)?;
        let u_shift = -stable_limit(&profile.shifted(t).reversed(), lim)?.matrix;
        let lhs_c2 = &u_shift - &lhs_c1;

        let rhs_c1 = &sp_t * &s_t_inv;
        let c1 = linalg::op_norm(&(&lhs_c1 - &rhs_c1)) / (1.0 + linalg::op_norm(&lhs_c1));

        let u_t = u_path.value_at(t)?.clone();
        let (u_t_inv, _) = linalg::try_invert(&u_t, "U(t) inverse")?;
        let rhs_a = u_t_inv.transpose() * &d_r0 * &s_t_inv;
        let rhs_b = s_t_inv.transpose() * &d_r0 * &u_t_inv;
        let scale = 1.0 + linalg::op_norm(&lhs_c2);
        let c2 = linalg::op_norm(&(&lhs_c2 - &rhs_a))
            .max(linalg::op_norm(&(&lhs_c2 - &rhs_b)))
            / scale;

        let idx = s_path.index_of(t).unwrap() - i_tail;
        let (cum_inv, _) = linalg::try_invert(&cum[idx], "inverse integral")?;
        let rhs_c3 = s_t_inv.transpose() * cum_inv * &s_t_inv;
        let c3 = linalg::op_norm(&(&lhs_c2 - &rhs_c3)) / scale;

        entries.push(IdentityEntry { t, c1, c2, c3 });
    }

    // Wronskian of U_v with S_{v,r} along [0, t_max]
    let wronskian_drift = super::paths::wronskian_drift(&u_path, &s_path)?;

    let max_c1 = entries.iter().map(|e| e.c1).fold(0.0, f64::max);
    let max_c2 = entries.iter().map(|e| e.c2).fold(0.0, f64::max);
    let max_c3 = entries.iter().map(|e| e.c3).fold(0.0, f64::max);
    Ok(CentralIdentityReport {
        r,
        t_tail,
        entries,
        max_c1,
        max_c2,
        max_c3,
        wronskian_drift,
        tail_bound_rel,
    })
}

// cumulative integral of matrix samples over a uniform-by-section grid
fn cumulative_matrix(ts: &[f64], vals: &[DMatrix<f64>], m: usize) -> Result<Vec<DMatrix<f64>>> {
    let mut out = vec![DMatrix::zeros(m, m); vals.len()];
    // split into maximal uniform sections and integrate each entrywise
    let mut start = 0;
    while start + 1 < ts.len() {
        let h = ts[start + 1] - ts[start];
        let mut end = start + 1;
        while end + 1 < ts.len() && ((ts[end + 1] - ts[end]) - h).abs() < 1e-9 * (1.0 + h) {
            end += 1;
        }
        for i in 0..m {
            for j in 0..m {
                let series: Vec<f64> = (start..=end).map(|k| vals[k][(i, j)]).collect();
                let cum = quad::cumulative_integral(h, &series);
                let base = out[start][(i, j)];
                for (k, c) in cum.iter().enumerate() {
                    out[start + k][(i, j)] = base + c;
                }
            }
        }
        start = end;
    }
    Ok(out)
}

/// Residual report for the boundary-tensor transformation rule.
#[derive(Debug, Clone)]
pub struct TransformReport {
    pub t: f64,
    pub x: f64,
    pub max_residual: f64,
}

/// Check `S_{phi^t v, x}(y) = S_{v, t+x}(y + t) S_{v, t+x}^{-1}(t)` over
/// `y` in `[0, x]`.
pub fn check_transform_identity(
    profile: &CurvatureProfile,
    t: f64,
    x: f64,
    lim: &LimitOptions,
) -> Result<TransformReport> {
    if t <= 0.0 || x <= 0.0 {
        return Err(Error::precondition("transform identity needs t > 0 and x > 0"));
    }
    let grid_h = 0.01;
    let jopts = JacobiOptions { ode: lim.ode.clone(), grid_h };

    let n_y = ((x / grid_h).ceil() as usize).max(2);
    let hy = x / n_y as f64;
    let y_grid: Vec<f64> = (0..=n_y).map(|i| i as f64 * hy).collect();
    let lhs = boundary_tensor_s_on(&profile.shifted(t), x, &y_grid, &jopts)?;

    // matching grid for the long problem: [0, t] plus t + y-grid
    let mut big_grid = crate::ode::uniform_grid(0.0, t, grid_h);
    big_grid.pop();
    big_grid.extend(y_grid.iter().map(|y| t + y));
    let big = boundary_tensor_s_on(profile, t + x, &big_grid, &jopts)?;
    let (s_t_inv, _) = linalg::try_invert(big.value_at(t)?, "transform base inverse")?;

    let mut max_residual = 0.0f64;
    for &y in &y_grid {
        let lhs_v = lhs.value_at(y)?;
        let rhs_v = big.value_at(t + y)? * &s_t_inv;
        let resid = linalg::op_norm(&(lhs_v - rhs_v)) / (1.0 + linalg::op_norm(lhs_v));
        max_residual = max_residual.max(resid);
    }
    Ok(TransformReport { t, x, max_residual })
}
