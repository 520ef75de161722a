//! Ratio bounds linking volume growth to horosphere data: the sphere-volume
//! lower bound, horoball slab volumes, the bounded-asymptote estimates and
//! rank detection from determinant decay.

use rayon::prelude::*;

use crate::asymptotic::{asymptotic_forms, BusemannRay};
use crate::error::{Error, Result};
use crate::geometry::{surface_distance, ConformalSurface, CurvatureProfile, Point};
use crate::jacobi::{boundary_derivative_s, stable_limit, stable_tensor_path, unstable_tensor_path, LimitOptions};
use crate::linalg;
use crate::model::Model;
use crate::quad;

use super::volume::volume_curve;

/// The two expressions for `vol S_r / e^{hr}` per radius.
#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    pub h: f64,
    /// `(r, direct ratio, determinant-integral form, relative gap)`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// Monotone-increase defect of the direct ratio (should be ~0).
    pub monotonicity_defect: f64,
    /// Lower bound constant: the smallest ratio over the table.
    pub c1_low: f64,
    /// Whether the mean-curvature hypothesis was satisfied on a sample.
    pub ah_satisfied: bool,
}

/// Verify `vol S_r / e^{hr} = int 1/det(U(v) - S_{v,r}'(0)) dtheta` and its
/// monotone lower bound.
pub fn lower_bound_ratio(
    model: &Model,
    r_list: &[f64],
    n_angles: usize,
    lim: &LimitOptions,
) -> Result<LowerBoundReport> {
    if r_list.is_empty() || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("radii must be ascending"));
    }
    let curve = volume_curve(model, None, r_list, n_angles)?;
    match model {
        Model::Homogeneous { profile } => {
            let forms = asymptotic_forms(profile, lim)?;
            let h = forms.h;
            let omega = linalg::unit_sphere_volume(profile.dim_manifold());
            let mut rows = Vec::new();
            for (i, &r) in r_list.iter().enumerate() {
                let direct = (curve.log_sphere[i] - h * r).exp();
                let w_r = boundary_derivative_s(profile, r, &lim.ode)?;
                let det = (&forms.u - &w_r).determinant();
                let integral = omega / det;
                let gap = (direct - integral).abs() / direct.max(1e-300);
                rows.push((r, direct, integral, gap));
            }
            finish_lower_bound(h, rows, true)
        }
        Model::Surface { surface: _, base, .. } => {
            // mean-curvature hypothesis on a small sample
            let sample = model.direction_profiles(16)?;
            let hs: Vec<f64> = sample
                .par_iter()
                .map(|p| asymptotic_forms(p, lim).map(|f| f.h))
                .collect::<Result<_>>()?;
            let h_mean = hs.iter().sum::<f64>() / hs.len() as f64;
            let ah = hs.iter().all(|h| (h - h_mean).abs() < 0.01);

            let n = n_angles.max(8);
            let r_max = *r_list.last().unwrap();
            let profiles = model.angular_profiles(*base, n, r_max + 1.0)?;
            let per_angle: Vec<(Vec<f64>, f64)> = profiles
                .par_iter()
                .map(|p| {
                    let forms = asymptotic_forms(p, lim)?;
                    let mut dets = Vec::with_capacity(r_list.len());
                    for &r in r_list {
                        let w_r = boundary_derivative_s(p, r, &lim.ode)?;
                        dets.push((&forms.u - &w_r).determinant());
                    }
                    Ok((dets, forms.h))
                })
                .collect::<Result<_>>()?;
            let mut rows = Vec::new();
            for (i, &r) in r_list.iter().enumerate() {
                let direct = (curve.log_sphere[i] - h_mean * r).exp();
                let vals: Vec<f64> = per_angle.iter().map(|(d, _)| 1.0 / d[i]).collect();
                let integral = quad::periodic_trapezoid(2.0 * std::f64::consts::PI, &vals);
                let gap = (direct - integral).abs() / direct.max(1e-300);
                rows.push((r, direct, integral, gap));
            }
            finish_lower_bound(h_mean, rows, ah)
        }
        Model::TimeVarying { .. } => {
            Err(Error::invalid("volume ratios need a homogeneous or surface model"))
        }
    }
}

fn finish_lower_bound(
    h: f64,
    rows: Vec<(f64, f64, f64, f64)>,
    ah: bool,
) -> Result<LowerBoundReport> {
    let mut monotonicity_defect = 0.0f64;
    for w in rows.windows(2) {
        monotonicity_defect = monotonicity_defect.max(w[0].1 - w[1].1);
    }
    let c1_low = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(LowerBoundReport { h, rows, monotonicity_defect, c1_low, ah_satisfied: ah })
}

/// Horocycle arc length within distance `rho` of the footpoint, by marching
/// along the horocycle on both sides.
pub fn horocycle_patch_length(
    surface: &std::sync::Arc<ConformalSurface>,
    p: Point,
    theta: f64,
    rho: f64,
) -> Result<f64> {
    if rho <= 0.0 {
        return Err(Error::invalid("patch radius must be positive"));
    }
    let ray = BusemannRay::new(surface.clone(), p, theta, 20.0)?;
    let step = 0.05f64.min(rho / 10.0);
    let mut total = 0.0;
    for side in [1.0, -1.0] {
        let mut q = p;
        let mut acc = 0.0;
        loop {
            let g = ray.minus_gradient(&q)?;
            // horocycle tangent: the inward normal rotated a quarter turn
            let tangent_angle = (side * g.0).atan2(-side * g.1);
            let (mut q_next, _) = crate::geometry::flow(surface, q, tangent_angle, step, 1e-11)?;
            // project back onto the horosphere
            for _ in 0..4 {
                let b = ray.value(&q_next)?;
                if b.abs() < 1e-9 {
                    break;
                }
                let gn = ray.minus_gradient(&q_next)?;
                let dir = gn.1.atan2(gn.0);
                (q_next, _) = crate::geometry::flow(surface, q_next, dir, b, 1e-11)?;
            }
            let seg = surface_distance(surface, q, q_next, 1e-10)?;
            let d = surface_distance(surface, p, q_next, 1e-10)?;
            if d > rho {
                let d_prev = surface_distance(surface, p, q, 1e-10)?;
                let frac = ((rho - d_prev) / (d - d_prev)).clamp(0.0, 1.0);
                acc += seg * frac;
                break;
            }
            acc += seg;
            q = q_next;
            if acc > 100.0 {
                return Err(Error::QuadratureFailure("horocycle march did not close".into()));
            }
        }
        total += acc;
    }
    Ok(total)
}

/// `vol0 * int_{-rho/2}^{r} e^{hs} ds`: the slab volume over a horosphere
/// patch of induced volume `vol0`.
pub fn horoball_slab_volume(h: f64, vol0: f64, rho: f64, r: f64) -> Result<f64> {
    if rho <= 0.0 || vol0 < 0.0 {
        return Err(Error::invalid("need rho > 0 and vol0 >= 0"));
    }
    if r < -rho / 2.0 {
        return Err(Error::invalid("slab interval is empty"));
    }
    let integral = if h.abs() > 1e-14 {
        ((h * r).exp() - (-h * rho / 2.0).exp()) / h
    } else {
        r + rho / 2.0
    };
    Ok(vol0 * integral)
}

/// Patch volume for models that provide one: constant-curvature surfaces in
/// closed form, general surfaces by horocycle marching.
pub fn model_patch_volume(model: &Model, rho: f64) -> Result<f64> {
    match model {
        Model::Homogeneous { profile } => {
            let eigs = profile
                .diag_eigenvalues()
                .ok_or_else(|| Error::invalid("homogeneous model without diagonal data"))?;
            if eigs.len() == 1 && eigs[0] < 0.0 {
                let kappa = eigs[0].abs().sqrt();
                Ok(4.0 / kappa * (kappa * rho / 2.0).sinh())
            } else {
                Err(Error::precondition(
                    "horosphere patch volumes are only constructive for constant-curvature surfaces",
                ))
            }
        }
        Model::Surface { surface, base, base_angle } => {
            horocycle_patch_length(surface, *base, *base_angle, rho)
        }
        Model::TimeVarying { .. } => {
            Err(Error::precondition("horoball slabs need geometric models"))
        }
    }
}

/// Bounded-asymptote diagnostics.
#[derive(Debug, Clone)]
pub struct BoundedAsymptoteReport {
    /// Empirical `A = sup |S_v(t)|` over the sample and `t` in `[0, T]`.
    pub a_emp: f64,
    /// `inf_t |U_v(t)|` over the sample; must be at least `1/A`.
    pub u_norm_min: f64,
    pub reciprocal_ok: bool,
    /// `(r, vol S_r / e^{hr}, omega A^{2n-2} r^{n-1})` rows (when the model
    /// carries volumes).
    pub volume_rows: Vec<(f64, f64, f64)>,
    pub volume_bound_ok: bool,
    pub h: f64,
}

/// Check the bounded-asymptote constant and the polynomial sphere-volume
/// bound it implies.
pub fn bounded_asymptote_check(
    model: &Model,
    n_dirs: usize,
    t_max: f64,
    r_max: f64,
    lim: &LimitOptions,
) -> Result<BoundedAsymptoteReport> {
    let profiles = model.direction_profiles(n_dirs.max(1))?;
    let grid_h = 0.1;
    let mut a_emp = 0.0f64;
    let mut u_norm_min = f64::INFINITY;
    for p in &profiles {
        let s = stable_tensor_path(p, t_max, grid_h, lim)?;
        for v in &s.values {
            a_emp = a_emp.max(linalg::op_norm(v));
        }
        let u = unstable_tensor_path(p, 0.0, t_max, grid_h, lim)?;
        for v in &u.values {
            u_norm_min = u_norm_min.min(linalg::op_norm(v));
        }
    }
    let reciprocal_ok = u_norm_min >= 1.0 / a_emp - 1e-6;

    let (h, volume_rows, volume_bound_ok) = match model {
        Model::TimeVarying { profile } => {
            (asymptotic_forms(profile, lim)?.h, Vec::new(), true)
        }
        _ => {
            let forms = asymptotic_forms(&model.profile()?, lim)?;
            let h = forms.h;
            let n = model.dim();
            let omega = linalg::unit_sphere_volume(n);
            let radii: Vec<f64> = (1..=(r_max.floor() as usize)).map(|i| i as f64).collect();
            let curve = volume_curve(model, None, &radii, 32)?;
            let mut rows = Vec::new();
            let mut ok = true;
            for (i, &r) in radii.iter().enumerate() {
                let ratio = (curve.log_sphere[i] - h * r).exp();
                let bound = omega * a_emp.powi(2 * n as i32 - 2) * r.powi(n as i32 - 1);
                ok &= ratio <= bound * (1.0 + 1e-9);
                rows.push((r, ratio, bound));
            }
            (h, rows, ok)
        }
    };
    Ok(BoundedAsymptoteReport { a_emp, u_norm_min, reciprocal_ok, volume_rows, volume_bound_ok, h })
}

/// Verdict of the rank detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankVerdict {
    RankOne,
    Degenerate,
    Indeterminate,
}

/// Rank detection from the stability of `min_v det(U(v) - S_{v,r}'(0))`
/// under radius doubling.
#[derive(Debug, Clone)]
pub struct RankGrowthReport {
    /// `(r, min determinant)` rows.
    pub rows: Vec<(f64, f64)>,
    /// Ratio of the last two rows.
    pub final_ratio: f64,
    pub verdict: RankVerdict,
}

/// Detect rank one from determinant stability under radius doubling.
pub fn rank_detection_from_growth(
    model: &Model,
    r_list: &[f64],
    n_dirs: usize,
    lim: &LimitOptions,
) -> Result<RankGrowthReport> {
    if r_list.len() < 2 || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("need at least two ascending radii"));
    }
    let profiles = match model {
        Model::Homogeneous { profile } => vec![profile.clone()],
        _ => model.direction_profiles(n_dirs.max(1))?,
    };
    let forms: Vec<_> = profiles
        .iter()
        .map(|p| stable_limit(&p.reversed(), lim).map(|l| (-l.matrix, p.clone())))
        .collect::<Result<Vec<(_, CurvatureProfile)>>>()?;
    let mut rows = Vec::new();
    for &r in r_list {
        let mut dmin = f64::INFINITY;
        for (u, p) in &forms {
            let w_r = boundary_derivative_s(p, r, &lim.ode)?;
            dmin = dmin.min((u - &w_r).determinant());
        }
        rows.push((r, dmin));
    }
    let last = rows[rows.len() - 1].1;
    let prev = rows[rows.len() - 2].1;
    let final_ratio = last / prev;
    let verdict = if final_ratio >= 0.9 && last > 1e-8 {
        RankVerdict::RankOne
    } else if final_ratio <= 0.6 {
        RankVerdict::Degenerate
    } else {
        RankVerdict::Indeterminate
    };
    Ok(RankGrowthReport { rows, final_ratio, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn model(eigs: &[f64]) -> Model {
        Model::from_spec(&ModelSpec::ConstantDiag { eigenvalues: eigs.to_vec() }).unwrap()
    }

    #[test]
    fn lower_bound_two_routes_agree() {
        let m = model(&[-1.0]);
        let rep =
            lower_bound_ratio(&m, &[1.0, 2.0, 4.0, 8.0], 0, &LimitOptions::default()).unwrap();
        assert!(rep.ah_satisfied);
        for (r, direct, integral, gap) in &rep.rows {
            // direct ratio is 2 pi sinh(r) e^{-r} = pi (1 - e^{-2r})
            assert_relative_eq!(*direct, PI * (1.0 - (-2.0 * r).exp()), max_relative = 1e-6);
            assert!(*gap < 1e-6, "gap {gap} at r = {r}");
            let _ = integral;
        }
        assert!(rep.monotonicity_defect < 1e-9);
        // the large-r integrand tends to omega / det D = 2 pi / 2
        let last = rep.rows.last().unwrap();
        assert_relative_eq!(last.2, PI, max_relative = 1e-5);
    }

    #[test]
    fn flat_ratio_grows_linearly() {
        let m = model(&[0.0]);
        let rep = lower_bound_ratio(&m, &[2.0, 4.0, 8.0], 0, &LimitOptions::default()).unwrap();
        // h = 0: ratio = vol S_r = 2 pi r; integrand det = 1/r per direction
        for (r, direct, integral, gap) in &rep.rows {
            assert_relative_eq!(*direct, 2.0 * PI * r, max_relative = 1e-8);
            assert_relative_eq!(*integral, 2.0 * PI * r, max_relative = 1e-8);
            assert!(*gap < 1e-8);
        }
    }

    #[test]
    fn slab_volume_formula() {
        // constant-curvature surface: arc length 4 sinh(rho/2), h = 1
        let m = model(&[-1.0]);
        let vol0 = model_patch_volume(&m, 2.0).unwrap();
        assert_relative_eq!(vol0, 4.0 * 1f64.sinh(), max_relative = 1e-12);
        let v = horoball_slab_volume(1.0, vol0, 2.0, 3.0).unwrap();
        assert_relative_eq!(v, vol0 * (3f64.exp() - (-1f64).exp()), max_relative = 1e-12);
        // empty interval and linearity
        assert_eq!(horoball_slab_volume(1.0, vol0, 2.0, -1.0).unwrap(), 0.0);
        let v2 = horoball_slab_volume(1.0, 2.0 * vol0, 2.0, 3.0).unwrap();
        assert_relative_eq!(v2, 2.0 * v, max_relative = 1e-14);
        // no constructive patch for higher-dimensional diagonal models
        assert!(model_patch_volume(&model(&[-4.0, -1.0, -1.0]), 2.0).is_err());
    }

    #[test]
    fn horocycle_patch_on_half_plane() {
        // arc of {y = 1} within distance rho of (0, 1) has length 4 sinh(rho/2)
        let s = std::sync::Arc::new(ConformalSurface::upper_half_plane());
        let len =
            horocycle_patch_length(&s, Point::new(0.0, 1.0), std::f64::consts::FRAC_PI_2, 2.0)
                .unwrap();
        assert_relative_eq!(len, 4.0 * 1f64.sinh(), max_relative = 2e-3);
    }

    #[test]
    fn bounded_asymptote_hyperbolic() {
        let m = model(&[-1.0]);
        let rep = bounded_asymptote_check(&m, 1, 10.0, 10.0, &LimitOptions::default()).unwrap();
        // S_v(t) = e^{-t}: A = 1 at t = 0; U_v(t) = e^{t} >= 1
        assert_relative_eq!(rep.a_emp, 1.0, epsilon = 1e-8);
        assert!(rep.reciprocal_ok);
        assert!(rep.volume_bound_ok);
        // flat control: S_v = 1 identically
        let rep = bounded_asymptote_check(&model(&[0.0]), 1, 10.0, 5.0, &LimitOptions::default())
            .unwrap();
        assert_relative_eq!(rep.a_emp, 1.0, epsilon = 1e-7);
        assert!(rep.reciprocal_ok);
    }

    #[test]
    fn rank_detection_verdicts() {
        let lim = LimitOptions::default();
        let rep =
            rank_detection_from_growth(&model(&[-1.0]), &[4.0, 8.0, 16.0], 1, &lim).unwrap();
        assert_eq!(rep.verdict, RankVerdict::RankOne);
        assert!((rep.rows.last().unwrap().1 - 2.0).abs() < 1e-6);

        let rep = rank_detection_from_growth(&model(&[0.0]), &[4.0, 8.0, 16.0], 1, &lim).unwrap();
        assert_eq!(rep.verdict, RankVerdict::Degenerate);
        // min det = 1/r exactly in the flat case
        for (r, d) in &rep.rows {
            assert_relative_eq!(*d, 1.0 / r, epsilon = 1e-10);
        }

        let rep = rank_detection_from_growth(
            &model(&[-4.0, -1.0, -1.0]),
            &[4.0, 8.0, 16.0],
            1,
            &lim,
        )
        .unwrap();
        assert_eq!(rep.verdict, RankVerdict::RankOne);
        assert!((rep.rows.last().unwrap().1 - 16.0).abs() < 1e-5);
    }
}
