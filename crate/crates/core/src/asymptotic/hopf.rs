//! The variation formula for boundary second fundamental forms along a
//! stable curve, and the Lipschitz estimate it implies.
//!
//! On a surface the normal bundle of a geodesic is one-dimensional, so the
//! frame `e(s, t)` (parallel within the horocycle, then parallel along each
//! geodesic) reduces to a consistent choice of unit normal: the 90-degree
//! rotation of the velocity, which is itself parallel. Frame bookkeeping is
//! therefore a single sign convention, fixed here by rotating `gamma(s)`
//! counterclockwise.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{surface_geodesic, ConformalSurface, CurvatureProfile, GeodesicPath};
use crate::jacobi::{
    boundary_tensor_s_on, stable_tensor_path, JacobiOptions, LimitOptions,
};
use crate::quad;

use super::constants::c5_constant;
use super::curve::StableCurve;
use super::forms::asymptotic_forms;

/// Two sides of the variation formula with diagnostics.
#[derive(Debug, Clone)]
pub struct HopfReport {
    /// Direct difference of boundary derivatives at the curve ends.
    pub lhs: f64,
    /// Double integral of `S^* (d_s R) S` over the `(s, t)` grid.
    pub rhs: f64,
    pub residual_rel: f64,
    pub n_s: usize,
    pub n_t: usize,
    pub arc_length: f64,
    /// Max relative deviation of the closed-form `d_s R` against a finite
    /// difference across neighbouring geodesics.
    pub ds_r_cross_dev: f64,
    /// Max `|d_s R| / |beta'|` over the grid, over the assembled component
    /// bound (at most ~1 when the envelope holds).
    pub ds_r_bound_ratio: f64,
}

struct SampleData {
    profile: CurvatureProfile,
    path: Arc<GeodesicPath>,
    /// Boundary tensor values on the t-grid.
    s_vals: Vec<f64>,
    s_prime_0: f64,
    /// Stable tensor values on the t-grid (variation field propagator).
    stable_vals: Vec<f64>,
}

fn geodesic_extent(r: f64) -> f64 {
    r + 18.0
}

fn build_sample(
    surface: &Arc<ConformalSurface>,
    curve: &StableCurve,
    j: usize,
    t_grid: &[f64],
    r: f64,
    lim: &LimitOptions,
) -> Result<SampleData> {
    let (path, profile) = surface_geodesic(
        surface,
        curve.footpoints[j],
        curve.thetas[j],
        geodesic_extent(r),
        1e-11,
    )?;
    let jopts = JacobiOptions { ode: lim.ode.clone(), grid_h: t_grid[1] - t_grid[0] };
    let s_path = boundary_tensor_s_on(&profile, r, t_grid, &jopts)?;
    let stable = stable_tensor_path(&profile, r, t_grid[1] - t_grid[0], lim)?;
    let s_vals = t_grid.iter().map(|t| Ok(s_path.value_at(*t)?[(0, 0)])).collect::<Result<_>>()?;
    let stable_vals =
        t_grid.iter().map(|t| Ok(stable.value_at(*t)?[(0, 0)])).collect::<Result<_>>()?;
    Ok(SampleData {
        profile,
        path,
        s_vals,
        s_prime_0: s_path.deriv_at(0.0)?[(0, 0)],
        stable_vals,
    })
}

/// Verify the variation formula on every `stride`-th sample of the curve
/// with an `n_t`-panel quadrature in `t`.
pub fn verify_hopf_formula(
    surface: &Arc<ConformalSurface>,
    curve: &StableCurve,
    r: f64,
    stride: usize,
    n_t: usize,
    lim: &LimitOptions,
) -> Result<HopfReport> {
    if r <= 1.0 {
        return Err(Error::precondition("variation formula verification needs r > 1"));
    }
    let n_total = curve.len();
    if stride == 0 || !(n_total - 1).is_multiple_of(stride) {
        return Err(Error::invalid("stride must divide the curve segment count"));
    }
    let n_t = if n_t.is_multiple_of(2) { n_t.max(4) } else { n_t + 1 };
    let h_t = r / n_t as f64;
    let t_grid: Vec<f64> = (0..=n_t).map(|i| i as f64 * h_t).collect();
    let idx: Vec<usize> = (0..n_total).step_by(stride).collect();
    let n_s = idx.len() - 1;

    let samples: Vec<SampleData> = idx
        .par_iter()
        .map(|j| build_sample(surface, curve, *j, &t_grid, r, lim))
        .collect::<Result<_>>()?;

    // transversal derivative of the footpoint curve at the active samples
    let ds = stride as f64 / (n_total - 1) as f64;
    let beta_prime = |k: usize| -> (f64, f64) {
        let pts = &curve.footpoints;
        if k == 0 {
            let a = pts[idx[0]];
            let b = pts[idx[1]];
            let c = pts[idx[2.min(idx.len() - 1)]];
            ((-3.0 * a.x + 4.0 * b.x - c.x) / (2.0 * ds), (-3.0 * a.y + 4.0 * b.y - c.y) / (2.0 * ds))
        } else if k == idx.len() - 1 {
            let a = pts[idx[k]];
            let b = pts[idx[k - 1]];
            let c = pts[idx[k - 2.min(k)]];
            ((3.0 * a.x - 4.0 * b.x + c.x) / (2.0 * ds), (3.0 * a.y - 4.0 * b.y + c.y) / (2.0 * ds))
        } else {
            let a = pts[idx[k + 1]];
            let b = pts[idx[k - 1]];
            ((a.x - b.x) / (2.0 * ds), (a.y - b.y) / (2.0 * ds))
        }
    };

    let mut per_s = Vec::with_capacity(idx.len());
    let mut ds_r_abs_max = 0.0f64;
    let mut beta_prime_min = f64::INFINITY;
    let mut ds_r_tables: Vec<Vec<f64>> = Vec::with_capacity(idx.len());
    for (k, sample) in samples.iter().enumerate() {
        let bp = beta_prime(k);
        let q = curve.footpoints[idx[k]];
        let gamma = curve.directions[idx[k]];
        // frame normal at s: rotate gamma by +90 degrees; j(0) is the metric
        // inner product of beta' with it
        let e0 = (-gamma.1, gamma.0);
        let j0 = surface.metric_inner(&q, bp, e0);
        beta_prime_min = beta_prime_min.min(surface.metric_norm(&q, bp));

        let mut integrand = Vec::with_capacity(t_grid.len());
        let mut ds_r_row = Vec::with_capacity(t_grid.len());
        for (i, t) in t_grid.iter().enumerate() {
            let pt = sample.path.point(*t);
            let vel = sample.path.velocity(*t);
            let e_t = (-vel.1, vel.0);
            let jacobi_field = sample.stable_vals[i] * j0;
            let ds_r = surface.curvature_directional(&pt, e_t) * jacobi_field;
            ds_r_abs_max = ds_r_abs_max.max(ds_r.abs() / surface.metric_norm(&q, bp).max(1e-300));
            ds_r_row.push(ds_r);
            integrand.push(sample.s_vals[i] * ds_r * sample.s_vals[i]);
        }
        ds_r_tables.push(ds_r_row);
        per_s.push(quad::simpson_samples(h_t, &integrand)?);
    }

    let rhs = quad::trapezoid_samples(1.0 / n_s as f64, &per_s);
    let lhs = samples.last().unwrap().s_prime_0 - samples[0].s_prime_0;
    let residual_rel = (lhs - rhs).abs() / lhs.abs().max(1e-12);

    // finite-difference cross-check of d_s R across neighbouring geodesics
    let mut ds_r_cross_dev = 0.0f64;
    for k in 1..idx.len() - 1 {
        for i in (0..t_grid.len()).step_by((t_grid.len() / 6).max(1)) {
            let t = t_grid[i];
            let kp = surface.curvature(&samples[k + 1].path.point(t));
            let km = surface.curvature(&samples[k - 1].path.point(t));
            let fd = (kp - km) / (2.0 * ds);
            let cf = ds_r_tables[k][i];
            let denom = cf.abs().max(1e-6);
            ds_r_cross_dev = ds_r_cross_dev.max((fd - cf).abs() / denom);
        }
    }

    // component bound on |d_s R| per unit |beta'|
    let rho = estimate_rho(&samples, lim)?;
    let bound = if surface.curvature_bound > 0.0 && rho > 1e-8 {
        let c2 = super::constants::c2_constant(surface.curvature_bound, rho, r);
        let b_sup = super::constants::b_envelope(surface.curvature_bound, rho, -r);
        let c3 = surface.curvature_grad_bound * b_sup
            + surface.curvature_bound * c2
            + 2.0 * surface.curvature_bound.powf(1.5) * b_sup;
        c3 + surface.curvature_bound * c2
    } else {
        f64::INFINITY
    };

    Ok(HopfReport {
        lhs,
        rhs,
        residual_rel,
        n_s,
        n_t,
        arc_length: curve.length,
        ds_r_cross_dev,
        ds_r_bound_ratio: ds_r_abs_max / bound,
    })
}

fn estimate_rho(samples: &[SampleData], lim: &LimitOptions) -> Result<f64> {
    let mut rho = f64::INFINITY;
    for k in [0, samples.len() / 2, samples.len() - 1] {
        let forms = asymptotic_forms(&samples[k].profile, lim)?;
        rho = rho.min(forms.rho_min);
    }
    Ok(rho)
}

/// Lipschitz ratios of boundary derivatives over nested prefixes of a
/// stable curve.
#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// `(arc length, |Delta S'| / arc length)` per nested prefix, longest first.
    pub rows: Vec<(f64, f64)>,
    /// Relative spread of the ratios across refinements.
    pub stability: f64,
    /// Assembled Lipschitz constant.
    pub c5: f64,
    pub rho: f64,
    /// All ratios below the assembled constant.
    pub within_bound: bool,
}

/// Estimate the Lipschitz ratio of `S'_{gamma(s), r}(0)` in the curve length
/// over prefixes shrinking by factors of two (three refinements).
pub fn second_fundamental_lipschitz(
    surface: &Arc<ConformalSurface>,
    curve: &StableCurve,
    r: f64,
    lim: &LimitOptions,
) -> Result<LipschitzReport> {
    if r <= 1.0 {
        return Err(Error::precondition("the Lipschitz estimate needs r > 1"));
    }
    let n = curve.len();
    if !(n - 1).is_multiple_of(4) {
        return Err(Error::invalid("curve segment count must be divisible by 4"));
    }
    let ends = [n - 1, (n - 1) / 2, (n - 1) / 4];
    let mut derivs = Vec::new();
    for j in [0, ends[2], ends[1], ends[0]] {
        let (_, profile) = surface_geodesic(
            surface,
            curve.footpoints[j],
            curve.thetas[j],
            geodesic_extent(r),
            1e-11,
        )?;
        let w = crate::jacobi::boundary_derivative_s(&profile, r, &lim.ode)?;
        derivs.push((j, w[(0, 0)], profile));
    }
    let base = derivs[0].1;
    let mut rows = Vec::new();
    for (j, w, _) in derivs.iter().skip(1).rev() {
        let ell = curve.length_to(*j)?;
        rows.push((ell, (w - base).abs() / ell));
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let rmax = ratios.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
    let rmin = ratios.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let stability = (rmax - rmin) / rmin.max(1e-300);

    let mut rho = f64::INFINITY;
    for (_, _, profile) in &derivs {
        rho = rho.min(asymptotic_forms(profile, lim)?.rho_min);
    }
    let c5 = c5_constant(surface.curvature_bound, surface.curvature_grad_bound, rho, r);
    Ok(LipschitzReport { rows, stability, c5, rho, within_bound: rmax <= c5 })
}
