//! Sphere and ball volumes by quadrature of `det A_v(r)` over the unit
//! tangent sphere.
//!
//! Homogeneous models collapse the direction integral to the Euclidean
//! sphere area times a single determinant. Surface models integrate over a
//! uniform angular grid with the periodic trapezoid rule, whose error is
//! estimated by node doubling. Determinants accumulate in the log domain so
//! that exponential growth stays representable.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CurvatureProfile, Point};
use crate::jacobi::{a_tensor, JacobiOptions};
use crate::linalg;
use crate::model::Model;
use crate::quad;

/// Sampled volume data for one model and footpoint.
#[derive(Debug, Clone)]
pub struct VolumeCurve {
    pub footpoint: Option<Point>,
    pub radii: Vec<f64>,
    pub sphere_vol: Vec<f64>,
    pub ball_vol: Vec<f64>,
    /// log of the direction-averaged determinant at each radius.
    pub log_sphere: Vec<f64>,
    /// Quadrature rule identifier and node count.
    pub rule: String,
    pub nodes: usize,
    /// Angular-refinement error estimate (0 for homogeneous models).
    pub quad_error: f64,
}

impl VolumeCurve {
    pub fn sphere_at(&self, r: f64) -> Result<f64> {
        self.index_of(r).map(|i| self.sphere_vol[i])
    }

    pub fn ball_at(&self, r: f64) -> Result<f64> {
        self.index_of(r).map(|i| self.ball_vol[i])
    }

    fn index_of(&self, r: f64) -> Result<usize> {
        self.radii
            .iter()
            .position(|x| (x - r).abs() < 1e-9 * (1.0 + r))
            .ok_or_else(|| Error::invalid(format!("radius {r} not on the volume grid")))
    }

    /// Consistency of the published tables: the ball column against the
    /// cumulative integral of the sphere column on the same grid, relative
    /// to the ball scale. Requires a uniform radius grid.
    pub fn additivity_defect(&self) -> f64 {
        if self.radii.len() < 4 {
            return 0.0;
        }
        let h = self.radii[1] - self.radii[0];
        if self.radii.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h)) {
            return f64::NAN;
        }
        let cum = crate::quad::cumulative_integral(h, &self.sphere_vol);
        let mut worst = 0.0f64;
        for (i, c) in cum.iter().enumerate().skip(1) {
            let inc = self.ball_vol[i] - self.ball_vol[0];
            worst = worst.max((inc - c).abs() / self.ball_vol[i].max(1e-300));
        }
        worst
    }
}

const GRID_H: f64 = 0.01;

// determinant table of A along one profile on the uniform grid [0, r_max]
fn det_table(profile: &CurvatureProfile, r_max: f64) -> Result<Vec<f64>> {
    let jopts = JacobiOptions::default();
    let a = a_tensor(profile, r_max, &jopts)?;
    Ok(a.values
        .iter()
        .map(|v| {
            let ld = linalg::log_abs_det(v);
            ld.exp()
        })
        .collect())
}

struct ModelVolumes {
    /// direction-integrated determinant at grid nodes (sphere volume density)
    sphere: Vec<f64>,
    ball: Vec<f64>,
    grid_h: f64,
    rule: String,
    nodes: usize,
    quad_error: f64,
}

fn integrate_model(model: &Model, p: Option<Point>, r_max: f64, n_angles: usize) -> Result<ModelVolumes> {
    match model {
        Model::Homogeneous { profile } => {
            let omega = linalg::unit_sphere_volume(profile.dim_manifold());
            let det = det_table(profile, r_max)?;
            let sphere: Vec<f64> = det.iter().map(|d| omega * d).collect();
            let ball = quad::cumulative_integral(GRID_H, &sphere);
            Ok(ModelVolumes {
                sphere,
                ball,
                grid_h: GRID_H,
                rule: "collapsed (homogeneous)".to_string(),
                nodes: 1,
                quad_error: 0.0,
            })
        }
        Model::Surface { surface: _, base, .. } => {
            let p = p.unwrap_or(*base);
            let n = n_angles.max(8);
            let profiles = model.angular_profiles(p, n, r_max + 1.0)?;
            let tables: Vec<Vec<f64>> = profiles
                .par_iter()
                .map(|pr| det_table(pr, r_max))
                .collect::<Result<_>>()?;
            let len = tables[0].len();
            let mut sphere = vec![0.0; len];
            let mut coarse = vec![0.0; len];
            for i in 0..len {
                let vals: Vec<f64> = tables.iter().map(|t| t[i]).collect();
                sphere[i] = quad::periodic_trapezoid(2.0 * std::f64::consts::PI, &vals);
                let half: Vec<f64> = vals.iter().step_by(2).copied().collect();
                coarse[i] = quad::periodic_trapezoid(2.0 * std::f64::consts::PI, &half);
            }
            let quad_error = sphere
                .iter()
                .zip(&coarse)
                .map(|(f, c)| (f - c).abs() / f.max(1e-300))
                .fold(0.0, f64::max);
            let ball = quad::cumulative_integral(GRID_H, &sphere);
            Ok(ModelVolumes {
                sphere,
                ball,
                grid_h: GRID_H,
                rule: "periodic trapezoid".to_string(),
                nodes: n,
                quad_error,
            })
        }
        Model::TimeVarying { .. } => Err(Error::invalid(
            "time-varying profiles describe a single geodesic; volumes need a homogeneous or surface model",
        )),
    }
}

/// `vol S_r(p)`: the determinant integral at one radius, with its
/// angular-refinement error estimate.
pub fn sphere_volume(model: &Model, p: Option<Point>, r: f64, n_angles: usize) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::invalid("radius must be positive"));
    }
    let mv = integrate_model(model, p, r, n_angles)?;
    let idx = ((r / mv.grid_h).round() as usize).min(mv.sphere.len() - 1);
    Ok((mv.sphere[idx], mv.sphere[idx] * mv.quad_error))
}

/// `vol B_r(p)`: cumulative integral of the sphere volume.
pub fn ball_volume(model: &Model, p: Option<Point>, r: f64, n_angles: usize) -> Result<(f64, f64)> {
    if r <= 0.0 {
        return Err(Error::invalid("radius must be positive"));
    }
    let mv = integrate_model(model, p, r, n_angles)?;
    let idx = ((r / mv.grid_h).round() as usize).min(mv.ball.len() - 1);
    Ok((mv.ball[idx], mv.ball[idx] * mv.quad_error))
}

/// Sphere and ball volumes on a radius grid (one integration sweep).
pub fn volume_curve(
    model: &Model,
    p: Option<Point>,
    radii: &[f64],
    n_angles: usize,
) -> Result<VolumeCurve> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(Error::invalid("radii must be positive and ascending"));
    }
    let r_max = *radii.last().unwrap();
    let mv = integrate_model(model, p, r_max, n_angles)?;
    let mut sphere_vol = Vec::with_capacity(radii.len());
    let mut ball_vol = Vec::with_capacity(radii.len());
    let mut log_sphere = Vec::with_capacity(radii.len());
    for &r in radii {
        let idx = ((r / mv.grid_h).round() as usize).min(mv.sphere.len() - 1);
        sphere_vol.push(mv.sphere[idx]);
        ball_vol.push(mv.ball[idx]);
        log_sphere.push(mv.sphere[idx].ln());
    }
    if ball_vol.windows(2).any(|w| w[1] <= w[0]) || sphere_vol.iter().any(|v| *v <= 0.0) {
        return Err(Error::invalid("volumes must be positive and balls increasing"));
    }
    Ok(VolumeCurve {
        footpoint: p.or_else(|| model.surface().map(|(_, b, _)| b)),
        radii: radii.to_vec(),
        sphere_vol,
        ball_vol,
        log_sphere,
        rule: mv.rule,
        nodes: mv.nodes,
        quad_error: mv.quad_error,
    })
}

/// The ratio `g(r) = vol S_r / vol B_r` and its limit diagnostics.
#[derive(Debug, Clone)]
pub struct CheegerReport {
    pub radii: Vec<f64>,
    pub g: Vec<f64>,
    pub g_final: f64,
    /// Richardson-style extrapolation of the tail.
    pub limit_estimate: f64,
}

/// Tabulate `g(r)` up to `r_max`.
pub fn cheeger_limit(model: &Model, p: Option<Point>, r_max: f64, n_angles: usize) -> Result<CheegerReport> {
    let radii: Vec<f64> = (1..=((r_max).floor() as usize)).map(|i| i as f64).collect();
    let curve = volume_curve(model, p, &radii, n_angles)?;
    let g: Vec<f64> = curve
        .sphere_vol
        .iter()
        .zip(&curve.ball_vol)
        .map(|(s, b)| s / b)
        .collect();
    let g_final = *g.last().unwrap();
    // geometric-tail extrapolation from the last three samples
    let limit_estimate = if g.len() >= 3 {
        let (a, b, c) = (g[g.len() - 3], g[g.len() - 2], g[g.len() - 1]);
        let den = c - 2.0 * b + a;
        if den.abs() > 1e-14 * (1.0 + c.abs()) {
            c - (c - b) * (c - b) / den
        } else {
            c
        }
    } else {
        g_final
    };
    Ok(CheegerReport { radii, g, g_final, limit_estimate })
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
    fn flat_plane_volumes() {
        let m = model(&[0.0]);
        let (s, _) = sphere_volume(&m, None, 3.0, 0).unwrap();
        assert_relative_eq!(s, 2.0 * PI * 3.0, max_relative = 1e-9);
        let (b, _) = ball_volume(&m, None, 3.0, 0).unwrap();
        assert_relative_eq!(b, PI * 9.0, max_relative = 1e-8);
    }

    #[test]
    fn hyperbolic_plane_volumes() {
        let m = model(&[-1.0]);
        let (s, _) = sphere_volume(&m, None, 2.0, 0).unwrap();
        // 2 pi sinh 2 = 22.788236025775753
        assert_relative_eq!(s, 2.0 * PI * 2f64.sinh(), max_relative = 1e-8);
        let (b, _) = ball_volume(&m, None, 2.0, 0).unwrap();
        assert_relative_eq!(b, 2.0 * PI * (2f64.cosh() - 1.0), max_relative = 1e-8);
    }

    #[test]
    fn hyperbolic_three_space_spheres() {
        let m = model(&[-1.0, -1.0]);
        let (s, _) = sphere_volume(&m, None, 2.0, 0).unwrap();
        assert_relative_eq!(s, 4.0 * PI * 2f64.sinh().powi(2), max_relative = 1e-8);
    }

    #[test]
    fn curve_additivity() {
        let m = model(&[-1.0]);
        let radii: Vec<f64> = (4..=40).map(|i| 0.25 * i as f64).collect();
        let curve = volume_curve(&m, None, &radii, 0).unwrap();
        assert!(curve.additivity_defect() < 1e-4, "defect {}", curve.additivity_defect());
        // B_r - B_{r/2} equals the sphere integral over [r/2, r]
        let b10 = curve.ball_at(10.0).unwrap();
        let b5 = curve.ball_at(5.0).unwrap();
        let exact = 2.0 * PI * (10f64.cosh() - 5f64.cosh());
        assert_relative_eq!(b10 - b5, exact, max_relative = 1e-8);
    }

    #[test]
    fn surface_volume_matches_homogeneous() {
        let spec = ModelSpec::Surface {
            phi: crate::geometry::PhiFamily::LogConformal,
            base_point: [0.0, 1.0],
            base_angle: std::f64::consts::FRAC_PI_2,
        };
        let m = Model::from_spec(&spec).unwrap();
        let (s, err) = sphere_volume(&m, None, 3.0, 16).unwrap();
        assert_relative_eq!(s, 2.0 * PI * 3f64.sinh(), max_relative = 1e-7);
        assert!(err < 1e-6 * s);
    }

    #[test]
    fn cheeger_ratio_hyperbolic() {
        let m = model(&[-1.0]);
        let rep = cheeger_limit(&m, None, 15.0, 0).unwrap();
        // g(r) = coth(r/2)
        for (r, g) in rep.radii.iter().zip(&rep.g) {
            let exact = (r / 2.0).cosh() / (r / 2.0).sinh();
            assert_relative_eq!(*g, exact, max_relative = 1e-7);
        }
        assert!((rep.g_final - 1.0).abs() < 1e-5);
    }

    #[test]
    fn flat_cheeger_ratio() {
        // g(r) = 2/r for the flat plane
        let m = model(&[0.0]);
        let rep = cheeger_limit(&m, None, 10.0, 0).unwrap();
        for (r, g) in rep.radii.iter().zip(&rep.g) {
            assert_relative_eq!(*g, 2.0 / r, max_relative = 1e-6);
        }
    }

    #[test]
    fn surface_quadrature_error_estimate_is_honest() {
        // doubling the node count moves the value by less than 3x the estimate
        let spec = ModelSpec::Surface {
            phi: crate::geometry::PhiFamily::TanhPoly { coeffs: vec![-0.105, 0.0, 0.105], rate: 1.0 },
            base_point: [0.4, 1.0],
            base_angle: 0.9,
        };
        let m = Model::from_spec(&spec).unwrap();
        let (v16, err16) = sphere_volume(&m, None, 3.0, 16).unwrap();
        let (v32, _) = sphere_volume(&m, None, 3.0, 32).unwrap();
        assert!((v32 - v16).abs() <= 3.0 * err16.max(1e-12 * v16), "{v16} vs {v32}, est {err16}");
    }

    #[test]
    fn time_varying_model_rejected() {
        let spec = ModelSpec::TimeVarying {
            entries: vec![crate::geometry::TimeExpr::Constant { value: -1.0 }],
        };
        let m = Model::from_spec(&spec).unwrap();
        assert!(sphere_volume(&m, None, 2.0, 0).is_err());
    }
}
