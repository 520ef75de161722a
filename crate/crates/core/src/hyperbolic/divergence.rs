//! Two-sided brackets for the outside-ball distance between diverging
//! geodesics: an exponential lower bound from the tensor growth envelope and
//! the geodesic-sphere arc as the admissible-path upper bound.

use crate::error::{Error, Result};
use crate::jacobi::{a_tensor, JacobiOptions};
use crate::linalg;
use crate::model::Model;
use crate::quad;

/// Bracket data for one pair of directions.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub ts: Vec<f64>,
    /// `c e^{alpha t} * angle`, envelope-calibrated on the window.
    pub lower: Vec<f64>,
    /// Sphere-arc length between the two directions.
    pub upper: Vec<f64>,
    pub alpha_low: f64,
    pub alpha_up: f64,
    /// `log(lower(T)) / T`: the lower estimate of the divergence rate.
    pub liminf_estimate: f64,
    /// Ratio of the liminf estimate to the fitted rate (the proportionality
    /// constant is reported empirically, not asserted).
    pub c0_ratio: f64,
    pub angle: f64,
    /// Defect of `lower <= upper` over the grid (0 when the bracket holds).
    pub bracket_defect: f64,
}

/// Bracket the outside-ball distance for two directions separated by
/// `angle`, whose connecting variation rotates through the normal
/// eigen-direction `axis` (homogeneous models) or through the angular fan
/// (surfaces).
pub fn divergence_bounds(
    model: &Model,
    angle: f64,
    axis: usize,
    t_max: f64,
) -> Result<DivergenceReport> {
    if !(1e-6..std::f64::consts::PI).contains(&angle) {
        return Err(Error::invalid("directions must be separated by an angle in (1e-6, pi)"));
    }
    if t_max < 5.0 {
        return Err(Error::precondition("divergence fitting needs t_max >= 5"));
    }
    let jopts = JacobiOptions { grid_h: 0.1, ..Default::default() };
    match model {
        Model::Homogeneous { profile } => {
            let m = profile.normal_dim();
            if axis >= m {
                return Err(Error::invalid(format!("variation axis {axis} out of range (m = {m})")));
            }
            let a = a_tensor(profile, t_max, &jopts)?;
            let mut ts = Vec::new();
            let mut stretch = Vec::new();
            for (t, v) in a.ts.iter().zip(&a.values) {
                if *t >= 1.0 - 1e-12 {
                    ts.push(*t);
                    stretch.push(v.column(axis).norm());
                }
            }
            build_report(ts, stretch, angle)
        }
        Model::Surface { surface, base, base_angle } => {
            // fan of directions between the two rays; the arc upper bound is
            // the angular integral of the per-direction stretch
            let n = 17usize;
            let mut tables: Vec<Vec<f64>> = Vec::with_capacity(n);
            let mut ts: Vec<f64> = Vec::new();
            for i in 0..n {
                let th = base_angle + angle * i as f64 / (n - 1) as f64;
                let (_, profile) =
                    crate::geometry::surface_geodesic(surface, *base, th, t_max + 1.0, 1e-11)?;
                let a = a_tensor(&profile, t_max, &jopts)?;
                if ts.is_empty() {
                    ts = a
                        .ts
                        .iter()
                        .copied()
                        .filter(|t| *t >= 1.0 - 1e-12)
                        .collect();
                }
                tables.push(
                    a.ts.iter()
                        .zip(&a.values)
                        .filter(|(t, _)| **t >= 1.0 - 1e-12)
                        .map(|(_, v)| v[(0, 0)].abs())
                        .collect(),
                );
            }
            let mut stretch = Vec::with_capacity(ts.len());
            for i in 0..ts.len() {
                let vals: Vec<f64> = tables.iter().map(|tb| tb[i]).collect();
                // integral over the angle fan divided by the total angle
                let arc = quad::trapezoid_samples(angle / (n - 1) as f64, &vals);
                stretch.push(arc / angle);
            }
            build_report(ts, stretch, angle)
        }
        Model::TimeVarying { .. } => Err(Error::invalid(
            "divergence bounds need a homogeneous or surface model",
        )),
    }
}

fn build_report(ts: Vec<f64>, stretch: Vec<f64>, angle: f64) -> Result<DivergenceReport> {
    // exponential fit of the stretch with a polynomial-absorbing basis
    let logs: Vec<f64> = stretch.iter().map(|s| s.ln()).collect();
    let coef = linalg::least_squares_fit(&ts, &logs, &[&|_| 1.0, &|t| t, &|t: f64| t.ln()])?;
    let alpha = coef[1].max(0.0);
    let mut c_env = f64::INFINITY;
    for (t, l) in ts.iter().zip(&logs) {
        c_env = c_env.min((l - alpha * t).exp());
    }
    let lower: Vec<f64> = ts.iter().map(|t| c_env * (alpha * t).exp() * angle).collect();
    let upper: Vec<f64> = stretch.iter().map(|s| s * angle).collect();

    let log_lower: Vec<f64> = lower.iter().map(|v| v.ln()).collect();
    let log_upper: Vec<f64> = upper.iter().map(|v| v.ln()).collect();
    let alpha_low = linalg::least_squares_fit(&ts, &log_lower, &[&|_| 1.0, &|t| t, &|t: f64| t.ln()])?[1];
    let alpha_up = linalg::least_squares_fit(&ts, &log_upper, &[&|_| 1.0, &|t| t, &|t: f64| t.ln()])?[1];

    let t_end = *ts.last().unwrap();
    let liminf_estimate = lower.last().unwrap().ln() / t_end;
    let c0_ratio = if alpha > 0.0 { liminf_estimate / alpha } else { 0.0 };
    let mut bracket_defect = 0.0f64;
    for (l, u) in lower.iter().zip(&upper) {
        bracket_defect = bracket_defect.max((l - u) / u.max(1e-300));
    }
    Ok(DivergenceReport {
        ts,
        lower,
        upper,
        alpha_low,
        alpha_up,
        liminf_estimate,
        c0_ratio,
        angle,
        bracket_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use std::f64::consts::FRAC_PI_2;

    fn model(eigs: &[f64]) -> Model {
        Model::from_spec(&ModelSpec::ConstantDiag { eigenvalues: eigs.to_vec() }).unwrap()
    }

    #[test]
    fn hyperbolic_plane_rates_bracket() {
        let rep = divergence_bounds(&model(&[-1.0]), FRAC_PI_2, 0, 20.0).unwrap();
        // upper is (pi/2) sinh t
        for (t, u) in rep.ts.iter().zip(&rep.upper) {
            approx::assert_relative_eq!(*u, FRAC_PI_2 * t.sinh(), max_relative = 1e-8);
        }
        assert!((rep.alpha_low - 1.0).abs() < 0.02, "low {}", rep.alpha_low);
        assert!((rep.alpha_up - 1.0).abs() < 0.02, "up {}", rep.alpha_up);
        assert!(rep.bracket_defect <= 1e-9, "defect {}", rep.bracket_defect);
        assert!(rep.liminf_estimate > 0.8);
        assert!(rep.c0_ratio > 0.8 && rep.c0_ratio <= 1.05);
    }

    #[test]
    fn flat_rates_vanish() {
        let rep = divergence_bounds(&model(&[0.0]), FRAC_PI_2, 0, 20.0).unwrap();
        // upper is (pi/2) t: polynomial growth, rate ~ 0
        assert!(rep.alpha_up.abs() < 0.01, "up {}", rep.alpha_up);
        assert!(rep.alpha_low.abs() < 0.01);
        assert!(rep.bracket_defect <= 1e-9);
    }

    #[test]
    fn eigenplane_rates_of_the_symmetric_model() {
        let m = model(&[-4.0, -1.0, -1.0]);
        // variation through the -1 eigenplane
        let rep = divergence_bounds(&m, FRAC_PI_2, 1, 20.0).unwrap();
        assert!((rep.alpha_up - 1.0).abs() < 0.02, "up {}", rep.alpha_up);
        // variation through the -4 axis
        let rep = divergence_bounds(&m, FRAC_PI_2, 0, 20.0).unwrap();
        assert!((rep.alpha_up - 2.0).abs() < 0.02, "up {}", rep.alpha_up);
        assert!((rep.alpha_low - 2.0).abs() < 0.02, "low {}", rep.alpha_low);
        assert!(rep.bracket_defect <= 1e-9);
    }

    #[test]
    fn tiny_angle_rejected() {
        assert!(divergence_bounds(&model(&[-1.0]), 1e-8, 0, 10.0).is_err());
    }
}
