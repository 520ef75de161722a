//! Volume entropy from ball-volume growth and the purely-exponential
//! pinching constant.

use crate::error::{Error, Result};
use crate::linalg;

use super::volume::VolumeCurve;

/// Entropy fit over a radius window.
#[derive(Debug, Clone)]
pub struct EntropyFit {
    /// The entropy estimate: largest sliding-subwindow slope of
    /// `log vol B_r` (a limsup realization).
    pub h_vol: f64,
    /// Plain least-squares slope over the full window.
    pub window_slope: f64,
    /// Slopes over the two half-windows (stability diagnostic).
    pub half_slopes: (f64, f64),
    /// Sphere-based slope, reported as a diagnostic.
    pub sphere_slope: f64,
    pub window: (f64, f64),
}

/// Fit `h_vol` as the growth rate of `log vol B_r` over `[lo, hi]`.
pub fn estimate_volume_entropy(curve: &VolumeCurve, window: (f64, f64)) -> Result<EntropyFit> {
    let (lo, hi) = window;
    let sel: Vec<(f64, f64, f64)> = curve
        .radii
        .iter()
        .zip(curve.ball_vol.iter().zip(&curve.sphere_vol))
        .filter(|(r, _)| **r >= lo - 1e-12 && **r <= hi + 1e-12)
        .map(|(r, (b, s))| (*r, *b, *s))
        .collect();
    if sel.len() < 5 {
        return Err(Error::precondition("entropy window must contain at least 5 grid points"));
    }
    if sel.iter().any(|(_, b, s)| *b <= 0.0 || *s <= 0.0) {
        return Err(Error::invalid("volumes must be positive"));
    }
    let rs: Vec<f64> = sel.iter().map(|x| x.0).collect();
    let log_b: Vec<f64> = sel.iter().map(|x| x.1.ln()).collect();
    let log_s: Vec<f64> = sel.iter().map(|x| x.2.ln()).collect();

    let window_slope = linalg::ls_slope(&rs, &log_b)?;
    let sphere_slope = linalg::ls_slope(&rs, &log_s)?;
    let mid = rs.len() / 2;
    let half_slopes = (
        linalg::ls_slope(&rs[..=mid], &log_b[..=mid])?,
        linalg::ls_slope(&rs[mid..], &log_b[mid..])?,
    );

    // limsup realization: max slope over sliding subwindows of half length
    let sub = (rs.len() / 2).max(5).min(rs.len());
    let mut h_vol = f64::NEG_INFINITY;
    let mut start = 0;
    while start + sub <= rs.len() {
        h_vol = h_vol.max(linalg::ls_slope(&rs[start..start + sub], &log_b[start..start + sub])?);
        start += 1;
    }
    Ok(EntropyFit { h_vol, window_slope, half_slopes, sphere_slope, window })
}

/// Pinching report for purely exponential growth at rate `h`.
#[derive(Debug, Clone)]
pub struct PurelyExponentialReport {
    /// Smallest constant with `(1/C) e^{hr} <= vol B_r <= C e^{hr}` over the
    /// grid restricted to `r >= 1`.
    pub c: f64,
    /// Radius at which the ratio extremizes.
    pub r_extremal: f64,
    pub h: f64,
}

/// The smallest pinching constant over the curve's grid.
pub fn check_purely_exponential(curve: &VolumeCurve, h: f64) -> Result<PurelyExponentialReport> {
    if h <= 0.0 {
        return Err(Error::precondition("purely exponential growth needs h > 0"));
    }
    let mut c = 1.0f64;
    let mut r_extremal = curve.radii[0];
    for (r, b) in curve.radii.iter().zip(&curve.ball_vol) {
        if *r < 1.0 - 1e-12 {
            continue;
        }
        // compare in the log domain; e^{hr} may overflow for large h r
        let log_ratio = b.ln() - h * r;
        let cand = log_ratio.abs().exp();
        if cand > c {
            c = cand;
            r_extremal = *r;
        }
    }
    Ok(PurelyExponentialReport { c, r_extremal, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::volume_curve;
    use crate::model::{Model, ModelSpec};

    fn curve(eigs: &[f64], r_max: usize) -> VolumeCurve {
        let m = Model::from_spec(&ModelSpec::ConstantDiag { eigenvalues: eigs.to_vec() }).unwrap();
        let radii: Vec<f64> = (1..=r_max).map(|i| i as f64).collect();
        volume_curve(&m, None, &radii, 0).unwrap()
    }

    #[test]
    fn hyperbolic_plane_entropy_is_one() {
        let fit = estimate_volume_entropy(&curve(&[-1.0], 20), (10.0, 20.0)).unwrap();
        assert!((fit.h_vol - 1.0).abs() < 0.01, "h_vol = {}", fit.h_vol);
        assert!((fit.window_slope - 1.0).abs() < 0.01);
        assert!((fit.sphere_slope - 1.0).abs() < 0.01);
    }

    #[test]
    fn flat_entropy_is_zero() {
        // log(pi r^2) has slope 2/r -> sub-exponential
        let fit = estimate_volume_entropy(&curve(&[0.0], 20), (10.0, 20.0)).unwrap();
        assert!(fit.h_vol < 0.2, "h_vol = {}", fit.h_vol);
        assert!(fit.half_slopes.1 < fit.half_slopes.0);
    }

    #[test]
    fn rank_one_model_entropy_is_four() {
        let fit = estimate_volume_entropy(&curve(&[-4.0, -1.0, -1.0], 20), (10.0, 20.0)).unwrap();
        assert!((fit.h_vol - 4.0).abs() < 0.02, "h_vol = {}", fit.h_vol);
    }

    #[test]
    fn pinching_constant_hyperbolic_plane() {
        // ratio 2 pi (cosh r - 1)/e^r increases to pi
        let rep = check_purely_exponential(&curve(&[-1.0], 20), 1.0).unwrap();
        assert!(rep.c >= 3.0 && rep.c <= 3.3, "C = {}", rep.c);
        assert!((rep.r_extremal - 20.0).abs() < 1e-9);
    }

    #[test]
    fn flat_rate_rejected() {
        assert!(matches!(
            check_purely_exponential(&curve(&[0.0], 10), 0.0),
            Err(Error::Precondition(_))
        ));
    }
}
