//! Stable curves on surfaces: samples of the horocycle through a footpoint
//! with the inward unit normals, built from Busemann values.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{flow, surface_distance, ConformalSurface, Point};

/// A reference ray with cached endpoints, so Busemann values need one
/// distance solve each.
#[derive(Debug, Clone)]
pub struct BusemannRay {
    pub surface: Arc<ConformalSurface>,
    pub base: Point,
    pub theta: f64,
    pub horizon: f64,
    end_full: Point,
    end_half: Point,
}

impl BusemannRay {
    pub fn new(surface: Arc<ConformalSurface>, base: Point, theta: f64, horizon: f64) -> Result<Self> {
        if horizon < 10.0 {
            return Err(Error::precondition("busemann horizon must be at least 10"));
        }
        if surface.max_curvature >= 0.0 {
            return Err(Error::precondition("busemann rays need strictly negative curvature"));
        }
        let (end_full, _) = flow(&surface, base, theta, horizon, 1e-11)?;
        let (end_half, _) = flow(&surface, base, theta, 0.5 * horizon, 1e-11)?;
        Ok(BusemannRay { surface, base, theta, horizon, end_full, end_half })
    }

    /// `b(q)` at the full horizon.
    pub fn value(&self, q: &Point) -> Result<f64> {
        Ok(surface_distance(&self.surface, self.end_full, *q, 1e-10)? - self.horizon)
    }

    /// `b(q)` with the half-horizon Cauchy estimate.
    pub fn value_checked(&self, q: &Point) -> Result<(f64, f64)> {
        let full = self.value(q)?;
        let half = surface_distance(&self.surface, self.end_half, *q, 1e-10)? - 0.5 * self.horizon;
        Ok((full, (full - half).abs()))
    }

    /// Metric-unit coordinate vector of `-grad b` at `q`, by central
    /// differences with metric step `1e-4`, renormalized to unit length.
    pub fn minus_gradient(&self, q: &Point) -> Result<(f64, f64)> {
        let hc = 1e-4 * (-self.surface.phi(q)).exp();
        let bx = (self.value(&Point::new(q.x + hc, q.y))? - self.value(&Point::new(q.x - hc, q.y))?)
            / (2.0 * hc);
        let by = (self.value(&Point::new(q.x, q.y + hc))? - self.value(&Point::new(q.x, q.y - hc))?)
            / (2.0 * hc);
        // metric gradient = e^{-2 phi} (bx, by); after normalization only the
        // coordinate direction matters
        let norm = bx.hypot(by);
        if norm < 1e-8 {
            return Err(Error::invalid("degenerate busemann gradient"));
        }
        let scale = (-self.surface.phi(q)).exp();
        Ok((-bx / norm * scale, -by / norm * scale))
    }
}

/// Samples of a curve in the stable leaf of a ray: horocycle footpoints with
/// the stable unit directions.
#[derive(Debug, Clone)]
pub struct StableCurve {
    pub surface: Arc<ConformalSurface>,
    pub ray: BusemannRay,
    /// Curve parameters `s_j`, uniform in `[0, 1]`.
    pub params: Vec<f64>,
    pub footpoints: Vec<Point>,
    /// Metric-unit coordinate vectors `gamma(s_j) = -grad b`.
    pub directions: Vec<(f64, f64)>,
    pub thetas: Vec<f64>,
    /// Length of the footpoint curve.
    pub length: f64,
    /// Largest `|b|` over the samples (horocycle landing accuracy).
    pub busemann_residual_max: f64,
}

impl StableCurve {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Arc length between consecutive footpoints accumulated over
    /// `[0, s_{idx}]`.
    pub fn length_to(&self, idx: usize) -> Result<f64> {
        let mut acc = 0.0;
        for w in self.footpoints[0..=idx].windows(2) {
            acc += surface_distance(&self.surface, w[0], w[1], 1e-10)?;
        }
        Ok(acc)
    }
}

/// Build a stable curve of total transversal extent `arc_span` starting at
/// the footpoint of the ray `(p, theta)`.
pub fn build_stable_curve(
    surface: &Arc<ConformalSurface>,
    p: Point,
    theta: f64,
    arc_span: f64,
    n_samples: usize,
    horizon: f64,
) -> Result<StableCurve> {
    if n_samples < 2 {
        return Err(Error::invalid("stable curve needs at least 2 samples"));
    }
    if arc_span <= 0.0 {
        return Err(Error::invalid("arc span must be positive"));
    }
    let ray = BusemannRay::new(surface.clone(), p, theta, horizon)?;
    let normal_theta = theta + std::f64::consts::FRAC_PI_2;

    let mut params = Vec::with_capacity(n_samples);
    let mut footpoints = Vec::with_capacity(n_samples);
    let mut directions = Vec::with_capacity(n_samples);
    let mut thetas = Vec::with_capacity(n_samples);
    let mut residual_max = 0.0f64;
    for j in 0..n_samples {
        let s = j as f64 / (n_samples - 1) as f64;
        let sigma = s * arc_span;
        let (mut q, _) = flow(surface, p, normal_theta, sigma, 1e-11)?;
        // project onto the horosphere: Newton along the gradient direction
        let mut b = ray.value(&q)?;
        let mut iters = 0;
        while b.abs() > 1e-9 && iters < 8 {
            let g = ray.minus_gradient(&q)?;
            // -grad b is metric-unit; moving along it changes b by -length
            let dir = g.1.atan2(g.0);
            (q, _) = flow(surface, q, dir, b, 1e-11)?;
            b = ray.value(&q)?;
            iters += 1;
        }
        residual_max = residual_max.max(b.abs());
        let g = ray.minus_gradient(&q)?;
        params.push(s);
        footpoints.push(q);
        directions.push(g);
        thetas.push(g.1.atan2(g.0));
    }
    let mut length = 0.0;
    for w in footpoints.windows(2) {
        length += surface_distance(surface, w[0], w[1], 1e-10)?;
    }
    Ok(StableCurve {
        surface: surface.clone(),
        ray,
        params,
        footpoints,
        directions,
        thetas,
        length,
        busemann_residual_max: residual_max,
    })
}

/// One contraction row: how much the footpoint curve shrank after flowing
/// for time `t`, against the decay envelope `bound`.
#[derive(Debug, Clone, Copy)]
pub struct ContractionRow {
    pub t: f64,
    /// Max over segments of `|beta_t'| / |beta'|`.
    pub ratio: f64,
    /// `a2 e^{-rho t / 2}` at the supplied constants.
    pub bound: f64,
}

/// Flow the curve and compare segment contraction against the envelope.
pub fn contraction_check(
    curve: &StableCurve,
    ts: &[f64],
    r0: f64,
    rho: f64,
) -> Result<Vec<ContractionRow>> {
    let mut rows = Vec::with_capacity(ts.len());
    let base: Vec<f64> = curve
        .footpoints
        .windows(2)
        .map(|w| surface_distance(&curve.surface, w[0], w[1], 1e-10))
        .collect::<Result<_>>()?;
    for &t in ts {
        let flowed: Vec<Point> = curve
            .footpoints
            .iter()
            .zip(&curve.thetas)
            .map(|(q, th)| flow(&curve.surface, *q, *th, t, 1e-11).map(|(p, _)| p))
            .collect::<Result<_>>()?;
        let mut ratio = 0.0f64;
        for (w, b) in flowed.windows(2).zip(&base) {
            let d = surface_distance(&curve.surface, w[0], w[1], 1e-10)?;
            ratio = ratio.max(d / b);
        }
        rows.push(ContractionRow { t, ratio, bound: super::constants::b_envelope(r0, rho, t) });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horocycle_on_half_plane_is_horizontal_line() {
        // upward ray at (0, 1): horocycle through the footpoint is {y = 1}
        // and the stable directions point straight up
        let s = Arc::new(ConformalSurface::upper_half_plane());
        let curve = build_stable_curve(
            &s,
            Point::new(0.0, 1.0),
            std::f64::consts::FRAC_PI_2,
            0.5,
            9,
            20.0,
        )
        .unwrap();
        assert!(curve.busemann_residual_max < 1e-4);
        for q in &curve.footpoints {
            assert!((q.y - 1.0).abs() < 2e-5, "footpoint ({}, {})", q.x, q.y);
        }
        for th in &curve.thetas {
            assert!((th - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        }
        // the transversal guess geodesic is the unit semicircle, so the
        // endpoint abscissa is -tanh(arc_span) after vertical projection
        let dx = curve.footpoints.last().unwrap().x - curve.footpoints[0].x;
        assert!((dx + 0.5f64.tanh()).abs() < 1e-3, "dx = {dx}");
        assert!((curve.length - 0.5f64.tanh()).abs() < 1e-3, "len = {}", curve.length);
    }

    #[test]
    fn tiny_arc_degenerates() {
        let s = Arc::new(ConformalSurface::upper_half_plane());
        let curve = build_stable_curve(
            &s,
            Point::new(0.0, 1.0),
            std::f64::consts::FRAC_PI_2,
            1e-4,
            3,
            20.0,
        )
        .unwrap();
        assert!(curve.length < 2e-4);
    }

    #[test]
    fn contraction_matches_exponential_envelope() {
        let s = Arc::new(ConformalSurface::upper_half_plane());
        let curve = build_stable_curve(
            &s,
            Point::new(0.0, 1.0),
            std::f64::consts::FRAC_PI_2,
            0.4,
            5,
            20.0,
        )
        .unwrap();
        let rows = contraction_check(&curve, &[0.5, 1.0, 2.0], 1.0, 2.0).unwrap();
        for row in rows {
            // exact contraction on the half-plane is e^{-t}
            assert!((row.ratio - (-row.t).exp()).abs() < 2e-3, "ratio {}", row.ratio);
            assert!(row.ratio <= row.bound, "{} > {}", row.ratio, row.bound);
        }
    }
}
