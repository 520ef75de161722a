//! Conformal surfaces `e^{2 phi} (dx^2 + dy^2)` with closed-form derivatives.
//!
//! Every surface belongs to a named family of conformal factors; derivatives
//! of `phi` up to order three come from the jet expressions, so the Gauss
//! curvature `K = -e^{-2 phi} (phi_xx + phi_yy)` and its gradient are exact.
//!
//! The variable-curvature families perturb the upper half-plane along the
//! signed distance `s = asinh(x/y)` to the vertical geodesic through the
//! origin. Both `K` and `|grad K|` then depend on `s` alone, which keeps the
//! curvature pinched in a fixed band over the whole plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet3;

/// A point in the coordinate chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn euclid_dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Named conformal-factor families accepted by the model interface.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PhiFamily {
    /// `phi = value` (flat plane, rescaled).
    Constant { value: f64 },
    /// `phi = -log y` on the upper half-plane, `K = -1`.
    LogConformal,
    /// `phi = -log y + sum_k coeffs[k] tanh^k(rate * s)`, `s = asinh(x/y)`.
    TanhPoly { coeffs: Vec<f64>, rate: f64 },
    /// `phi = -log y + amplitude * sin(omega * s + phase)`.
    Sinusoidal { amplitude: f64, omega: f64, phase: f64 },
}

/// A conformal surface from one of the named families.
#[derive(Debug, Clone)]
pub struct ConformalSurface {
    family: PhiFamily,
    /// `R0`: bound on `|K|` over the surface.
    pub curvature_bound: f64,
    /// `R0'`: bound on the metric norm of `grad K`.
    pub curvature_grad_bound: f64,
    /// Largest (least negative) sampled curvature value.
    pub max_curvature: f64,
    /// Smallest sampled curvature value.
    pub min_curvature: f64,
    /// Sup over the plane of `phi + log y` (0 for the unperturbed
    /// half-plane); bounds the conformal factor against `1/y`.
    pub transversal_sup: f64,
    use_exact_distance: bool,
}

impl ConformalSurface {
    pub fn new(family: PhiFamily) -> Result<Self> {
        match &family {
            PhiFamily::TanhPoly { coeffs, rate } => {
                if coeffs.is_empty() || !coeffs.iter().all(|c| c.is_finite()) || !rate.is_finite() {
                    return Err(Error::invalid("tanh_poly family needs finite coefficients"));
                }
            }
            PhiFamily::Sinusoidal { amplitude, omega, phase } => {
                if ![*amplitude, *omega, *phase].iter().all(|c| c.is_finite()) {
                    return Err(Error::invalid("sinusoidal family needs finite parameters"));
                }
            }
            PhiFamily::Constant { value } if !value.is_finite() => {
                return Err(Error::invalid("constant family needs a finite value"));
            }
            _ => {}
        }
        let mut s = ConformalSurface {
            family,
            curvature_bound: 0.0,
            curvature_grad_bound: 0.0,
            max_curvature: 0.0,
            min_curvature: 0.0,
            transversal_sup: 0.0,
            use_exact_distance: true,
        };
        s.estimate_bounds();
        Ok(s)
    }

    /// The canonical pinched testbed: curvature in `[-1.5, -1]`, equal to
    /// `-1` far from the central geodesic and dipping near it.
    pub fn pinched() -> Self {
        ConformalSurface::new(PhiFamily::TanhPoly {
            coeffs: vec![-0.105, 0.0, 0.105],
            rate: 1.0,
        })
        .expect("valid built-in family")
    }

    pub fn upper_half_plane() -> Self {
        ConformalSurface::new(PhiFamily::LogConformal).expect("valid built-in family")
    }

    pub fn flat() -> Self {
        ConformalSurface::new(PhiFamily::Constant { value: 0.0 }).expect("valid built-in family")
    }

    pub fn family(&self) -> &PhiFamily {
        &self.family
    }

    /// Disable closed-form distances so every query exercises the shooting
    /// solver (used for cross-validation).
    pub fn without_exact_distance(mut self) -> Self {
        self.use_exact_distance = false;
        self
    }

    /// Domain restriction of the chart: half-plane families need `y > 0`.
    pub fn in_domain(&self, p: &Point) -> bool {
        match self.family {
            PhiFamily::Constant { .. } => true,
            _ => p.y > 0.0,
        }
    }

    /// Full 3-jet of `phi` at `(x, y)`.
    pub fn phi_jet(&self, x: f64, y: f64) -> Jet3 {
        match &self.family {
            PhiFamily::Constant { value } => Jet3::constant(*value),
            PhiFamily::LogConformal => Jet3::var_y(y).ln().scale(-1.0),
            PhiFamily::TanhPoly { coeffs, rate } => {
                let s = Jet3::var_x(x).div(&Jet3::var_y(y)).asinh();
                let t = s.scale(*rate).tanh();
                let mut acc = Jet3::constant(coeffs[0]);
                let mut pow = Jet3::constant(1.0);
                for c in &coeffs[1..] {
                    pow = pow.mul(&t);
                    acc = acc.add(&pow.scale(*c));
                }
                Jet3::var_y(y).ln().scale(-1.0).add(&acc)
            }
            PhiFamily::Sinusoidal { amplitude, omega, phase } => {
                let s = Jet3::var_x(x).div(&Jet3::var_y(y)).asinh();
                let osc = s
                    .scale(*omega)
                    .add(&Jet3::constant(*phase))
                    .sin()
                    .scale(*amplitude);
                Jet3::var_y(y).ln().scale(-1.0).add(&osc)
            }
        }
    }

    pub fn phi(&self, p: &Point) -> f64 {
        self.phi_jet(p.x, p.y).value()
    }

    /// Coordinate gradient `(phi_x, phi_y)`.
    pub fn phi_grad(&self, p: &Point) -> (f64, f64) {
        let j = self.phi_jet(p.x, p.y);
        (j.dx(), j.dy())
    }

    /// Gauss curvature `K = -e^{-2 phi} * Laplacian(phi)`.
    pub fn curvature(&self, p: &Point) -> f64 {
        let j = self.phi_jet(p.x, p.y);
        -(-2.0 * j.value()).exp() * j.laplacian()
    }

    /// Coordinate partials `(K_x, K_y)` of the curvature.
    pub fn curvature_coord_grad(&self, p: &Point) -> (f64, f64) {
        let j = self.phi_jet(p.x, p.y);
        let lap = j.laplacian();
        let (lx, ly) = j.laplacian_gradient();
        let w = (-2.0 * j.value()).exp();
        (-w * (lx - 2.0 * j.dx() * lap), -w * (ly - 2.0 * j.dy() * lap))
    }

    /// Metric norm of `grad K`.
    pub fn curvature_grad_norm(&self, p: &Point) -> f64 {
        let (kx, ky) = self.curvature_coord_grad(p);
        (-self.phi(p)).exp() * kx.hypot(ky)
    }

    /// Differential of `K` applied to a coordinate vector.
    pub fn curvature_directional(&self, p: &Point, v: (f64, f64)) -> f64 {
        let (kx, ky) = self.curvature_coord_grad(p);
        kx * v.0 + ky * v.1
    }

    pub fn conformal_factor(&self, p: &Point) -> f64 {
        self.phi(p).exp()
    }

    /// Metric norm of a coordinate vector at `p`.
    pub fn metric_norm(&self, p: &Point, v: (f64, f64)) -> f64 {
        self.conformal_factor(p) * v.0.hypot(v.1)
    }

    /// Metric inner product of coordinate vectors at `p`.
    pub fn metric_inner(&self, p: &Point, v: (f64, f64), w: (f64, f64)) -> f64 {
        let c = self.conformal_factor(p);
        c * c * (v.0 * w.0 + v.1 * w.1)
    }

    /// Coordinate vector of the metric-unit direction at angle `theta`.
    pub fn unit_vector(&self, p: &Point, theta: f64) -> (f64, f64) {
        let s = (-self.phi(p)).exp();
        (s * theta.cos(), s * theta.sin())
    }

    /// Closed-form distance for families that admit one.
    pub fn exact_distance(&self, p: &Point, q: &Point) -> Option<f64> {
        if !self.use_exact_distance {
            return None;
        }
        match &self.family {
            PhiFamily::Constant { value } => Some(value.exp() * p.euclid_dist(q)),
            PhiFamily::LogConformal => {
                let d2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
                Some((1.0 + d2 / (2.0 * p.y * q.y)).acosh())
            }
            _ => None,
        }
    }

    /// Closed-form unit-speed points along the geodesic from `p` to `q`,
    /// including both endpoints, for families that admit one.
    pub fn exact_geodesic_points(&self, p: &Point, q: &Point, n: usize) -> Option<Vec<(f64, Point)>> {
        if !self.use_exact_distance || n < 2 {
            return None;
        }
        match &self.family {
            PhiFamily::Constant { value } => {
                let len = value.exp() * p.euclid_dist(q);
                Some(
                    (0..n)
                        .map(|i| {
                            let f = i as f64 / (n - 1) as f64;
                            (
                                f * len,
                                Point::new(p.x + f * (q.x - p.x), p.y + f * (q.y - p.y)),
                            )
                        })
                        .collect(),
                )
            }
            PhiFamily::LogConformal => {
                if (p.x - q.x).abs() < 1e-12 * (1.0 + p.x.abs()) {
                    // vertical ray: c(t) = (x, y0 e^{sigma t})
                    let len = (q.y / p.y).ln().abs();
                    let sigma = if q.y > p.y { 1.0 } else { -1.0 };
                    return Some(
                        (0..n)
                            .map(|i| {
                                let t = len * i as f64 / (n - 1) as f64;
                                (t, Point::new(p.x, p.y * (sigma * t).exp()))
                            })
                            .collect(),
                    );
                }
                // semicircle orthogonal to the boundary; arclength parameter
                // along it is u = ln tan(alpha/2) with alpha the polar angle
                let c = (p.x * p.x + p.y * p.y - q.x * q.x - q.y * q.y) / (2.0 * (p.x - q.x));
                let r = (p.x - c).hypot(p.y);
                let up = (pt_angle(p, c) / 2.0).tan().ln();
                let uq = (pt_angle(q, c) / 2.0).tan().ln();
                Some(
                    (0..n)
                        .map(|i| {
                            let f = i as f64 / (n - 1) as f64;
                            let u = up + f * (uq - up);
                            let alpha = 2.0 * u.exp().atan();
                            let t = (u - up).abs();
                            (t, Point::new(c + r * alpha.cos(), r * alpha.sin()))
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    // Bound estimates sampled along the transversal parameter; exact for the
    // constant and log-conformal families.
    fn estimate_bounds(&mut self) {
        match &self.family {
            PhiFamily::Constant { .. } => {
                self.curvature_bound = 0.0;
                self.curvature_grad_bound = 0.0;
                self.max_curvature = 0.0;
                self.min_curvature = 0.0;
                self.transversal_sup = 0.0;
            }
            PhiFamily::LogConformal => {
                self.curvature_bound = 1.0;
                self.curvature_grad_bound = 0.0;
                self.max_curvature = -1.0;
                self.min_curvature = -1.0;
                self.transversal_sup = 0.0;
            }
            _ => {
                // K and |grad K| depend only on s = asinh(x/y); sample at y = 1
                let mut kmax = f64::NEG_INFINITY;
                let mut kmin = f64::INFINITY;
                let mut gmax: f64 = 0.0;
                let mut chi_sup = f64::NEG_INFINITY;
                let n = 4001;
                for i in 0..n {
                    let s = -20.0 + 40.0 * i as f64 / (n - 1) as f64;
                    let p = Point::new(s.sinh(), 1.0);
                    let k = self.curvature(&p);
                    kmax = kmax.max(k);
                    kmin = kmin.min(k);
                    gmax = gmax.max(self.curvature_grad_norm(&p));
                    chi_sup = chi_sup.max(self.phi(&p) + p.y.ln());
                }
                self.max_curvature = kmax;
                self.min_curvature = kmin;
                self.curvature_bound = kmax.abs().max(kmin.abs());
                self.curvature_grad_bound = gmax * 1.0001;
                self.transversal_sup = chi_sup + 1e-9;
            }
        }
    }
}

fn pt_angle(p: &Point, c: f64) -> f64 {
    p.y.atan2(p.x - c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn half_plane_curvature_is_minus_one() {
        let s = ConformalSurface::upper_half_plane();
        for &(x, y) in &[(0.0, 1.0), (3.0, 0.2), (-7.0, 11.0)] {
            assert!((s.curvature(&Point::new(x, y)) + 1.0).abs() < 1e-10);
        }
        assert_relative_eq!(s.curvature_bound, 1.0);
    }

    #[test]
    fn curvature_matches_finite_difference_of_phi() {
        // K from jet derivatives vs a central-difference Laplacian of phi
        let surfaces = [
            ConformalSurface::pinched(),
            ConformalSurface::new(PhiFamily::Sinusoidal {
                amplitude: 0.05,
                omega: 1.3,
                phase: 0.4,
            })
            .unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for s in &surfaces {
            for _ in 0..20 {
                let x: f64 = rng.gen_range(-3.0..3.0);
                let y: f64 = rng.gen_range(0.5..4.0);
                let h = 1e-4 * y;
                let phi = |x: f64, y: f64| s.phi(&Point::new(x, y));
                let lap = (phi(x + h, y) + phi(x - h, y) + phi(x, y + h) + phi(x, y - h)
                    - 4.0 * phi(x, y))
                    / (h * h);
                let k_fd = -(-2.0 * phi(x, y)).exp() * lap;
                let k = s.curvature(&Point::new(x, y));
                assert_relative_eq!(k, k_fd, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn pinched_family_stays_in_band() {
        let s = ConformalSurface::pinched();
        assert!(s.min_curvature >= -1.5, "min K = {}", s.min_curvature);
        assert!(s.max_curvature <= -1.0 + 1e-9, "max K = {}", s.max_curvature);
        // representative points across the plane, not only the sample line
        for &(x, y) in &[(0.0, 1.0), (0.5, 0.01), (40.0, 2.0), (-3.0, 800.0)] {
            let k = s.curvature(&Point::new(x, y));
            assert!((-1.5..=-1.0 + 1e-9).contains(&k), "K({x},{y}) = {k}");
        }
        assert!(s.curvature_grad_bound > 0.0);
    }

    #[test]
    fn exact_distance_against_known_values() {
        let uhp = ConformalSurface::upper_half_plane();
        let d = uhp
            .exact_distance(&Point::new(0.0, 1.0), &Point::new(0.0, std::f64::consts::E))
            .unwrap();
        assert_relative_eq!(d, 1.0, max_relative = 1e-12);

        let flat = ConformalSurface::flat();
        let d = flat
            .exact_distance(&Point::new(0.0, 0.0), &Point::new(3.0, 4.0))
            .unwrap();
        assert_relative_eq!(d, 5.0);

        assert!(ConformalSurface::pinched()
            .exact_distance(&Point::new(0.0, 1.0), &Point::new(1.0, 1.0))
            .is_none());
    }

    #[test]
    fn exact_geodesic_points_have_unit_spacing() {
        let uhp = ConformalSurface::upper_half_plane();
        let p = Point::new(-1.0, 0.7);
        let q = Point::new(2.0, 1.9);
        let pts = uhp.exact_geodesic_points(&p, &q, 33).unwrap();
        let total = uhp.exact_distance(&p, &q).unwrap();
        assert_relative_eq!(pts.last().unwrap().0, total, max_relative = 1e-9);
        for w in pts.windows(2) {
            let d = uhp.exact_distance(&w[0].1, &w[1].1).unwrap();
            assert_relative_eq!(d, total / 32.0, max_relative = 1e-8);
        }
    }
}
