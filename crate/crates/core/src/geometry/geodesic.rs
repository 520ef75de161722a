//! Geodesics on conformal surfaces: initial-value integration, the
//! two-point boundary problem by shooting over the initial angle, and
//! Busemann function values.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ode::{self, CubicHermite, OdeOptions};

use super::profile::CurvatureProfile;
use super::surface::{ConformalSurface, Point};

/// One sample of a geodesic path: parameter, position, coordinate velocity.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

/// A unit-speed geodesic sampled densely over a parameter interval.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
    dense: CubicHermite,
    pub footpoint: Point,
    pub theta: f64,
    pub t_span: (f64, f64),
    pub unit_speed: bool,
}

impl GeodesicPath {
    pub fn point(&self, t: f64) -> Point {
        let v = self.dense.eval(t);
        Point::new(v[0], v[1])
    }

    /// Coordinate velocity at parameter `t`.
    pub fn velocity(&self, t: f64) -> (f64, f64) {
        let v = self.dense.eval(t);
        (v[2], v[3])
    }

    /// Largest deviation of the metric speed from 1 over the samples.
    pub fn speed_defect(&self, surface: &ConformalSurface) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                (surface.metric_norm(&Point::new(s.x, s.y), (s.vx, s.vy)) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative residual of the geodesic equation over the interior
    /// samples, by re-substitution: the sampled velocity is differentiated
    /// with a five-point stencil and compared against the right-hand side.
    pub fn equation_defect(&self, surface: &ConformalSurface) -> f64 {
        let mut worst = 0.0f64;
        if self.samples.len() < 5 {
            return worst;
        }
        for w in self.samples.windows(5) {
            let h = w[1].t - w[0].t;
            if (0..4).any(|i| ((w[i + 1].t - w[i].t) - h).abs() > 1e-9 * (1.0 + h.abs())) {
                continue; // non-uniform joins near the origin
            }
            let d5 = |f: [f64; 5]| (-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * h);
            let ax_fd = d5([w[0].vx, w[1].vx, w[2].vx, w[3].vx, w[4].vx]);
            let ay_fd = d5([w[0].vy, w[1].vy, w[2].vy, w[3].vy, w[4].vy]);
            let (ax, ay) = geodesic_accel(surface, &Point::new(w[2].x, w[2].y), (w[2].vx, w[2].vy));
            worst = worst.max((ax_fd - ax).hypot(ay_fd - ay) / (1.0 + ax.hypot(ay)));
        }
        worst
    }
}

fn geodesic_accel(surface: &ConformalSurface, p: &Point, v: (f64, f64)) -> (f64, f64) {
    let (px, py) = surface.phi_grad(p);
    let (vx, vy) = v;
    (
        -px * (vx * vx - vy * vy) - 2.0 * py * vx * vy,
        -py * (vy * vy - vx * vx) - 2.0 * px * vx * vy,
    )
}

fn geodesic_rhs(surface: &ConformalSurface) -> impl FnMut(f64, &DVector<f64>, &mut DVector<f64>) + '_ {
    move |_t, y, dy| {
        let p = Point::new(y[0], y[1]);
        let (ax, ay) = geodesic_accel(surface, &p, (y[2], y[3]));
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = ax;
        dy[3] = ay;
    }
}

fn geodesic_opts(tol: f64) -> OdeOptions {
    OdeOptions {
        rtol: tol,
        atol: tol * 1e-2,
        ..Default::default()
    }
}

/// Unit-speed geodesic through `p` with initial angle `theta` over `[-T, T]`,
/// together with the scalar curvature profile `t -> K(c(t))` it induces.
pub fn surface_geodesic(
    surface: &Arc<ConformalSurface>,
    p: Point,
    theta: f64,
    t_extent: f64,
    tol: f64,
) -> Result<(Arc<GeodesicPath>, CurvatureProfile)> {
    if t_extent <= 0.0 || tol <= 0.0 {
        return Err(Error::invalid("surface_geodesic needs T > 0 and tol > 0"));
    }
    if !surface.in_domain(&p) {
        return Err(Error::invalid(format!("footpoint ({}, {}) outside chart", p.x, p.y)));
    }
    let path = integrate_geodesic(surface, p, surface.unit_vector(&p, theta), -t_extent, t_extent, tol)?;
    let mut path = path;
    path.theta = theta;
    let path = Arc::new(path);
    let profile = CurvatureProfile::surface_borne(surface.clone(), path.clone());
    Ok((path, profile))
}

/// Integrate a geodesic from `p` with coordinate velocity `v0` over
/// `[t_lo, t_hi]` (the interval must contain 0).
pub fn integrate_geodesic(
    surface: &ConformalSurface,
    p: Point,
    v0: (f64, f64),
    t_lo: f64,
    t_hi: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    assert!(t_lo <= 0.0 && t_hi >= 0.0);
    let y0 = DVector::from_column_slice(&[p.x, p.y, v0.0, v0.1]);
    let opts = geodesic_opts(tol).dense();
    let grid_h = 0.01;

    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut dys = Vec::new();
    if t_lo < 0.0 {
        let grid = ode::uniform_grid(0.0, t_lo, grid_h);
        let mut f = geodesic_rhs(surface);
        let sol = ode::solve(&mut f, 0.0, &y0, &grid, &opts, "geodesic (backward)")?;
        let mut g: Vec<_> = sol
            .grid_ts
            .iter()
            .zip(sol.grid_ys.iter().zip(sol.grid_dys.iter()))
            .map(|(t, (y, dy))| (*t, y.clone(), dy.clone()))
            .collect();
        g.reverse();
        for (t, y, dy) in g {
            ts.push(t);
            ys.push(y);
            dys.push(dy);
        }
        // drop duplicated origin; the forward sweep re-adds it
        ts.pop();
        ys.pop();
        dys.pop();
    }
    {
        let grid = ode::uniform_grid(0.0, t_hi.max(grid_h), grid_h);
        let mut f = geodesic_rhs(surface);
        let sol = ode::solve(&mut f, 0.0, &y0, &grid, &opts, "geodesic (forward)")?;
        for (t, (y, dy)) in sol.grid_ts.iter().zip(sol.grid_ys.iter().zip(sol.grid_dys.iter())) {
            ts.push(*t);
            ys.push(y.clone());
            dys.push(dy.clone());
        }
    }
    let samples = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| GeodesicSample { t: *t, x: y[0], y: y[1], vx: y[2], vy: y[3] })
        .collect();
    Ok(GeodesicPath {
        samples,
        dense: CubicHermite::new(ts, ys, dys),
        footpoint: p,
        theta: v0.1.atan2(v0.0),
        t_span: (t_lo, t_hi),
        unit_speed: true,
    })
}

/// Exponential map: flow from `p` along the metric-unit direction with angle
/// `theta` for length `t`; returns the endpoint and its coordinate velocity.
pub fn flow(
    surface: &ConformalSurface,
    p: Point,
    theta: f64,
    t: f64,
    tol: f64,
) -> Result<(Point, (f64, f64))> {
    let v0 = surface.unit_vector(&p, theta);
    let y0 = DVector::from_column_slice(&[p.x, p.y, v0.0, v0.1]);
    let mut f = geodesic_rhs(surface);
    let (y, _) = ode::solve_to(&mut f, 0.0, &y0, t, &geodesic_opts(tol), "flow")?;
    Ok((Point::new(y[0], y[1]), (y[2], y[3])))
}

struct Shot {
    /// Arclength of the closest approach to the target.
    t_star: f64,
    /// Chordal-metric estimate of the miss distance.
    miss: f64,
    /// Which side of the geodesic the target lies on at closest approach.
    side: f64,
}

// Chordal proxy |c - q| * e^{(phi(c) + phi(q))/2}: monotone in the true
// distance near 0 and exactly monotone on the unperturbed half-plane.
fn chordal(surface: &ConformalSurface, a: &Point, phi_a: f64, q: &Point, phi_q: f64) -> f64 {
    let _ = surface;
    a.euclid_dist(q) * (0.5 * (phi_a + phi_q)).exp()
}

fn shoot(
    surface: &ConformalSurface,
    p: Point,
    theta: f64,
    q: &Point,
    l_max: f64,
    tol: f64,
) -> Result<Shot> {
    let v0 = surface.unit_vector(&p, theta);
    let y0 = DVector::from_column_slice(&[p.x, p.y, v0.0, v0.1]);
    let opts = geodesic_opts(tol).dense();
    let grid = ode::uniform_grid(0.0, l_max, 0.25);
    let mut f = geodesic_rhs(surface);
    let sol = ode::solve(&mut f, 0.0, &y0, &grid, &opts, "shooting")?;
    let phi_q = surface.phi(q);

    let mut best_t = 0.0;
    let mut best = f64::INFINITY;
    for (t, y) in sol.grid_ts.iter().zip(&sol.grid_ys) {
        let a = Point::new(y[0], y[1]);
        let d = chordal(surface, &a, surface.phi(&a), q, phi_q);
        if d < best {
            best = d;
            best_t = *t;
        }
    }
    // golden-section refinement on the dense path around the best grid node
    let eval = |t: f64| -> f64 {
        let v = sol.dense.eval(t);
        let a = Point::new(v[0], v[1]);
        chordal(surface, &a, surface.phi(&a), q, phi_q)
    };
    let (mut lo, mut hi) = ((best_t - 0.3).max(0.0), (best_t + 0.3).min(l_max));
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - gr * (hi - lo), lo + gr * (hi - lo));
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = eval(d);
        }
        if hi - lo < 1e-13 * (1.0 + best_t) {
            break;
        }
    }
    let t_star = 0.5 * (lo + hi);
    let state = sol.dense.eval(t_star);
    let cpt = Point::new(state[0], state[1]);
    let miss_chordal = chordal(surface, &cpt, surface.phi(&cpt), q, phi_q);
    // convert the chordal value to a metric length (second order accurate)
    let miss = 2.0 * (0.5 * miss_chordal).asinh();
    let cross = state[2] * (q.y - cpt.y) - state[3] * (q.x - cpt.x);
    Ok(Shot { t_star, miss, side: if cross >= 0.0 { 1.0 } else { -1.0 } })
}

/// Upper bound for the distance from the metric length of the coordinate
/// segment. For half-plane families the conformal factor is at most
/// `e^{chi_sup} / y` and `y` is affine along the segment, so the bound is
/// the closed-form logarithmic integral; a quadrature would misbehave when
/// the segment spans many orders of magnitude in `y`.
fn segment_length(surface: &ConformalSurface, p: &Point, q: &Point) -> f64 {
    let chord = p.euclid_dist(q);
    match surface.family() {
        crate::geometry::PhiFamily::Constant { value } => value.exp() * chord,
        _ => {
            let log_part = if (p.y - q.y).abs() < 1e-12 * p.y.max(q.y) {
                chord / p.y.min(q.y)
            } else {
                chord * (q.y / p.y).ln().abs() / (q.y - p.y).abs()
            };
            surface.transversal_sup.exp() * log_part
        }
    }
}

/// Distance between two points by shooting over the initial angle.
///
/// Uses the closed form when the family provides one; otherwise brackets the
/// aiming angle around the coordinate chord, bisects on the side of the miss,
/// and polishes with secant steps. Shooting failures are explicit errors.
pub fn surface_distance(surface: &ConformalSurface, p: Point, q: Point, tol: f64) -> Result<f64> {
    if !surface.in_domain(&p) || !surface.in_domain(&q) {
        return Err(Error::invalid("distance endpoints must lie in the chart"));
    }
    if p.euclid_dist(&q) == 0.0 {
        return Ok(0.0);
    }
    if let Some(d) = surface.exact_distance(&p, &q) {
        return Ok(d);
    }
    let shot = solve_shooting(surface, p, q, tol)?;
    Ok(shot.1)
}

/// The minimizing geodesic from `p` to `q` as a path (generic families only
/// go through the shooting solver).
pub fn geodesic_between(
    surface: &ConformalSurface,
    p: Point,
    q: Point,
    tol: f64,
) -> Result<GeodesicPath> {
    let (theta, d) = solve_shooting(surface, p, q, tol)?;
    let v0 = surface.unit_vector(&p, theta);
    integrate_geodesic(surface, p, v0, 0.0, d, tol.min(1e-10))
}

fn solve_shooting(surface: &ConformalSurface, p: Point, q: Point, tol: f64) -> Result<(f64, f64)> {
    let ode_tol = (tol * 1e-2).clamp(1e-12, 1e-10);
    let l_max = segment_length(surface, &p, &q) * 1.02 + 0.5;
    let theta_chord = (q.y - p.y).atan2(q.x - p.x);
    let max_iters = 110usize;

    let miss_of = |theta: f64| -> Result<Shot> { shoot(surface, p, theta, &q, l_max, ode_tol) };

    // bracket: chord angle +- pi/2, widened progressively on failure
    let mut half_width = std::f64::consts::FRAC_PI_2;
    let (mut th_lo, mut th_hi, s_lo);
    loop {
        th_lo = theta_chord - half_width;
        th_hi = theta_chord + half_width;
        let shot_lo = miss_of(th_lo)?;
        let shot_hi = miss_of(th_hi)?;
        if shot_lo.side * shot_hi.side < 0.0 {
            s_lo = shot_lo.side;
            break;
        }
        half_width *= 1.4;
        if half_width > std::f64::consts::PI {
            return Err(Error::ShootingFailed { iters: 0, miss: shot_lo.miss.min(shot_hi.miss) });
        }
    }

    let mut best: Option<Shot> = None;
    let mut iters = 0usize;
    while iters < max_iters {
        iters += 1;
        let mid = 0.5 * (th_lo + th_hi);
        let shot = miss_of(mid)?;
        let done = shot.miss < tol * (1.0 + shot.t_star);
        let better = best.as_ref().is_none_or(|b| shot.miss < b.miss);
        if better {
            best = Some(Shot { t_star: shot.t_star, miss: shot.miss, side: shot.side });
        }
        if done || (th_hi - th_lo) < 1e-15 {
            let b = best.unwrap();
            if b.miss < tol.max(1e-7) * (1.0 + b.t_star) {
                let theta = 0.5 * (th_lo + th_hi);
                return Ok((theta, b.t_star));
            }
            return Err(Error::ShootingFailed { iters, miss: b.miss });
        }
        if shot.side * s_lo > 0.0 {
            th_lo = mid;
        } else {
            th_hi = mid;
        }
    }
    let miss = best.map_or(f64::INFINITY, |b| b.miss);
    Err(Error::ShootingFailed { iters, miss })
}

/// A Busemann function value with its convergence diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct BusemannValue {
    pub value: f64,
    /// `|b(T) - b(T/2)|`, a Cauchy estimate of the horizon error.
    pub cauchy: f64,
    pub converged: bool,
}

/// Busemann value `b_v(q) ~ d(c_v(T), q) - T` for the ray from `p` with angle
/// `theta`, with a Richardson check at half the horizon.
pub fn busemann_value(
    surface: &ConformalSurface,
    p: Point,
    theta: f64,
    q: Point,
    horizon: f64,
) -> Result<BusemannValue> {
    if horizon < 10.0 {
        return Err(Error::precondition("busemann horizon must be at least 10"));
    }
    if surface.max_curvature >= 0.0 {
        return Err(Error::precondition(
            "busemann values need strictly negative curvature",
        ));
    }
    let tol = 1e-10;
    let (end_full, _) = flow(surface, p, theta, horizon, tol)?;
    let (end_half, _) = flow(surface, p, theta, 0.5 * horizon, tol)?;
    let b_full = surface_distance(surface, end_full, q, tol)? - horizon;
    let b_half = surface_distance(surface, end_half, q, tol)? - 0.5 * horizon;
    let cauchy = (b_full - b_half).abs();
    Ok(BusemannValue { value: b_full, cauchy, converged: cauchy < 1e-4 })
}
