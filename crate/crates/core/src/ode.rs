//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! The solver steps with per-step mixed absolute/relative error control,
//! lands exactly on every requested output point, and keeps the accepted
//! step endpoints (value and derivative) so the solution can be evaluated
//! anywhere by cubic Hermite interpolation between accepted steps.
//! Integration may run in either time direction.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Tolerances and limits for one integration run.
#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Per-step relative tolerance.
    pub rtol: f64,
    /// Per-step absolute tolerance.
    pub atol: f64,
    /// Cap on the step magnitude.
    pub h_max: f64,
    /// Optional initial step magnitude; estimated from the data when absent.
    pub h_init: Option<f64>,
    /// Hard cap on the number of attempted steps.
    pub max_steps: usize,
    /// Keep accepted-step knots for dense interpolation.
    pub store_dense: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-13,
            h_max: f64::INFINITY,
            h_init: None,
            max_steps: 4_000_000,
            store_dense: false,
        }
    }
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        OdeOptions { rtol, atol: rtol * 1e-2, ..Default::default() }
    }

    pub fn dense(mut self) -> Self {
        self.store_dense = true;
        self
    }
}

/// Piecewise cubic Hermite interpolant over knots with stored derivatives.
#[derive(Debug, Clone, Default)]
pub struct CubicHermite {
    ts: Vec<f64>,
    ys: Vec<DVector<f64>>,
    dys: Vec<DVector<f64>>,
}

impl CubicHermite {
    pub fn new(ts: Vec<f64>, ys: Vec<DVector<f64>>, dys: Vec<DVector<f64>>) -> Self {
        debug_assert!(ts.windows(2).all(|w| w[1] > w[0]), "knots must ascend");
        CubicHermite { ts, ys, dys }
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.ts[0], self.ts[self.ts.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(0) => 0,
            Err(i) if i >= self.ts.len() => self.ts.len() - 2,
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        self.eval_with_deriv(t).0
    }

    pub fn eval_with_deriv(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        assert!(!self.is_empty(), "empty interpolant");
        let i = self.segment(t);
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (&self.ys[i], &self.ys[i + 1]);
        let (m0, m1) = (&self.dys[i], &self.dys[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let val = y0 * h00 + m0 * (h10 * h) + y1 * h01 + m1 * (h11 * h);
        let d00 = 6.0 * s * (s - 1.0) / h;
        let d10 = (1.0 - s) * (1.0 - 3.0 * s);
        let d01 = -d00;
        let d11 = s * (3.0 * s - 2.0);
        let deriv = y0 * d00 + m0 * d10 + y1 * d01 + m1 * d11;
        (val, deriv)
    }
}

/// Integration output: values at the requested grid plus the dense knots.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub grid_ts: Vec<f64>,
    pub grid_ys: Vec<DVector<f64>>,
    pub grid_dys: Vec<DVector<f64>>,
    pub dense: CubicHermite,
    pub n_accepted: usize,
    pub n_rejected: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th and embedded 4th order weights (k7 included).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAGNITUDE_GUARD: f64 = 1e250;

/// Right-hand side `f(t, y, dy)` writing the derivative into `dy`.
pub type OdeRhs<'a> = &'a mut dyn FnMut(f64, &DVector<f64>, &mut DVector<f64>);

/// Integrate `y' = f(t, y)` from `t0`, reporting the solution at `outputs`.
///
/// `outputs` must be strictly monotone and lie on one side of `t0` (the first
/// entry may equal `t0`); the integration direction follows them.
pub fn solve(
    f: OdeRhs,
    t0: f64,
    y0: &DVector<f64>,
    outputs: &[f64],
    opts: &OdeOptions,
    context: &str,
) -> Result<OdeSolution> {
    if outputs.is_empty() {
        return Err(Error::invalid("no output points requested"));
    }
    let t_end = *outputs.last().unwrap();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    for w in outputs.windows(2) {
        if (w[1] - w[0]) * dir <= 0.0 {
            return Err(Error::invalid("output points must be strictly monotone"));
        }
    }
    if (outputs[0] - t0) * dir < 0.0 {
        return Err(Error::invalid("output points must lie in the integration direction"));
    }

    let n = y0.len();
    let mut t = t0;
    let mut y = y0.clone();
    let mut k: Vec<DVector<f64>> = (0..7).map(|_| DVector::zeros(n)).collect();
    let mut y_stage = DVector::zeros(n);
    f(t, &y, &mut k[0]);

    let mut sol = OdeSolution {
        grid_ts: Vec::with_capacity(outputs.len()),
        grid_ys: Vec::with_capacity(outputs.len()),
        grid_dys: Vec::with_capacity(outputs.len()),
        dense: CubicHermite::default(),
        n_accepted: 0,
        n_rejected: 0,
    };
    let mut knot_ts = Vec::new();
    let mut knot_ys = Vec::new();
    let mut knot_dys = Vec::new();
    if opts.store_dense {
        knot_ts.push(t);
        knot_ys.push(y.clone());
        knot_dys.push(k[0].clone());
    }

    let mut out_idx = 0;
    if (outputs[0] - t0).abs() == 0.0 {
        sol.grid_ts.push(t0);
        sol.grid_ys.push(y.clone());
        sol.grid_dys.push(k[0].clone());
        out_idx = 1;
    }

    let mut h = opts.h_init.unwrap_or_else(|| initial_step(&y, &k[0], opts)) * dir;
    let mut steps = 0usize;

    while out_idx < outputs.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepLimit { t, context: context.to_string() });
        }
        if h.abs() > opts.h_max {
            h = opts.h_max * dir;
        }
        // land exactly on the next requested output
        let t_next = outputs[out_idx];
        let mut hitting = false;
        if (t + h - t_next) * dir >= 0.0 {
            h = t_next - t;
            hitting = true;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow { t, context: context.to_string() });
        }

        for i in 1..7 {
            y_stage.copy_from(&y);
            for j in 0..i {
                if A[i][j] != 0.0 {
                    y_stage.axpy(h * A[i][j], &k[j], 1.0);
                }
            }
            let ts = t + C[i] * h;
            let (head, tail) = k.split_at_mut(i);
            let _ = head;
            f(ts, &y_stage, &mut tail[0]);
        }
        // k[6] = f(t + h, y_new) because the last stage row equals b.
        let y_new = {
            let mut v = y.clone();
            for j in 0..6 {
                if A[6][j] != 0.0 {
                    v.axpy(h * A[6][j], &k[j], 1.0);
                }
            }
            v
        };
        // recompute k7 at y_new for FSAL / dense derivative
        {
            let (head, tail) = k.split_at_mut(6);
            let _ = head;
            f(t + h, &y_new, &mut tail[0]);
        }

        let mut err_sq = 0.0;
        let mut finite = true;
        for i in 0..n {
            let mut e = 0.0;
            for (j, w) in E.iter().enumerate() {
                e += w * k[j][i];
            }
            e *= h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / sc;
            if !r.is_finite() {
                finite = false;
                break;
            }
            err_sq += r * r;
        }
        let err_norm = if finite { (err_sq / n as f64).sqrt() } else { f64::INFINITY };

        if err_norm <= 1.0 {
            t = if hitting { t_next } else { t + h };
            y = y_new;
            k.swap(0, 6);
            sol.n_accepted += 1;
            if y.amax() > MAGNITUDE_GUARD {
                return Err(Error::StepUnderflow {
                    t,
                    context: format!("{context}: solution magnitude exceeded {MAGNITUDE_GUARD:.0e}"),
                });
            }
            if opts.store_dense {
                knot_ts.push(t);
                knot_ys.push(y.clone());
                knot_dys.push(k[0].clone());
            }
            if hitting {
                sol.grid_ts.push(t);
                sol.grid_ys.push(y.clone());
                sol.grid_dys.push(k[0].clone());
                out_idx += 1;
            }
            let scale = (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * scale).clamp(-opts.h_max, opts.h_max);
        } else {
            sol.n_rejected += 1;
            let scale = (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
            h *= scale;
        }
    }

    if opts.store_dense {
        if dir < 0.0 {
            knot_ts.reverse();
            knot_ys.reverse();
            knot_dys.reverse();
        }
        sol.dense = CubicHermite::new(knot_ts, knot_ys, knot_dys);
    }
    Ok(sol)
}

/// Integrate to a single endpoint, returning `(y, y')` there.
pub fn solve_to(
    f: OdeRhs,
    t0: f64,
    y0: &DVector<f64>,
    t1: f64,
    opts: &OdeOptions,
    context: &str,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if t1 == t0 {
        let mut dy = DVector::zeros(y0.len());
        f(t0, y0, &mut dy);
        return Ok((y0.clone(), dy));
    }
    let sol = solve(f, t0, y0, &[t1], opts, context)?;
    Ok((sol.grid_ys[0].clone(), sol.grid_dys[0].clone()))
}

/// Uniform grid from `a` to `b` (inclusive) with spacing at most `h_target`.
pub fn uniform_grid(a: f64, b: f64, h_target: f64) -> Vec<f64> {
    assert!(h_target > 0.0);
    let span = (b - a).abs();
    if span == 0.0 {
        return vec![a];
    }
    let n = (span / h_target).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut g: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    g[n] = b;
    g
}

fn initial_step(y0: &DVector<f64>, f0: &DVector<f64>, opts: &OdeOptions) -> f64 {
    let sc = |v: &DVector<f64>| -> f64 {
        let s: f64 = v
            .iter()
            .map(|x| {
                let sc = opts.atol + opts.rtol * x.abs();
                (x / sc) * (x / sc)
            })
            .sum();
        (s / v.len() as f64).sqrt()
    };
    let d0 = sc(y0);
    let d1 = sc(f0);
    let h = if d0 > 1e-5 && d1 > 1e-5 { 0.01 * d0 / d1 } else { 1e-6 };
    h.min(opts.h_max).max(1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_forward_and_backward() {
        let opts = OdeOptions::default();
        let y0 = DVector::from_column_slice(&[1.0]);
        let mut f = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| dy[0] = y[0];
        let (y1, _) = solve_to(&mut f, 0.0, &y0, 3.0, &opts, "exp").unwrap();
        assert_relative_eq!(y1[0], 3f64.exp(), max_relative = 1e-10);
        let (yb, _) = solve_to(&mut f, 0.0, &y0, -2.0, &opts, "exp").unwrap();
        assert_relative_eq!(yb[0], (-2f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn harmonic_oscillator_on_grid() {
        let opts = OdeOptions::default().dense();
        let y0 = DVector::from_column_slice(&[0.0, 1.0]);
        let mut f = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let grid = uniform_grid(0.0, 10.0, 0.05);
        let sol = solve(&mut f, 0.0, &y0, &grid, &opts, "sin").unwrap();
        for (t, y) in sol.grid_ts.iter().zip(&sol.grid_ys) {
            assert_relative_eq!(y[0], t.sin(), epsilon = 1e-9);
        }
        // dense interpolation between grid points
        let (v, d) = sol.dense.eval_with_deriv(3.777);
        assert_relative_eq!(v[0], 3.777f64.sin(), epsilon = 1e-8);
        assert_relative_eq!(d[0], 3.777f64.cos(), epsilon = 1e-7);
    }

    #[test]
    fn underflow_reports_location() {
        // y' = y^2 blows up at t = 1 from y(0) = 1
        let opts = OdeOptions::default();
        let y0 = DVector::from_column_slice(&[1.0]);
        let mut f = |_t: f64, y: &DVector<f64>, dy: &mut DVector<f64>| dy[0] = y[0] * y[0];
        let err = solve_to(&mut f, 0.0, &y0, 2.0, &opts, "blowup").unwrap_err();
        match err {
            Error::StepUnderflow { t, .. } => assert!((t - 1.0).abs() < 0.05, "t = {t}"),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
