//! Stable and unstable objects as limits of boundary data.
//!
//! `S(v) = lim_{r} S_{v,r}'(0)` is approached by doubling `r`; convergence is
//! monotone, exponential when the difference form is uniformly positive and
//! only harmonic (`~ a/r`) in flat directions. Harmonic tails are detected
//! from the increment ratios and removed by entrywise extrapolation.
//!
//! Path objects on the stable side are reconstructed by integrating the
//! linear system `Y' = V(t) Y` jointly with the Riccati branch in the
//! direction in which that branch attracts; this never mixes in the opposite
//! exponential mode, so stable tensors remain accurate over long windows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg;
use crate::ode::{self, OdeOptions};

use super::boundary::{boundary_derivative_s, two_section_grid};
use super::paths::{finalize_path, JacobiTensorPath, TensorRole};
use super::riccati::RiccatiPath;

/// Controls for the `r -> infinity` limits.
#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Cauchy tolerance on the increment between doublings.
    pub tol: f64,
    /// First radius of the doubling sequence.
    pub r0: f64,
    /// Largest admissible radius.
    pub r_max: f64,
    pub ode: OdeOptions,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { tol: 1e-10, r0: 8.0, r_max: 16384.0, ode: OdeOptions::default() }
    }
}

/// Result of the stable limit with its convergence diagnostics.
#[derive(Debug, Clone)]
pub struct StableLimit {
    /// Best estimate of `S(v) = S_v'(0)` (extrapolated when the tail is harmonic).
    pub matrix: DMatrix<f64>,
    /// Raw boundary derivative at the final radius.
    pub raw: DMatrix<f64>,
    pub r_star: f64,
    pub converged: bool,
    /// A `~ a/r` tail was detected and extrapolated away.
    pub slow_convergence: bool,
    /// Norm of the final increment.
    pub cauchy: f64,
    /// The monotone trace `(r, S_{v,r}'(0))`.
    pub trace: Vec<(f64, DMatrix<f64>)>,
    /// Most negative eigenvalue seen among increments (monotonicity defect).
    pub monotone_defect: f64,
    /// Empirical `(r, r * |S(v) - S_{v,r}'(0)|)` table.
    pub ar_ratios: Vec<(f64, f64)>,
}

/// `S(v)` by doubling the boundary radius until the increments pass `tol`.
pub fn stable_limit(profile: &CurvatureProfile, opts: &LimitOptions) -> Result<StableLimit> {
    let mut r_max = opts.r_max;
    let mut r0 = opts.r0;
    if let Some((_, hi)) = profile.domain() {
        r_max = r_max.min(hi - 0.5);
        if r_max < 4.0 {
            return Err(Error::precondition(format!(
                "profile domain too short for stable limits (usable r_max = {r_max:.2})"
            )));
        }
        while r0 > r_max / 2.0 {
            r0 /= 2.0;
        }
    }

    let mut trace: Vec<(f64, DMatrix<f64>)> = Vec::new();
    let mut monotone_defect = 0.0f64;
    let mut increments: Vec<f64> = Vec::new();
    let mut r = r0;
    let (mut converged, mut cauchy) = (false, f64::INFINITY);
    loop {
        let w = boundary_derivative_s(profile, r, &opts.ode)?;
        if let Some((_, prev)) = trace.last() {
            let d = &w - prev;
            cauchy = linalg::op_norm(&d);
            monotone_defect = monotone_defect.max(-linalg::min_eigenvalue(&d));
            increments.push(cauchy);
        }
        trace.push((r, w));
        if cauchy < opts.tol {
            converged = true;
            break;
        }
        if r * 2.0 > r_max {
            break;
        }
        r *= 2.0;
    }

    let raw = trace.last().unwrap().1.clone();
    let r_star = trace.last().unwrap().0;
    let slow = !converged
        && increments.len() >= 2
        && increments
            .windows(2)
            .rev()
            .take(2)
            .all(|w| w[0] > 0.0 && (0.35..=0.65).contains(&(w[1] / w[0])));
    let matrix = if slow && trace.len() >= 3 {
        let k = trace.len();
        aitken(&trace[k - 3].1, &trace[k - 2].1, &trace[k - 1].1)
    } else {
        raw.clone()
    };
    let ar_ratios = trace
        .iter()
        .map(|(r, w)| (*r, *r * linalg::op_norm(&(&matrix - w))))
        .collect();
    Ok(StableLimit {
        matrix,
        raw,
        r_star,
        converged,
        slow_convergence: slow,
        cauchy,
        trace,
        monotone_defect,
        ar_ratios,
    })
}

// entrywise Aitken delta-squared over three successive doublings
fn aitken(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = c.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let den = c[(i, j)] - 2.0 * b[(i, j)] + a[(i, j)];
            let num = c[(i, j)] - b[(i, j)];
            if den.abs() > 1e-14 * (1.0 + c[(i, j)].abs()) {
                out[(i, j)] = c[(i, j)] - num * num / den;
            }
        }
    }
    out
}

// Anchor time for the stable branch beyond `t`. On windowed profiles the
// anchored limit solve needs its own radius window past the anchor, and any
// anchor inaccuracy contracts during the backward sweep, so the available
// room is split between the two.
fn anchor_above(profile: &CurvatureProfile, t: f64) -> Result<f64> {
    match profile.domain() {
        None => Ok(t + 15.0),
        Some((_, hi)) => {
            let available = hi - 0.5 - t;
            let margin = 15f64.min(available - 4.5);
            if margin < 3.0 {
                return Err(Error::precondition(format!(
                    "profile domain leaves no room to anchor the stable branch beyond t = {t}"
                )));
            }
            Ok(t + margin)
        }
    }
}

/// The stable Riccati branch `t -> S(phi^t v)` on `[t_lo, t_hi]`, anchored at
/// a limit solve beyond `t_hi` and carried backward (the attracting
/// direction for this branch).
pub fn stable_branch_path(
    profile: &CurvatureProfile,
    t_lo: f64,
    t_hi: f64,
    grid_h: f64,
    opts: &LimitOptions,
) -> Result<RiccatiPath> {
    let anchor = anchor_above(profile, t_hi)?;
    let v_anchor = stable_limit(&profile.shifted(anchor), opts)?.matrix;
    let mut outputs: Vec<f64> = ode::uniform_grid(t_lo, t_hi, grid_h);
    outputs.reverse();
    if (outputs[0] - anchor).abs() > 1e-12 {
        outputs.insert(0, anchor);
    }
    let mut f = super::riccati::riccati_rhs(profile);
    let y0 = DVector::from_column_slice(v_anchor.as_slice());
    let sol = ode::solve(&mut f, anchor, &y0, &outputs, &opts.ode, "stable branch")?;
    let m = profile.normal_dim();
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for (t, y) in sol.grid_ts.iter().zip(&sol.grid_ys).rev() {
        if *t > t_hi + 1e-12 {
            continue;
        }
        ts.push(*t);
        values.push(linalg::symmetrize(&DMatrix::from_column_slice(m, m, y.as_slice())));
    }
    Ok(RiccatiPath { ts, values, residual_max: 0.0, asymmetry_max: 0.0, profile: profile.clone() })
}

/// The unstable Riccati branch `t -> U(phi^t v)` on `[t_lo, t_hi]`, via
/// `U(w) = -S(-w)` on the reversed profile.
pub fn unstable_branch_path(
    profile: &CurvatureProfile,
    t_lo: f64,
    t_hi: f64,
    grid_h: f64,
    opts: &LimitOptions,
) -> Result<RiccatiPath> {
    let rev = stable_branch_path(&profile.reversed(), -t_hi, -t_lo, grid_h, opts)?;
    let n = rev.ts.len();
    let mut ts = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in (0..n).rev() {
        ts.push(-rev.ts[i]);
        values.push(-&rev.values[i]);
    }
    Ok(RiccatiPath {
        ts,
        values,
        residual_max: 0.0,
        asymmetry_max: rev.asymmetry_max,
        profile: profile.clone(),
    })
}

// joint state [V | Y]: V' = -V^2 - R, Y' = V Y
fn joint_rhs(profile: &CurvatureProfile) -> impl FnMut(f64, &DVector<f64>, &mut DVector<f64>) + '_ {
    let m = profile.normal_dim();
    let mm = m * m;
    move |t, y, dy| {
        let r = profile.evaluate(t);
        for col in 0..m {
            for i in 0..m {
                let mut vv = 0.0;
                let mut vy = 0.0;
                for k in 0..m {
                    vv += y[k * m + i] * y[col * m + k];
                    vy += y[k * m + i] * y[mm + col * m + k];
                }
                dy[col * m + i] = -vv - r[(i, col)];
                dy[mm + col * m + i] = vy;
            }
        }
    }
}

/// The stable tensor path `S_v` on `[0, T]`: `S_v(0) = id`,
/// `S_v'(0) = S(v)`, rebuilt in the backward (stable) direction.
pub fn stable_tensor_path(
    profile: &CurvatureProfile,
    t_max: f64,
    grid_h: f64,
    opts: &LimitOptions,
) -> Result<JacobiTensorPath> {
    let m = profile.normal_dim();
    let anchor = anchor_above(profile, t_max)?;
    let v_anchor = stable_limit(&profile.shifted(anchor), opts)?.matrix;

    // carry the branch down to T, then reconstruct jointly down to 0
    let mut f = super::riccati::riccati_rhs(profile);
    let va = DVector::from_column_slice(v_anchor.as_slice());
    let (vt, _) = ode::solve_to(&mut f, anchor, &va, t_max, &opts.ode, "stable branch to window")?;

    let mut y0 = DVector::zeros(2 * m * m);
    y0.rows_mut(0, m * m).copy_from(&vt);
    y0.rows_mut(m * m, m * m)
        .copy_from_slice(DMatrix::<f64>::identity(m, m).as_slice());
    let mut outputs: Vec<f64> = ode::uniform_grid(0.0, t_max, grid_h);
    outputs.reverse();
    let mut g = joint_rhs(profile);
    let sol = ode::solve(&mut g, t_max, &y0, &outputs, &opts.ode, "stable tensor")?;

    let k0 = sol
        .grid_ts
        .iter()
        .position(|t| t.abs() < 1e-9)
        .ok_or_else(|| Error::invalid("stable tensor grid must contain 0"))?;
    let y_at_0 = DMatrix::from_column_slice(m, m, &sol.grid_ys[k0].as_slice()[m * m..2 * m * m]);
    let (n_inv, _) = linalg::try_invert(&y_at_0, "stable tensor normalization")?;

    let mut ts = Vec::new();
    let mut values = Vec::new();
    let mut derivs = Vec::new();
    for (t, (y, dy)) in sol.grid_ts.iter().zip(sol.grid_ys.iter().zip(&sol.grid_dys)).rev() {
        ts.push(*t);
        let yt = DMatrix::from_column_slice(m, m, &y.as_slice()[m * m..2 * m * m]);
        let dyt = DMatrix::from_column_slice(m, m, &dy.as_slice()[m * m..2 * m * m]);
        values.push(yt * &n_inv);
        derivs.push(dyt * &n_inv);
    }
    let mut path = JacobiTensorPath {
        ts,
        values,
        derivs,
        role: TensorRole::Stable,
        residual_max: 0.0,
        wronskian_self_drift: None,
        profile: profile.clone(),
    };
    finalize_path(&mut path);
    Ok(path)
}

/// The unstable tensor path `U_v` on `[t_lo, t_max]` (`t_lo <= 0`):
/// `U_v(0) = id`, `U_v'(0) = U(v)`, grown in the forward (attracting)
/// direction.
pub fn unstable_tensor_path(
    profile: &CurvatureProfile,
    t_lo: f64,
    t_max: f64,
    grid_h: f64,
    opts: &LimitOptions,
) -> Result<JacobiTensorPath> {
    let m = profile.normal_dim();
    let u0 = -stable_limit(&profile.reversed(), opts)?.matrix;
    let mut y0 = DVector::zeros(2 * m * m);
    y0.rows_mut(0, m * m).copy_from_slice(u0.as_slice());
    y0.rows_mut(m * m, m * m)
        .copy_from_slice(DMatrix::<f64>::identity(m, m).as_slice());

    let grid = two_section_grid(t_lo, t_max, grid_h);
    let mut ts = Vec::new();
    let mut values = Vec::new();
    let mut derivs = Vec::new();
    for (a, b) in [(0.0, t_lo), (0.0, t_max)] {
        if a == b {
            continue;
        }
        let outputs: Vec<f64> = if b < a {
            grid.iter().rev().filter(|t| **t <= 1e-12).copied().collect()
        } else {
            grid.iter().filter(|t| **t >= -1e-12).copied().collect()
        };
        let mut g = joint_rhs(profile);
        let sol = ode::solve(&mut g, 0.0, &y0, &outputs, &opts.ode, "unstable tensor")?;
        let mut triples: Vec<_> = sol
            .grid_ts
            .iter()
            .zip(sol.grid_ys.iter().zip(&sol.grid_dys))
            .map(|(t, (y, dy))| (*t, y.clone(), dy.clone()))
            .collect();
        if b < a {
            triples.reverse();
            triples.pop();
        }
        for (t, y, dy) in triples {
            ts.push(t);
            values.push(DMatrix::from_column_slice(m, m, &y.as_slice()[m * m..2 * m * m]));
            derivs.push(DMatrix::from_column_slice(m, m, &dy.as_slice()[m * m..2 * m * m]));
        }
    }
    let mut path = JacobiTensorPath {
        ts,
        values,
        derivs,
        role: TensorRole::Unstable,
        residual_max: 0.0,
        wronskian_self_drift: None,
        profile: profile.clone(),
    };
    finalize_path(&mut path);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coth(x: f64) -> f64 {
        x.cosh() / x.sinh()
    }

    #[test]
    fn hyperbolic_fixed_points() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let lim = stable_limit(&p, &LimitOptions::default()).unwrap();
        assert!(lim.converged);
        assert_relative_eq!(lim.matrix[(0, 0)], -1.0, epsilon = 1e-9);
        assert!(lim.monotone_defect < 1e-10);
        // unstable side through the reversed profile
        let rev = stable_limit(&p.reversed(), &LimitOptions::default()).unwrap();
        assert_relative_eq!(-rev.matrix[(0, 0)], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn rank_one_symmetric_model_forms() {
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0, -1.0]).unwrap();
        let lim = stable_limit(&p, &LimitOptions::default()).unwrap();
        assert!(lim.converged);
        assert_relative_eq!(lim.matrix[(0, 0)], -2.0, epsilon = 1e-9);
        assert_relative_eq!(lim.matrix[(1, 1)], -1.0, epsilon = 1e-9);
        assert_relative_eq!(lim.matrix[(2, 2)], -1.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_limit_is_slow_but_extrapolates_to_zero() {
        let p = CurvatureProfile::constant_diag(&[0.0]).unwrap();
        let lim = stable_limit(&p, &LimitOptions::default()).unwrap();
        assert!(!lim.converged);
        assert!(lim.slow_convergence);
        assert_relative_eq!(lim.raw[(0, 0)], -1.0 / 16384.0, epsilon = 1e-10);
        assert!(lim.matrix[(0, 0)].abs() < 1e-10, "extrapolated {}", lim.matrix[(0, 0)]);
        // the trace is the harmonic sequence -1/r
        for (r, w) in &lim.trace {
            assert_relative_eq!(w[(0, 0)], -1.0 / r, epsilon = 1e-11);
        }
    }

    #[test]
    fn ar_ratio_table_matches_closed_form() {
        // coth(r) - 1 at r = 5 is ~9.08e-5 and r * diff stays bounded
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let lim = stable_limit(&p, &LimitOptions::default()).unwrap();
        let (r0, w0) = &lim.trace[0];
        assert_eq!(*r0, 8.0);
        assert_relative_eq!(w0[(0, 0)], -coth(8.0), epsilon = 1e-10);
        for (r, ratio) in &lim.ar_ratios {
            assert_relative_eq!(*ratio, r * (coth(*r) - 1.0), epsilon = 1e-7);
        }
    }

    #[test]
    fn stable_branch_and_tensor_paths() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let opts = LimitOptions::default();
        let branch = stable_branch_path(&p, 0.0, 6.0, 0.05, &opts).unwrap();
        for v in &branch.values {
            assert_relative_eq!(v[(0, 0)], -1.0, epsilon = 1e-9);
        }
        // S_v(t) = e^{-t} over a long window without unstable contamination
        let s = stable_tensor_path(&p, 20.0, 0.05, &opts).unwrap();
        for &t in &[0.0, 1.0, 10.0, 20.0] {
            assert_relative_eq!(s.value_at(t).unwrap()[(0, 0)], (-t).exp(), max_relative = 1e-8);
        }
        // U_v(t) = e^{t}
        let u = unstable_tensor_path(&p, -2.0, 8.0, 0.05, &opts).unwrap();
        for &t in &[-2.0, 0.0, 3.0, 8.0] {
            assert_relative_eq!(u.value_at(t).unwrap()[(0, 0)], t.exp(), max_relative = 1e-8);
        }
        assert_relative_eq!(u.deriv_at(0.0).unwrap()[(0, 0)], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn time_varying_branch_satisfies_riccati() {
        let p = CurvatureProfile::time_varying(vec![crate::geometry::TimeExpr::Sinusoidal {
            offset: -2.0,
            amplitude: -1.0,
            omega: 1.0,
            phase: 0.0,
        }])
        .unwrap();
        let branch = stable_branch_path(&p, 0.0, 5.0, 0.01, &LimitOptions::default()).unwrap();
        // finite-difference check of V' + V^2 + R = 0 along the branch
        let n = branch.ts.len();
        let h = branch.ts[1] - branch.ts[0];
        for i in 2..n - 2 {
            let vp = (-branch.values[i + 2][(0, 0)] + 8.0 * branch.values[i + 1][(0, 0)]
                - 8.0 * branch.values[i - 1][(0, 0)]
                + branch.values[i - 2][(0, 0)])
                / (12.0 * h);
            let v = branch.values[i][(0, 0)];
            let r = p.evaluate(branch.ts[i])[(0, 0)];
            assert!((vp + v * v + r).abs() < 1e-7, "residual at {}", branch.ts[i]);
        }
    }
}
