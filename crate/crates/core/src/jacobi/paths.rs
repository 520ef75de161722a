//! Jacobi tensor paths `Y'' + R(t) Y = 0` and their Wronskians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg;
use crate::ode::{self, OdeOptions};

/// What a tensor path represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TensorRole {
    /// `A(0) = 0`, `A'(0) = id`; its determinant is the spherical volume density.
    A,
    /// `C(0) = id`, `C'(0) = 0`.
    C,
    /// Vanishes at `t = r`, identity at `0`.
    BoundaryS { r: f64 },
    /// Vanishes at `t = -r`, identity at `0`.
    BoundaryU { r: f64 },
    Stable,
    Unstable,
    Custom,
}

/// Integration controls for tensor paths.
#[derive(Debug, Clone)]
pub struct JacobiOptions {
    pub ode: OdeOptions,
    /// Target spacing of the stored sample grid.
    pub grid_h: f64,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions { ode: OdeOptions::default(), grid_h: 0.01 }
    }
}

/// A sampled matrix solution of the Jacobi equation with its derivative.
#[derive(Debug, Clone)]
pub struct JacobiTensorPath {
    pub ts: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    pub derivs: Vec<DMatrix<f64>>,
    pub role: TensorRole,
    /// Max re-substitution residual of `Y'' + R Y` over interior grid nodes.
    pub residual_max: f64,
    /// Max drift of the self-Wronskian when it vanishes at the first node.
    pub wronskian_self_drift: Option<f64>,
    pub profile: CurvatureProfile,
}

impl JacobiTensorPath {
    pub fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let i = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.min(self.ts.len() - 1),
        };
        [i.saturating_sub(1), i, (i + 1).min(self.ts.len() - 1)].into_iter().find(|&j| (self.ts[j] - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }

    /// Value at a grid node (the requested `t` must lie on the grid).
    pub fn value_at(&self, t: f64) -> Result<&DMatrix<f64>> {
        self.index_of(t)
            .map(|i| &self.values[i])
            .ok_or_else(|| Error::invalid(format!("t = {t} is not a grid node")))
    }

    pub fn deriv_at(&self, t: f64) -> Result<&DMatrix<f64>> {
        self.index_of(t)
            .map(|i| &self.derivs[i])
            .ok_or_else(|| Error::invalid(format!("t = {t} is not a grid node")))
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Smallest singular value of `Y(t)` over grid nodes with `lo <= t <= hi`.
    pub fn min_singular_value_on(&self, lo: f64, hi: f64) -> f64 {
        self.ts
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .map(|(_, v)| linalg::min_singular_value(v))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn jacobi_rhs(
    profile: &CurvatureProfile,
) -> impl FnMut(f64, &DVector<f64>, &mut DVector<f64>) + '_ {
    let m = profile.normal_dim();
    let mm = m * m;
    move |t, y, dy| {
        let r = profile.evaluate(t);
        for i in 0..mm {
            dy[i] = y[mm + i];
        }
        for col in 0..m {
            for i in 0..m {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += r[(i, k)] * y[col * m + k];
                }
                dy[mm + col * m + i] = -acc;
            }
        }
    }
}

pub(crate) fn pack_state(y: &DMatrix<f64>, yp: &DMatrix<f64>) -> DVector<f64> {
    let mm = y.len();
    let mut v = DVector::zeros(2 * mm);
    v.rows_mut(0, mm).copy_from_slice(y.as_slice());
    v.rows_mut(mm, mm).copy_from_slice(yp.as_slice());
    v
}

pub(crate) fn unpack_state(v: &DVector<f64>, m: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mm = m * m;
    (
        DMatrix::from_column_slice(m, m, &v.as_slice()[0..mm]),
        DMatrix::from_column_slice(m, m, &v.as_slice()[mm..2 * mm]),
    )
}

/// Integrate the Jacobi equation from `Y(0) = y0`, `Y'(0) = y0p` over
/// `[t_lo, t_hi]` (the interval must contain 0).
pub fn integrate_jacobi(
    profile: &CurvatureProfile,
    y0: &DMatrix<f64>,
    y0p: &DMatrix<f64>,
    t_lo: f64,
    t_hi: f64,
    opts: &JacobiOptions,
) -> Result<JacobiTensorPath> {
    let m = profile.normal_dim();
    if y0.shape() != (m, m) || y0p.shape() != (m, m) {
        return Err(Error::invalid("initial tensors must match the profile dimension"));
    }
    if !(t_lo <= 0.0 && t_hi >= 0.0) || !t_lo.is_finite() || !t_hi.is_finite() {
        return Err(Error::invalid("integration interval must be finite and contain 0"));
    }
    let state0 = pack_state(y0, y0p);

    let mut ts: Vec<f64> = Vec::new();
    let mut states: Vec<DVector<f64>> = Vec::new();
    if t_lo < 0.0 {
        let grid = ode::uniform_grid(0.0, t_lo, opts.grid_h);
        let mut f = jacobi_rhs(profile);
        let sol = ode::solve(&mut f, 0.0, &state0, &grid, &opts.ode, "jacobi (backward)")?;
        let mut pairs: Vec<_> = sol.grid_ts.iter().copied().zip(sol.grid_ys).collect();
        pairs.reverse();
        pairs.pop();
        for (t, y) in pairs {
            ts.push(t);
            states.push(y);
        }
    }
    if t_hi > 0.0 {
        let grid = ode::uniform_grid(0.0, t_hi, opts.grid_h);
        let mut f = jacobi_rhs(profile);
        let sol = ode::solve(&mut f, 0.0, &state0, &grid, &opts.ode, "jacobi (forward)")?;
        for (t, y) in sol.grid_ts.iter().zip(sol.grid_ys) {
            ts.push(*t);
            states.push(y);
        }
    } else {
        ts.push(0.0);
        states.push(state0);
    }

    let values: Vec<DMatrix<f64>> = states.iter().map(|s| unpack_state(s, m).0).collect();
    let derivs: Vec<DMatrix<f64>> = states.iter().map(|s| unpack_state(s, m).1).collect();
    let mut path = JacobiTensorPath {
        ts,
        values,
        derivs,
        role: TensorRole::Custom,
        residual_max: 0.0,
        wronskian_self_drift: None,
        profile: profile.clone(),
    };
    finalize_path(&mut path);
    Ok(path)
}

/// Populate the re-substitution residual and self-Wronskian drift.
pub(crate) fn finalize_path(path: &mut JacobiTensorPath) {
    path.residual_max = resubstitution_residual(path);
    let w0 = wronskian_at(path, path, 0);
    let scale = 1.0 + path.derivs[0].norm() * path.values[0].norm();
    if linalg::op_norm(&w0) < 1e-10 * scale {
        let mut drift = 0.0f64;
        for i in 0..path.ts.len() {
            drift = drift.max(linalg::op_norm(&(wronskian_at(path, path, i) - &w0)));
        }
        path.wronskian_self_drift = Some(drift);
    }
}

// 5-point finite difference of Y' against -R Y on uniform interior windows.
fn resubstitution_residual(path: &JacobiTensorPath) -> f64 {
    let n = path.ts.len();
    if n < 5 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let h = path.ts[i] - path.ts[i - 1];
        if (1..4).any(|k| {
            ((path.ts[i - 2 + k + 1] - path.ts[i - 2 + k]) - h).abs() > 1e-9 * (1.0 + h.abs())
        }) {
            continue;
        }
        let ypp_fd = (-&path.derivs[i + 2] + &path.derivs[i + 1] * 8.0 - &path.derivs[i - 1] * 8.0
            + &path.derivs[i - 2])
            / (12.0 * h);
        let r = path.profile.evaluate(path.ts[i]);
        worst = worst.max(linalg::op_norm(&(ypp_fd + r * &path.values[i])));
    }
    worst
}

fn wronskian_at(a: &JacobiTensorPath, b: &JacobiTensorPath, i: usize) -> DMatrix<f64> {
    a.derivs[i].transpose() * &b.values[i] - a.values[i].transpose() * &b.derivs[i]
}

/// The tensor `A` with `A(0) = 0`, `A'(0) = id` on `[0, T]`.
pub fn a_tensor(profile: &CurvatureProfile, t_max: f64, opts: &JacobiOptions) -> Result<JacobiTensorPath> {
    let m = profile.normal_dim();
    let mut p = integrate_jacobi(
        profile,
        &DMatrix::zeros(m, m),
        &DMatrix::identity(m, m),
        0.0,
        t_max,
        opts,
    )?;
    p.role = TensorRole::A;
    Ok(p)
}

/// The tensor `C` with `C(0) = id`, `C'(0) = 0` on `[0, T]`.
pub fn c_tensor(profile: &CurvatureProfile, t_max: f64, opts: &JacobiOptions) -> Result<JacobiTensorPath> {
    let m = profile.normal_dim();
    let mut p = integrate_jacobi(
        profile,
        &DMatrix::identity(m, m),
        &DMatrix::zeros(m, m),
        0.0,
        t_max,
        opts,
    )?;
    p.role = TensorRole::C;
    Ok(p)
}

/// Wronskian `W(Y1, Y2)(t) = Y1'^T Y2 - Y1^T Y2'` at a common grid node.
pub fn wronskian(y1: &JacobiTensorPath, y2: &JacobiTensorPath, t: f64) -> Result<DMatrix<f64>> {
    let i1 = y1
        .index_of(t)
        .ok_or_else(|| Error::invalid(format!("t = {t} not on the first path grid")))?;
    let i2 = y2
        .index_of(t)
        .ok_or_else(|| Error::invalid(format!("t = {t} not on the second path grid")))?;
    if y1.dim() != y2.dim() {
        return Err(Error::invalid("wronskian needs tensors of equal dimension"));
    }
    Ok(y1.derivs[i1].transpose() * &y2.values[i2] - y1.values[i1].transpose() * &y2.derivs[i2])
}

/// Max deviation of `W(Y1, Y2)(t)` from its value at the first common node,
/// over the overlap of the two grids.
pub fn wronskian_drift(y1: &JacobiTensorPath, y2: &JacobiTensorPath) -> Result<f64> {
    let lo = y1.ts[0].max(y2.ts[0]);
    let hi = y1.ts[y1.ts.len() - 1].min(y2.ts[y2.ts.len() - 1]);
    let mut base: Option<DMatrix<f64>> = None;
    let mut drift = 0.0f64;
    for (i, t) in y1.ts.iter().enumerate() {
        if *t < lo - 1e-12 || *t > hi + 1e-12 {
            continue;
        }
        let Some(j) = y2.index_of(*t) else { continue };
        let w = y1.derivs[i].transpose() * &y2.values[j] - y1.values[i].transpose() * &y2.derivs[j];
        match &base {
            None => base = Some(w),
            Some(w0) => drift = drift.max(linalg::op_norm(&(w - w0)))
        }
    }
    if base.is_none() {
        return Err(Error::invalid("paths share no grid nodes"));
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> JacobiOptions {
        JacobiOptions::default()
    }

    #[test]
    fn flat_a_tensor_is_linear() {
        let p = CurvatureProfile::constant_diag(&[0.0]).unwrap();
        let a = a_tensor(&p, 2.0, &opts()).unwrap();
        assert_relative_eq!(a.value_at(2.0).unwrap()[(0, 0)], 2.0, epsilon = 1e-10);
        assert!(a.residual_max < 1e-9);
    }

    #[test]
    fn hyperbolic_a_tensor_is_sinh() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let a = a_tensor(&p, 4.0, &opts()).unwrap();
        assert_relative_eq!(a.value_at(1.0).unwrap()[(0, 0)], 1f64.sinh(), max_relative = 1e-10);
        assert_relative_eq!(a.value_at(4.0).unwrap()[(0, 0)], 4f64.sinh(), max_relative = 1e-10);
        // invertibility on (0, T]
        assert!(a.min_singular_value_on(0.05, 4.0) > 0.0);
        // residual bound from the path invariant
        let bound = 1e-7 * (1.0 + p.curvature_bound) * a.max_norm();
        assert!(a.residual_max < bound, "{} !< {}", a.residual_max, bound);
        assert!(a.wronskian_self_drift.unwrap() < 1e-8);
    }

    #[test]
    fn diagonal_profile_follows_scalar_oracle() {
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0]).unwrap();
        let a = a_tensor(&p, 1.0, &opts()).unwrap();
        let v = a.value_at(1.0).unwrap();
        assert_relative_eq!(v[(0, 0)], 2f64.sinh() / 2.0, max_relative = 1e-10);
        assert_relative_eq!(v[(1, 1)], 1f64.sinh(), max_relative = 1e-10);
        assert!(v[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn backward_integration_and_custom_data() {
        // kappa(t) = -2 - sin t, initial identity data, both directions
        let p = CurvatureProfile::time_varying(vec![crate::geometry::TimeExpr::Sinusoidal {
            offset: -2.0,
            amplitude: -1.0,
            omega: 1.0,
            phase: 0.0,
        }])
        .unwrap();
        let y0 = DMatrix::identity(1, 1);
        let y0p = DMatrix::from_element(1, 1, 0.3);
        let path = integrate_jacobi(&p, &y0, &y0p, -3.0, 5.0, &opts()).unwrap();
        assert_relative_eq!(path.value_at(0.0).unwrap()[(0, 0)], 1.0);
        assert_relative_eq!(path.deriv_at(0.0).unwrap()[(0, 0)], 0.3);
        let bound = 1e-7 * (1.0 + p.curvature_bound) * path.max_norm();
        assert!(path.residual_max < bound, "{} !< {}", path.residual_max, bound);
    }

    #[test]
    fn wronskian_of_a_with_c_is_constant_identity() {
        let p = CurvatureProfile::time_varying(vec![crate::geometry::TimeExpr::Sinusoidal {
            offset: -2.0,
            amplitude: -1.0,
            omega: 1.0,
            phase: 0.0,
        }])
        .unwrap();
        let a = a_tensor(&p, 3.0, &opts()).unwrap();
        let c = c_tensor(&p, 3.0, &opts()).unwrap();
        // W(A, C)(0) = A'(0)^T C(0) - A(0)^T C'(0) = id
        let w0 = wronskian(&a, &c, 0.0).unwrap();
        assert_relative_eq!(w0[(0, 0)], 1.0, epsilon = 1e-12);
        assert!(wronskian_drift(&a, &c).unwrap() < 1e-9);
    }
}
