//! Boundary tensors `S_{v,r}` (identity at 0, vanishing at `r`) and their
//! time-reversed counterparts `U_{v,r}`.
//!
//! Paths are built by integrating the Jacobi equation backward from the
//! vanishing end with data `(0, -id)` and rescaling by the value at 0. All
//! numerical error then rides on the decaying solution itself instead of
//! cancelling between two exponentially growing fundamental solutions, so
//! the construction is uniformly accurate up to the vanishing end and valid
//! for arbitrary time-dependent profiles.
//!
//! For the boundary derivative `S_{v,r}'(0)` at very large `r` the tensor
//! itself would overflow, so the solve switches to the inverse Riccati
//! variable `Z = (S' S^{-1})^{-1}`, which satisfies `Z' = id + Z R Z`, starts
//! at `Z(r) = 0`, and stays bounded on the stable branch.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg;
use crate::ode::{self, OdeOptions};

use super::paths::{
    a_tensor, c_tensor, finalize_path, jacobi_rhs, pack_state, unpack_state, JacobiOptions,
    JacobiTensorPath, TensorRole,
};

fn switch_width(profile: &CurvatureProfile) -> f64 {
    (0.25f64).min(0.5 / (profile.curvature_bound + 1.0).sqrt())
}

/// `S_{v,r}` sampled on an explicit ascending grid contained in `(-inf, r]`;
/// the grid must include 0 (where the tensor is normalized to the identity).
pub fn boundary_tensor_s_on(
    profile: &CurvatureProfile,
    r: f64,
    grid: &[f64],
    opts: &JacobiOptions,
) -> Result<JacobiTensorPath> {
    if r <= 0.0 {
        return Err(Error::invalid("boundary radius must be positive"));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid must be ascending and nonempty"));
    }
    if *grid.last().unwrap() > r + 1e-12 {
        return Err(Error::invalid("grid may not extend beyond the vanishing end"));
    }
    let m = profile.normal_dim();
    let state_r = pack_state(&DMatrix::zeros(m, m), &(-DMatrix::<f64>::identity(m, m)));

    // backward sweep from the vanishing end across all requested nodes
    let mut outputs: Vec<f64> = grid.iter().rev().copied().collect();
    if (outputs[0] - r).abs() < 1e-12 {
        outputs[0] = r;
    } else {
        outputs.insert(0, r);
    }
    let mut f = jacobi_rhs(profile);
    let sol = ode::solve(&mut f, r, &state_r, &outputs, &opts.ode, "boundary tensor")?;

    let mut ts: Vec<f64> = sol.grid_ts.clone();
    let mut states = sol.grid_ys.clone();
    ts.reverse();
    states.reverse();
    if grid.iter().all(|t| (*t - r).abs() > 1e-12) {
        ts.pop();
        states.pop();
    }

    let i0 = ts
        .iter()
        .position(|t| t.abs() < 1e-9)
        .ok_or_else(|| Error::invalid("grid must contain t = 0"))?;
    let (y_at_0, _) = unpack_state(&states[i0], m);
    // absolute singularity check against the path scale: the condition
    // number alone cannot flag a conjugate point in dimension one
    let path_scale = states
        .iter()
        .map(|s| unpack_state(s, m).0.norm())
        .fold(0.0f64, f64::max);
    let smin = linalg::min_singular_value(&y_at_0);
    if smin <= 1e-12 * path_scale {
        return Err(Error::SingularMatrix {
            cond: path_scale / smin.max(f64::MIN_POSITIVE),
            limit: linalg::COND_LIMIT,
            context: "boundary normalization (conjugate point)".to_string(),
        });
    }
    let (n_inv, _cond) = linalg::try_invert(&y_at_0, "boundary normalization (conjugate point)")?;

    let mut values = Vec::with_capacity(ts.len());
    let mut derivs = Vec::with_capacity(ts.len());
    for s in &states {
        let (y, yp) = unpack_state(s, m);
        values.push(y * &n_inv);
        derivs.push(yp * &n_inv);
    }
    let mut path = JacobiTensorPath {
        ts,
        values,
        derivs,
        role: TensorRole::BoundaryS { r },
        residual_max: 0.0,
        wronskian_self_drift: None,
        profile: profile.clone(),
    };
    finalize_path(&mut path);
    Ok(path)
}

/// `S_{v,r}` on the standard grid `[t_lo, 0] u [0, r]`.
pub fn boundary_tensor_s(
    profile: &CurvatureProfile,
    r: f64,
    t_lo: f64,
    opts: &JacobiOptions,
) -> Result<JacobiTensorPath> {
    let grid = two_section_grid(t_lo, r, opts.grid_h);
    boundary_tensor_s_on(profile, r, &grid, opts)
}

/// Ascending union of uniform sections `[lo, 0]` and `[0, hi]`.
pub(crate) fn two_section_grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    assert!(lo <= 0.0 && hi >= 0.0);
    let mut grid = Vec::new();
    if lo < 0.0 {
        let mut neg = ode::uniform_grid(lo, 0.0, h);
        neg.pop();
        grid.extend(neg);
    }
    grid.extend(ode::uniform_grid(0.0, hi.max(h), h));
    grid
}

/// `U_{v,r}` on `[-r, 0]`: `U(0) = id`, `U(-r) = 0`, realized through the
/// reversed profile.
pub fn boundary_tensor_u(
    profile: &CurvatureProfile,
    r: f64,
    opts: &JacobiOptions,
) -> Result<JacobiTensorPath> {
    let s_rev = boundary_tensor_s(&profile.reversed(), r, 0.0, opts)?;
    let n = s_rev.ts.len();
    let mut ts = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for i in (0..n).rev() {
        ts.push(-s_rev.ts[i]);
        values.push(s_rev.values[i].clone());
        derivs.push(-&s_rev.derivs[i]);
    }
    let mut path = JacobiTensorPath {
        ts,
        values,
        derivs,
        role: TensorRole::BoundaryU { r },
        residual_max: 0.0,
        wronskian_self_drift: None,
        profile: profile.clone(),
    };
    finalize_path(&mut path);
    Ok(path)
}

/// `S_{v,r}'(0)` alone, valid for radii far beyond tensor overflow.
///
/// Near the vanishing end the Jacobi form is integrated directly; once away
/// from it the solve continues in the bounded inverse-Riccati variable.
pub fn boundary_derivative_s(
    profile: &CurvatureProfile,
    r: f64,
    opts: &OdeOptions,
) -> Result<DMatrix<f64>> {
    if r <= 0.0 {
        return Err(Error::invalid("boundary radius must be positive"));
    }
    let m = profile.normal_dim();
    let tau = switch_width(profile);
    // profiles that may develop conjugate points go through the tensor form,
    // whose normalization check reports the singularity explicitly
    if r <= 2.0 * tau || profile.conjugate_point_risk {
        let jopts = JacobiOptions { ode: opts.clone(), grid_h: (r / 8.0).min(0.05) };
        let path = boundary_tensor_s_on(profile, r, &ode::uniform_grid(0.0, r, jopts.grid_h), &jopts)?;
        return Ok(linalg::symmetrize(path.deriv_at(0.0)?));
    }

    // phase 1: Jacobi backward across the vanishing layer
    let state_r = pack_state(&DMatrix::zeros(m, m), &(-DMatrix::<f64>::identity(m, m)));
    let mut f = jacobi_rhs(profile);
    let (s, _) = ode::solve_to(&mut f, r, &state_r, r - tau, opts, "boundary derivative (layer)")?;
    let (y, yp) = unpack_state(&s, m);
    let (yp_inv, _) = linalg::try_invert(&yp, "boundary derivative layer inverse")?;
    let z0 = linalg::symmetrize(&(y * yp_inv));

    // phase 2: inverse Riccati Z' = id + Z R Z backward to 0
    let mut g = inverse_riccati_rhs(profile);
    let z0v = DVector::from_column_slice(z0.as_slice());
    let (zv, _) = ode::solve_to(&mut g, r - tau, &z0v, 0.0, opts, "boundary derivative (inverse riccati)")?;
    let z = DMatrix::from_column_slice(m, m, zv.as_slice());
    let (w, _) = linalg::try_invert(&z, "boundary derivative (conjugate point)")?;
    Ok(linalg::symmetrize(&w))
}

/// `U_{v,r}'(0) = -S'_{-v,r}(0)`.
pub fn boundary_derivative_u(
    profile: &CurvatureProfile,
    r: f64,
    opts: &OdeOptions,
) -> Result<DMatrix<f64>> {
    Ok(-boundary_derivative_s(&profile.reversed(), r, opts)?)
}

fn inverse_riccati_rhs(
    profile: &CurvatureProfile,
) -> impl FnMut(f64, &DVector<f64>, &mut DVector<f64>) + '_ {
    let m = profile.normal_dim();
    move |t, y, dy| {
        let r = profile.evaluate(t);
        // dZ = id + Z R Z
        for col in 0..m {
            for i in 0..m {
                let mut rz = 0.0;
                for k in 0..m {
                    rz += r[(i, k)] * y[col * m + k];
                }
                dy[col * m + i] = rz;
            }
        }
        // dy currently holds R Z; overwrite with id + Z * (R Z)
        let rz: Vec<f64> = dy.as_slice().to_vec();
        for col in 0..m {
            for i in 0..m {
                let mut acc = if i == col { 1.0 } else { 0.0 };
                for k in 0..m {
                    acc += y[k * m + i] * rz[col * m + k];
                }
                dy[col * m + i] = acc;
            }
        }
    }
}

/// The textbook construction `S(t) = C(t) - A(t) A(r)^{-1} C(r)` from the
/// fundamental pair; catastrophic cancellation limits it to small `r`, so it
/// serves as an independent cross-check of the backward construction.
pub fn fundamental_pair_boundary_s(
    profile: &CurvatureProfile,
    r: f64,
    opts: &JacobiOptions,
) -> Result<JacobiTensorPath> {
    let a = a_tensor(profile, r, opts)?;
    let c = c_tensor(profile, r, opts)?;
    let (a_r_inv, _) = linalg::try_invert(a.value_at(r)?, "fundamental pair A(r) (conjugate point)")?;
    let x = a_r_inv * c.value_at(r)?;
    let n = a.ts.len();
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for i in 0..n {
        values.push(&c.values[i] - &a.values[i] * &x);
        derivs.push(&c.derivs[i] - &a.derivs[i] * &x);
    }
    let mut path = JacobiTensorPath {
        ts: a.ts.clone(),
        values,
        derivs,
        role: TensorRole::BoundaryS { r },
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
    use crate::geometry::TimeExpr;
    use approx::assert_relative_eq;

    fn opts() -> JacobiOptions {
        JacobiOptions::default()
    }

    fn coth(x: f64) -> f64 {
        x.cosh() / x.sinh()
    }

    #[test]
    fn hyperbolic_boundary_derivative() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let s = boundary_tensor_s(&p, 2.0, 0.0, &opts()).unwrap();
        assert_relative_eq!(s.deriv_at(0.0).unwrap()[(0, 0)], -coth(2.0), max_relative = 1e-10);
        // closed form sinh(r - t)/sinh(r) along the path
        for &t in &[0.25, 1.0, 1.75] {
            assert_relative_eq!(
                s.value_at(t).unwrap()[(0, 0)],
                (2.0 - t).sinh() / 2f64.sinh(),
                max_relative = 1e-9
            );
        }
        // boundary conditions
        assert!((s.value_at(0.0).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(s.value_at(2.0).unwrap()[(0, 0)].abs() < 1e-8);
    }

    #[test]
    fn flat_boundary_tensor_is_linear() {
        let p = CurvatureProfile::constant_diag(&[0.0]).unwrap();
        let s = boundary_tensor_s(&p, 4.0, 0.0, &opts()).unwrap();
        for &t in &[0.0, 1.0, 2.5, 4.0] {
            assert_relative_eq!(s.value_at(t).unwrap()[(0, 0)], 1.0 - t / 4.0, epsilon = 1e-11);
        }
        assert_relative_eq!(s.deriv_at(0.0).unwrap()[(0, 0)], -0.25, epsilon = 1e-12);
        let w = boundary_derivative_s(&p, 4.0, &OdeOptions::default()).unwrap();
        assert_relative_eq!(w[(0, 0)], -0.25, epsilon = 1e-12);
    }

    #[test]
    fn reversed_boundary_tensor_u() {
        let p = CurvatureProfile::constant_diag(&[-1.0]).unwrap();
        let u = boundary_tensor_u(&p, 2.0, &opts()).unwrap();
        assert_relative_eq!(u.deriv_at(0.0).unwrap()[(0, 0)], coth(2.0), max_relative = 1e-10);
        assert!((u.value_at(0.0).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(u.value_at(-2.0).unwrap()[(0, 0)].abs() < 1e-8);
        // constant profiles are time symmetric: U'(0) = -S'(0)
        let du = boundary_derivative_u(&p, 2.0, &OdeOptions::default()).unwrap();
        let ds = boundary_derivative_s(&p, 2.0, &OdeOptions::default()).unwrap();
        assert_relative_eq!(du[(0, 0)], -ds[(0, 0)], epsilon = 1e-11);
    }

    #[test]
    fn derivative_switches_agree_with_path_route() {
        // per-eigenvalue oracle -sqrt(|k|) coth(sqrt(|k|) r)
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0]).unwrap();
        for &r in &[0.3, 2.0, 9.0] {
            let w = boundary_derivative_s(&p, r, &OdeOptions::default()).unwrap();
            assert_relative_eq!(w[(0, 0)], -2.0 * coth(2.0 * r), max_relative = 1e-9);
            assert_relative_eq!(w[(1, 1)], -coth(r), max_relative = 1e-9);
        }
        // very large radius stays bounded and converges to the stable form
        let w = boundary_derivative_s(&p, 16384.0, &OdeOptions::default()).unwrap();
        assert_relative_eq!(w[(0, 0)], -2.0, epsilon = 1e-10);
        assert_relative_eq!(w[(1, 1)], -1.0, epsilon = 1e-10);
    }

    #[test]
    fn fundamental_pair_cross_check_small_radius() {
        let p = CurvatureProfile::time_varying(vec![TimeExpr::Sinusoidal {
            offset: -2.0,
            amplitude: -1.0,
            omega: 1.0,
            phase: 0.0,
        }])
        .unwrap();
        let r = 3.0;
        let main = boundary_tensor_s(&p, r, 0.0, &opts()).unwrap();
        let pair = fundamental_pair_boundary_s(&p, r, &opts()).unwrap();
        for &t in &[0.0, 0.5, 1.0, 1.5] {
            let a = main.value_at(t).unwrap()[(0, 0)];
            let b = pair.value_at(t).unwrap()[(0, 0)];
            assert!((a - b).abs() < 1e-7, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn conjugate_point_is_an_explicit_failure() {
        // kappa = +1 has a conjugate point at pi
        let p = CurvatureProfile::constant_diag(&[1.0]).unwrap();
        assert!(p.conjugate_point_risk);
        let e = boundary_tensor_s(&p, std::f64::consts::PI, 0.0, &opts());
        assert!(matches!(e, Err(Error::SingularMatrix { .. })), "{e:?}");
    }

    #[test]
    fn monotone_in_r_between_bounds() {
        // S'_{r1}(0) <= S'_{r2}(0) <= U'_{r2}(0) <= U'_{r1}(0) for r1 < r2
        let p = CurvatureProfile::constant_diag(&[-4.0, -1.0]).unwrap();
        let o = OdeOptions::default();
        let (r1, r2) = (2.0, 5.0);
        let s1 = boundary_derivative_s(&p, r1, &o).unwrap();
        let s2 = boundary_derivative_s(&p, r2, &o).unwrap();
        let u2 = boundary_derivative_u(&p, r2, &o).unwrap();
        let u1 = boundary_derivative_u(&p, r1, &o).unwrap();
        for d in [&s2 - &s1, &u2 - &s2, &u1 - &u2] {
            assert!(linalg::min_eigenvalue(&d) > -1e-9);
        }
    }
}
