//! The Riccati flow `V' + V^2 + R(t) = 0` for symmetric `V`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg;
use crate::ode::{self, OdeOptions};

/// A sampled symmetric solution of the Riccati equation.
#[derive(Debug, Clone)]
pub struct RiccatiPath {
    pub ts: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    /// Max re-substitution residual of `V' + V^2 + R` over interior nodes.
    pub residual_max: f64,
    /// Max asymmetry observed before symmetrization.
    pub asymmetry_max: f64,
    pub profile: CurvatureProfile,
}

impl RiccatiPath {
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let ascending = self.ts[0] <= self.ts[self.ts.len() - 1];
        let i = if ascending {
            self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap())
        } else {
            self.ts.binary_search_by(|x| t.partial_cmp(x).unwrap())
        };
        let i = match i {
            Ok(i) => i,
            Err(i) => i.min(self.ts.len() - 1),
        };
        [i.saturating_sub(1), i, (i + 1).min(self.ts.len() - 1)].into_iter().find(|&j| (self.ts[j] - t).abs() <= 1e-9 * (1.0 + t.abs()))
    }

    pub fn value_at(&self, t: f64) -> Result<&DMatrix<f64>> {
        self.index_of(t)
            .map(|i| &self.values[i])
            .ok_or_else(|| Error::invalid(format!("t = {t} is not a grid node")))
    }
}

pub(crate) fn riccati_rhs(
    profile: &CurvatureProfile,
) -> impl FnMut(f64, &DVector<f64>, &mut DVector<f64>) + '_ {
    let m = profile.normal_dim();
    move |t, y, dy| {
        let r = profile.evaluate(t);
        // dV = -V^2 - R
        for col in 0..m {
            for i in 0..m {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += y[k * m + i] * y[col * m + k];
                }
                dy[col * m + i] = -acc - r[(i, col)];
            }
        }
    }
}

/// Integrate the Riccati equation from `V(0) = v0` over `[t_lo, t_hi]`
/// (interval containing 0). Finite-time blow-up is reported with its
/// location.
pub fn riccati_flow(
    profile: &CurvatureProfile,
    v0: &DMatrix<f64>,
    t_lo: f64,
    t_hi: f64,
    grid_h: f64,
    opts: &OdeOptions,
) -> Result<RiccatiPath> {
    let m = profile.normal_dim();
    if v0.shape() != (m, m) {
        return Err(Error::invalid("initial value must match the profile dimension"));
    }
    if linalg::asymmetry(v0) > 1e-9 * (1.0 + linalg::op_norm(v0)) {
        return Err(Error::invalid("riccati initial value must be symmetric"));
    }
    if !(t_lo <= 0.0 && t_hi >= 0.0) {
        return Err(Error::invalid("interval must contain 0"));
    }
    let y0 = DVector::from_column_slice(v0.as_slice());

    let mut ts = Vec::new();
    let mut vals: Vec<DMatrix<f64>> = Vec::new();
    for (a, b) in [(0.0, t_lo), (0.0, t_hi)] {
        if a == b {
            continue;
        }
        let grid = ode::uniform_grid(a, b, grid_h);
        let mut f = riccati_rhs(profile);
        let sol = ode::solve(&mut f, 0.0, &y0, &grid, opts, "riccati").map_err(|e| match e {
            Error::StepUnderflow { t, .. } => Error::RiccatiBlowup { t },
            other => other,
        })?;
        let mut pairs: Vec<_> = sol.grid_ts.iter().copied().zip(sol.grid_ys).collect();
        if b < a {
            pairs.reverse();
            pairs.pop();
        }
        for (t, y) in pairs {
            ts.push(t);
            vals.push(DMatrix::from_column_slice(m, m, y.as_slice()));
        }
    }
    if t_hi == 0.0 {
        ts.push(0.0);
        vals.push(v0.clone());
    }

    let mut asym = 0.0f64;
    for v in vals.iter_mut() {
        asym = asym.max(linalg::asymmetry(v));
        *v = linalg::symmetrize(v);
    }
    let mut path = RiccatiPath {
        ts,
        values: vals,
        residual_max: 0.0,
        asymmetry_max: asym,
        profile: profile.clone(),
    };
    path.residual_max = residual(&path);
    Ok(path)
}

fn residual(path: &RiccatiPath) -> f64 {
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
        let vp_fd = (-&path.values[i + 2] + &path.values[i + 1] * 8.0 - &path.values[i - 1] * 8.0
            + &path.values[i - 2])
            / (12.0 * h);
        let r = path.profile.evaluate(path.ts[i]);
        let v = &path.values[i];
        worst = worst.max(linalg::op_norm(&(vp_fd + v * v + r)));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kappa_minus_one() -> CurvatureProfile {
        CurvatureProfile::constant_diag(&[-1.0]).unwrap()
    }

    #[test]
    fn fixed_point_stays_fixed() {
        let p = kappa_minus_one();
        let v0 = DMatrix::from_element(1, 1, 1.0);
        let path = riccati_flow(&p, &v0, 0.0, 5.0, 0.05, &OdeOptions::default()).unwrap();
        for v in &path.values {
            assert_relative_eq!(v[(0, 0)], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn coth_solution() {
        let p = kappa_minus_one();
        let v0 = DMatrix::from_element(1, 1, 1f64.cosh() / 1f64.sinh());
        let path = riccati_flow(&p, &v0, 0.0, 3.0, 0.01, &OdeOptions::default()).unwrap();
        for (t, v) in path.ts.iter().zip(&path.values) {
            let exact = (1.0 + t).cosh() / (1.0 + t).sinh();
            assert_relative_eq!(v[(0, 0)], exact, max_relative = 1e-9);
        }
        let bound = 1e-7 * (1.0 + p.curvature_bound) * (1.0 + p.curvature_bound);
        assert!(path.residual_max < bound);
    }

    #[test]
    fn tanh_solution_from_zero() {
        let p = kappa_minus_one();
        let v0 = DMatrix::zeros(1, 1);
        let path = riccati_flow(&p, &v0, -2.0, 4.0, 0.05, &OdeOptions::default()).unwrap();
        for (t, v) in path.ts.iter().zip(&path.values) {
            assert_relative_eq!(v[(0, 0)], t.tanh(), epsilon = 1e-10);
        }
        assert!(path.asymmetry_max < 1e-12);
    }

    #[test]
    fn below_stable_branch_blows_up_with_location() {
        // V(0) = -1.5 < -1: V(t) = -coth(c - t) with c = arccoth(1.5),
        // blow-up at t = c = 0.5 ln 5
        let p = kappa_minus_one();
        let v0 = DMatrix::from_element(1, 1, -1.5);
        let err = riccati_flow(&p, &v0, 0.0, 2.0, 0.05, &OdeOptions::default()).unwrap_err();
        match err {
            Error::RiccatiBlowup { t } => {
                assert!((t - 0.5 * 5f64.ln()).abs() < 0.01, "blow-up at {t}")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_initial_value() {
        let p = CurvatureProfile::constant_diag(&[-1.0, -1.0]).unwrap();
        let v0 = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        assert!(riccati_flow(&p, &v0, 0.0, 1.0, 0.05, &OdeOptions::default()).is_err());
    }
}
