//! Curvature operators `t -> R_v(t)` along a geodesic in a parallel frame.
//!
//! A profile is the universal input to the Jacobi/Riccati machinery. Time
//! shifts realize the geodesic flow (`R` at the shifted vector is the shifted
//! profile) and time reversal realizes the flipped vector; both compose
//! exactly as an affine reparametrization, so the algebraic identities hold
//! pointwise without numerical error.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::geodesic::GeodesicPath;
use super::surface::{ConformalSurface, Point};

/// Which family of model the profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    ConstantDiagonal,
    TimeVarying,
    SurfaceBorne,
}

/// Named scalar families for time-varying diagonal entries.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TimeExpr {
    Constant { value: f64 },
    /// `offset + amplitude * sin(omega t + phase)`
    Sinusoidal { offset: f64, amplitude: f64, omega: f64, phase: f64 },
    /// `sum_k coeffs[k] * tanh^k(rate * t)`
    TanhPoly { coeffs: Vec<f64>, rate: f64 },
}

impl TimeExpr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeExpr::Constant { value } => *value,
            TimeExpr::Sinusoidal { offset, amplitude, omega, phase } => {
                offset + amplitude * (omega * t + phase).sin()
            }
            TimeExpr::TanhPoly { coeffs, rate } => {
                let u = (rate * t).tanh();
                let mut acc = 0.0;
                let mut p = 1.0;
                for c in coeffs {
                    acc += c * p;
                    p *= u;
                }
                acc
            }
        }
    }

    fn magnitude_bound(&self) -> f64 {
        match self {
            TimeExpr::Constant { value } => value.abs(),
            TimeExpr::Sinusoidal { offset, amplitude, .. } => offset.abs() + amplitude.abs(),
            TimeExpr::TanhPoly { coeffs, .. } => coeffs.iter().map(|c| c.abs()).sum(),
        }
    }

    fn may_be_positive(&self) -> bool {
        match self {
            TimeExpr::Constant { value } => *value > 0.0,
            TimeExpr::Sinusoidal { offset, amplitude, .. } => offset + amplitude.abs() > 0.0,
            TimeExpr::TanhPoly { .. } => {
                (-400..=400).any(|i| self.eval(i as f64 * 0.05) > 0.0)
            }
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            TimeExpr::Constant { value } => value.is_finite(),
            TimeExpr::Sinusoidal { offset, amplitude, omega, phase } => {
                [*offset, *amplitude, *omega, *phase].iter().all(|v| v.is_finite())
            }
            TimeExpr::TanhPoly { coeffs, rate } => {
                rate.is_finite() && !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum ProfileSource {
    Diag(Vec<f64>),
    Exprs(Vec<TimeExpr>),
    Surface { surface: Arc<ConformalSurface>, path: Arc<GeodesicPath> },
}

/// The curvature operator along a geodesic, with its uniform bound `R0`.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    source: Arc<ProfileSource>,
    /// evaluate(t) = base(sign * t + offset)
    sign: f64,
    offset: f64,
    /// `R0`: uniform bound on the operator norm of `R_v(t)`.
    pub curvature_bound: f64,
    /// Set when some eigenvalue can be positive (conjugate points possible).
    pub conjugate_point_risk: bool,
    kind: ProfileKind,
    base_domain: Option<(f64, f64)>,
}

impl CurvatureProfile {
    /// Constant diagonal curvature `diag(eigenvalues)`; nonpositive entries
    /// give space-form or rank-one symmetric models, positive entries are
    /// accepted but flagged.
    pub fn constant_diag(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("constant_diag needs at least one eigenvalue"));
        }
        if !eigenvalues.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid("constant_diag eigenvalues must be finite"));
        }
        let r0 = eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let risk = eigenvalues.iter().any(|e| *e > 0.0);
        Ok(CurvatureProfile {
            source: Arc::new(ProfileSource::Diag(eigenvalues.to_vec())),
            sign: 1.0,
            offset: 0.0,
            curvature_bound: r0,
            conjugate_point_risk: risk,
            kind: ProfileKind::ConstantDiagonal,
            base_domain: None,
        })
    }

    /// Diagonal profile with one named scalar expression per entry.
    pub fn time_varying(entries: Vec<TimeExpr>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("time_varying needs at least one entry"));
        }
        if !entries.iter().all(|e| e.is_finite()) {
            return Err(Error::invalid("time_varying entries must be finite"));
        }
        let r0 = entries.iter().map(|e| e.magnitude_bound()).fold(0.0, f64::max);
        let risk = entries.iter().any(|e| e.may_be_positive());
        Ok(CurvatureProfile {
            source: Arc::new(ProfileSource::Exprs(entries)),
            sign: 1.0,
            offset: 0.0,
            curvature_bound: r0,
            conjugate_point_risk: risk,
            kind: ProfileKind::TimeVarying,
            base_domain: None,
        })
    }

    /// `t -> K(c(t))` along a surface geodesic (normal dimension 1).
    pub fn surface_borne(surface: Arc<ConformalSurface>, path: Arc<GeodesicPath>) -> Self {
        let r0 = surface.curvature_bound;
        let risk = surface.max_curvature > 0.0;
        let domain = Some(path.t_span);
        CurvatureProfile {
            source: Arc::new(ProfileSource::Surface { surface, path }),
            sign: 1.0,
            offset: 0.0,
            curvature_bound: r0,
            conjugate_point_risk: risk,
            kind: ProfileKind::SurfaceBorne,
            base_domain: domain,
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Dimension of the normal space (`m = n - 1`).
    pub fn normal_dim(&self) -> usize {
        match self.source.as_ref() {
            ProfileSource::Diag(e) => e.len(),
            ProfileSource::Exprs(e) => e.len(),
            ProfileSource::Surface { .. } => 1,
        }
    }

    /// Manifold dimension `n`.
    pub fn dim_manifold(&self) -> usize {
        self.normal_dim() + 1
    }

    /// Valid parameter range, when the model is only known on a window.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.base_domain.map(|(lo, hi)| {
            if self.sign > 0.0 {
                (lo - self.offset, hi - self.offset)
            } else {
                (self.offset - hi, self.offset - lo)
            }
        })
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if let Some((lo, hi)) = self.domain() {
            if t < lo - 1e-9 || t > hi + 1e-9 {
                return Err(Error::DomainExceeded { t, lo, hi });
            }
        }
        Ok(())
    }

    /// Curvature operator at parameter `t` (symmetric `m x m`).
    pub fn evaluate(&self, t: f64) -> DMatrix<f64> {
        let tau = self.sign * t + self.offset;
        match self.source.as_ref() {
            ProfileSource::Diag(e) => DMatrix::from_fn(e.len(), e.len(), |i, j| {
                if i == j {
                    e[i]
                } else {
                    0.0
                }
            }),
            ProfileSource::Exprs(e) => DMatrix::from_fn(e.len(), e.len(), |i, j| {
                if i == j {
                    e[i].eval(tau)
                } else {
                    0.0
                }
            }),
            ProfileSource::Surface { surface, path } => {
                let k = surface.curvature(&path.point(tau));
                DMatrix::from_element(1, 1, k)
            }
        }
    }

    /// Checked evaluation for callers that may leave the model window.
    pub fn try_evaluate(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check_domain(t)?;
        Ok(self.evaluate(t))
    }

    /// The profile of the time-shifted geodesic: `evaluate'(t) = evaluate(t + t0)`.
    pub fn shifted(&self, t0: f64) -> Self {
        let mut p = self.clone();
        p.offset += p.sign * t0;
        p
    }

    /// The profile of the reversed geodesic: `evaluate'(t) = evaluate(-t)`.
    pub fn reversed(&self) -> Self {
        let mut p = self.clone();
        p.sign = -p.sign;
        p
    }

    /// The geodesic footpoint data when the profile is surface-borne.
    pub fn surface_data(&self) -> Option<(&Arc<ConformalSurface>, &Arc<GeodesicPath>)> {
        match self.source.as_ref() {
            ProfileSource::Surface { surface, path } => Some((surface, path)),
            _ => None,
        }
    }

    /// Max asymmetry and norm-excess over a grid; both should be zero up to
    /// rounding for well-formed profiles.
    pub fn check_invariants(&self, grid: &[f64]) -> Result<()> {
        for &t in grid {
            let r = self.try_evaluate(t)?;
            let norm = crate::linalg::op_norm(&r);
            let asym = crate::linalg::asymmetry(&r);
            if asym >= 1e-12 * norm.max(1.0) {
                return Err(Error::invalid(format!("asymmetric curvature operator at t = {t}")));
            }
            if norm > self.curvature_bound + 1e-9 {
                return Err(Error::invalid(format!(
                    "curvature norm {norm} exceeds bound {} at t = {t}",
                    self.curvature_bound
                )));
            }
        }
        Ok(())
    }

    /// Eigenvalues for constant-diagonal profiles.
    pub fn diag_eigenvalues(&self) -> Option<&[f64]> {
        match self.source.as_ref() {
            ProfileSource::Diag(e) => Some(e),
            _ => None,
        }
    }
}

/// Footpoint shorthand used by surface-borne profiles in reports.
pub fn surface_footpoint(profile: &CurvatureProfile) -> Option<Point> {
    profile.surface_data().map(|(_, path)| path.footpoint)
}
