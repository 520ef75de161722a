//! Model definitions: the JSON-facing specification and the runtime model
//! objects the verification suites operate on.
//!
//! Three kinds are accepted. `constant_diag` models are homogeneous: every
//! direction sees the same curvature profile, and volume integrals over the
//! unit tangent sphere collapse to a single profile times the sphere area.
//! `time_varying` models describe a single geodesic's profile (no volume
//! geometry). `surface` models carry a conformal surface with a base point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    surface_geodesic, ConformalSurface, CurvatureProfile, GeodesicPath, PhiFamily, Point, TimeExpr,
};

/// JSON model document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    ConstantDiag {
        eigenvalues: Vec<f64>,
    },
    TimeVarying {
        entries: Vec<TimeExpr>,
    },
    Surface {
        phi: PhiFamily,
        #[serde(default = "default_base_point")]
        base_point: [f64; 2],
        #[serde(default = "default_base_angle")]
        base_angle: f64,
    },
}

fn default_base_point() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_base_angle() -> f64 {
    std::f64::consts::FRAC_PI_2
}

/// A runtime model.
#[derive(Debug, Clone)]
pub enum Model {
    /// Direction-independent constant-diagonal profile.
    Homogeneous { profile: CurvatureProfile },
    /// A single-geodesic scalar or diagonal profile.
    TimeVarying { profile: CurvatureProfile },
    /// A conformal surface with a base point and reference angle.
    Surface { surface: Arc<ConformalSurface>, base: Point, base_angle: f64 },
}

/// Geodesic window used when turning surface directions into profiles.
pub const SURFACE_PROFILE_EXTENT: f64 = 42.0;

impl Model {
    pub fn from_spec(spec: &ModelSpec) -> Result<Model> {
        match spec {
            ModelSpec::ConstantDiag { eigenvalues } => Ok(Model::Homogeneous {
                profile: CurvatureProfile::constant_diag(eigenvalues)?,
            }),
            ModelSpec::TimeVarying { entries } => Ok(Model::TimeVarying {
                profile: CurvatureProfile::time_varying(entries.clone())?,
            }),
            ModelSpec::Surface { phi, base_point, base_angle } => {
                let surface = Arc::new(ConformalSurface::new(phi.clone())?);
                let base = Point::new(base_point[0], base_point[1]);
                if !surface.in_domain(&base) {
                    return Err(Error::invalid("base point outside the surface chart"));
                }
                Ok(Model::Surface { surface, base, base_angle: *base_angle })
            }
        }
    }

    /// Manifold dimension `n`.
    pub fn dim(&self) -> usize {
        match self {
            Model::Homogeneous { profile } | Model::TimeVarying { profile } => {
                profile.dim_manifold()
            }
            Model::Surface { .. } => 2,
        }
    }

    /// The profile of the model's reference direction.
    pub fn profile(&self) -> Result<CurvatureProfile> {
        match self {
            Model::Homogeneous { profile } | Model::TimeVarying { profile } => Ok(profile.clone()),
            Model::Surface { surface, base, base_angle } => {
                let (_, p) =
                    surface_geodesic(surface, *base, *base_angle, SURFACE_PROFILE_EXTENT, 1e-11)?;
                Ok(p)
            }
        }
    }

    /// The geodesic realizing the reference direction (surfaces only).
    pub fn base_geodesic(&self) -> Result<Option<(Arc<GeodesicPath>, CurvatureProfile)>> {
        match self {
            Model::Surface { surface, base, base_angle } => {
                let (path, p) =
                    surface_geodesic(surface, *base, *base_angle, SURFACE_PROFILE_EXTENT, 1e-11)?;
                Ok(Some((path, p)))
            }
            _ => Ok(None),
        }
    }

    /// Profiles of `k` sampled directions/footpoints, for harmonicity-type
    /// sweeps. Homogeneous models repeat the single profile; time-varying
    /// models sample flow shifts; surfaces fan out angles at offset
    /// footpoints.
    pub fn direction_profiles(&self, k: usize) -> Result<Vec<CurvatureProfile>> {
        match self {
            Model::Homogeneous { profile } => Ok((0..k).map(|_| profile.clone()).collect()),
            Model::TimeVarying { profile } => Ok((0..k)
                .map(|i| profile.shifted(3.0 * i as f64 / k.max(1) as f64))
                .collect()),
            Model::Surface { surface, base, base_angle } => {
                let mut out = Vec::with_capacity(k);
                for i in 0..k {
                    let angle = base_angle + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                    // offset footpoints along a small square around the base
                    let step = 0.35 * ((i % 4) as f64 - 1.5);
                    let p = if i % 2 == 0 {
                        Point::new(base.x + step, base.y)
                    } else {
                        Point::new(base.x, base.y * (1.0 + 0.3 * step))
                    };
                    let (_, profile) =
                        surface_geodesic(surface, p, angle, SURFACE_PROFILE_EXTENT, 1e-11)?;
                    out.push(profile);
                }
                Ok(out)
            }
        }
    }

    /// Profiles for a uniform angular grid at point `p` (surface volume
    /// quadrature). Errors on non-surface models.
    pub fn angular_profiles(
        &self,
        p: Point,
        n_angles: usize,
        extent: f64,
    ) -> Result<Vec<CurvatureProfile>> {
        match self {
            Model::Surface { surface, .. } => {
                use rayon::prelude::*;
                (0..n_angles)
                    .into_par_iter()
                    .map(|i| {
                        let theta = 2.0 * std::f64::consts::PI * i as f64 / n_angles as f64;
                        surface_geodesic(surface, p, theta, extent, 1e-11).map(|(_, pr)| pr)
                    })
                    .collect()
            }
            _ => Err(Error::invalid("angular profiles only exist on surface models")),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Model::Homogeneous { .. })
    }

    pub fn surface(&self) -> Option<(&Arc<ConformalSurface>, Point, f64)> {
        match self {
            Model::Surface { surface, base, base_angle } => Some((surface, *base, *base_angle)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_model_documents() {
        let m: ModelSpec =
            serde_json::from_str(r#"{"kind":"constant_diag","eigenvalues":[-4.0,-1.0,-1.0]}"#)
                .unwrap();
        let model = Model::from_spec(&m).unwrap();
        assert_eq!(model.dim(), 4);
        assert!(model.is_homogeneous());

        let m: ModelSpec = serde_json::from_str(
            r#"{"kind":"time_varying","entries":[{"family":"sinusoidal","offset":-2.0,"amplitude":-1.0,"omega":1.0,"phase":0.0}]}"#,
        )
        .unwrap();
        let model = Model::from_spec(&m).unwrap();
        assert_eq!(model.dim(), 2);

        let m: ModelSpec = serde_json::from_str(
            r#"{"kind":"surface","phi":{"family":"log_conformal"},"base_point":[0.0,1.0]}"#,
        )
        .unwrap();
        let model = Model::from_spec(&m).unwrap();
        assert_eq!(model.dim(), 2);
        assert!(model.surface().is_some());
    }

    #[test]
    fn unknown_fields_and_kinds_rejected() {
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":"nonsense"}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(
            r#"{"kind":"constant_diag","eigenvalues":[-1.0],"bogus":3}"#
        )
        .is_err());
    }

    #[test]
    fn direction_profiles_counts() {
        let model = Model::from_spec(&ModelSpec::ConstantDiag { eigenvalues: vec![-1.0] }).unwrap();
        assert_eq!(model.direction_profiles(16).unwrap().len(), 16);
    }
}
