//! Manifold models: curvature profiles along geodesics and the
//! two-dimensional conformal-surface testbed.

mod geodesic;
mod profile;
mod surface;

pub use geodesic::{
    busemann_value, flow, geodesic_between, surface_distance, surface_geodesic, BusemannValue,
    GeodesicPath, GeodesicSample,
};
pub use profile::{surface_footpoint, CurvatureProfile, ProfileKind, TimeExpr};
pub use surface::{ConformalSurface, PhiFamily, Point};
