//! Numerical laboratory for geodesic-flow geometry on model manifolds.
//!
//! The crate integrates the matrix Jacobi equation `Y'' + R(t) Y = 0` and the
//! Riccati equation `V' + V^2 + R = 0` along curvature profiles, builds the
//! stable/unstable second fundamental forms of horospheres, and exposes
//! verification routines for the identities, bounds and growth laws that
//! relate them: flow invariance of `det D`, decay envelopes for boundary
//! tensors, volume entropy and purely exponential growth, Anosov divergence
//! rates and thin-triangle diagnostics.
//!
//! Three families of models are supported: constant-diagonal curvature
//! profiles (space forms and rank-one symmetric models), time-varying scalar
//! profiles, and two-dimensional conformal surfaces with closed-form
//! derivatives.

pub mod asymptotic;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod hyperbolic;
pub mod jacobi;
pub mod jets;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod quad;
pub mod report;

pub use error::{Error, Result};
