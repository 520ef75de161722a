//! Hyperbolicity diagnostics: exponential growth rates of Jacobi tensors,
//! two-sided divergence brackets, and thin-triangle constants on surfaces.

mod anosov;
mod divergence;
mod triangles;

pub use anosov::{anosov_exponent, AnosovFit, ANOSOV_THRESHOLD};
pub use divergence::{divergence_bounds, DivergenceReport};
pub use triangles::{thin_triangle_delta, TriangleReport, TriangleSampling};
