//! Matrix Jacobi and Riccati integration along curvature profiles.
//!
//! Boundary tensors vanishing at `t = r` are produced by integrating the
//! inverse Riccati variable backward from the vanishing end and rebuilding
//! the tensor in the decaying direction, which stays well conditioned for
//! radii far beyond what forward fundamental-pair arithmetic tolerates.

mod boundary;
mod identities;
mod limits;
mod paths;
mod riccati;

pub use boundary::{
    boundary_derivative_s, boundary_derivative_u, boundary_tensor_s, boundary_tensor_s_on,
    boundary_tensor_u, fundamental_pair_boundary_s,
};
pub use identities::{
    check_transform_identity, verify_central_identities, CentralIdentityReport, TransformReport,
};
pub use limits::{
    stable_branch_path, stable_limit, stable_tensor_path, unstable_branch_path,
    unstable_tensor_path, LimitOptions, StableLimit,
};
pub use paths::{
    a_tensor, c_tensor, integrate_jacobi, wronskian, wronskian_drift, JacobiOptions,
    JacobiTensorPath, TensorRole,
};
pub use riccati::{riccati_flow, RiccatiPath};
