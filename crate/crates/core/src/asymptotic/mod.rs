//! Asymptotic second fundamental forms `U(v)`, `S(v)`, the operator
//! `D = U - S`, and the flow identities, bounds and variation formulas that
//! relate them.

mod constants;
mod curve;
mod flow;
mod forms;
mod hopf;

pub use constants::{
    a1_constant, a2_constant, b_envelope, c1_constant, c2_constant, c4_constant, c5_constant,
};
pub use curve::{build_stable_curve, contraction_check, BusemannRay, ContractionRow, StableCurve};
pub use flow::{
    check_ar_bound, check_decay_bounds, check_det_d_flow_invariance, check_hd_dh_identity,
    check_hd_dh_with_init, ArBoundReport, DecayReport, DetDFlowReport, HdDhReport,
};
pub use forms::{asymptotic_forms, check_asymptotic_harmonicity, AsymptoticData, HarmonicityReport};
pub use hopf::{second_fundamental_lipschitz, verify_hopf_formula, HopfReport, LipschitzReport};
