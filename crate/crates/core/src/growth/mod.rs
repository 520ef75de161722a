//! Volume of geodesic spheres and balls, volume entropy, purely exponential
//! growth, and the ratio limits connecting them to the mean curvature of
//! horospheres.

mod bounds;
mod entropy;
mod volume;

pub use bounds::{
    bounded_asymptote_check, horoball_slab_volume, horocycle_patch_length, lower_bound_ratio,
    model_patch_volume, rank_detection_from_growth, BoundedAsymptoteReport, LowerBoundReport,
    RankGrowthReport, RankVerdict,
};
pub use entropy::{
    check_purely_exponential, estimate_volume_entropy, EntropyFit, PurelyExponentialReport,
};
pub use volume::{ball_volume, cheeger_limit, sphere_volume, volume_curve, CheegerReport, VolumeCurve};
