//! Experiment configuration documents.

use serde::{Deserialize, Serialize};

use horolab_core::model::ModelSpec;

/// Experiment identifiers; unknown ids are rejected when the document is
/// parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SurfaceGeodesic,
    SurfaceDistance,
    BusemannValue,
    IntegrateJacobi,
    ATensor,
    BoundaryTensorS,
    BoundaryTensorU,
    StableLimit,
    RiccatiFlow,
    Wronskian,
    VerifyCentralIdentities,
    CheckTransformIdentity,
    AsymptoticForms,
    CheckAsymptoticHarmonicity,
    CheckDetDFlowInvariance,
    CheckHdDhIdentity,
    CheckArBound,
    CheckDecayBounds,
    BuildStableCurve,
    VerifyHopfFormula,
    SecondFundamentalLipschitz,
    SphereVolume,
    BallVolume,
    EstimateVolumeEntropy,
    CheckPurelyExponential,
    LowerBoundRatio,
    HoroballSlabVolume,
    CheegerLimit,
    BoundedAsymptoteCheck,
    RankDetectionFromGrowth,
    AnosovExponent,
    DivergenceBounds,
    ThinTriangleDelta,
}

impl ExperimentKind {
    pub fn id(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

/// Output file names, relative to the `--out` directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub json: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

/// A declarative experiment: model, experiment id, free-form parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_seed() -> u64 {
    7
}

/// Typed parameter extraction with positivity validation for tolerances.
pub struct Params<'a>(pub &'a serde_json::Value);

impl Params<'_> {
    pub fn f64(&self, key: &str, default: f64) -> anyhow::Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| anyhow::anyhow!("parameter `{key}` must be a number")),
        }
    }

    /// A strictly positive parameter (tolerances, radii, horizons).
    pub fn positive(&self, key: &str, default: f64) -> anyhow::Result<f64> {
        let v = self.f64(key, default)?;
        if v <= 0.0 || !v.is_finite() {
            anyhow::bail!("parameter `{key}` must be positive, got {v}");
        }
        Ok(v)
    }

    pub fn usize(&self, key: &str, default: usize) -> anyhow::Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| anyhow::anyhow!("parameter `{key}` must be a nonnegative integer")),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> anyhow::Result<Vec<f64>> {
        match self.0.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .as_array()
                .and_then(|a| a.iter().map(|x| x.as_f64()).collect::<Option<Vec<_>>>())
                .ok_or_else(|| anyhow::anyhow!("parameter `{key}` must be a list of numbers")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reject() {
        let good = r#"{
            "model": {"kind": "constant_diag", "eigenvalues": [-1.0]},
            "experiment": "asymptotic_forms",
            "params": {"tol": 1e-10}
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(good).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::AsymptoticForms);
        assert_eq!(cfg.seed, 7);

        let bad = r#"{
            "model": {"kind": "constant_diag", "eigenvalues": [-1.0]},
            "experiment": "not_an_experiment"
        }"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let v: serde_json::Value = serde_json::from_str(r#"{"tol": -1.0}"#).unwrap();
        assert!(Params(&v).positive("tol", 1e-10).is_err());
        let v: serde_json::Value = serde_json::from_str(r#"{}"#).unwrap();
        assert_eq!(Params(&v).positive("tol", 1e-10).unwrap(), 1e-10);
    }
}
