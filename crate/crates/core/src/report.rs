//! Machine-readable verification reports and the central registry of claim
//! tags they reference.

use std::collections::BTreeMap;

use serde::Serialize;

/// Registry of claim tags used by reports and the verification suite. Every
/// verdict a report carries points at one of these fixed labels.
pub mod claims {
    pub const SPACE_FORM_EXACTNESS: &str = "space-form Riccati fixed points";
    pub const RANK_ONE_MODEL: &str = "rank-one symmetric model forms";
    pub const CENTRAL_IDENTITY_C1: &str = "Lemma 2.4 (c1)";
    pub const CENTRAL_IDENTITY_C2: &str = "Lemma 2.4 (c2)";
    pub const CENTRAL_IDENTITY_C3: &str = "Lemma 2.4 (c3)";
    pub const TRANSFORM_IDENTITY: &str = "eq. (Stransform)";
    pub const WRONSKIAN_CONSTANT: &str = "Lemma 2.4 (Wronskian)";
    pub const A_TENSOR_ENVELOPE: &str = "Lemma 2.2";
    pub const BOUNDARY_NORM_BOUND: &str = "Cor 2.3";
    pub const DECAY_BOUNDS: &str = "Prop 2.6";
    pub const CONTRACTION_ENVELOPE: &str = "Cor 2.7";
    pub const AR_ENVELOPE: &str = "Lemma 3.3";
    pub const HOPF_VARIATION: &str = "Prop 2.1";
    pub const LIPSCHITZ_FORMS: &str = "Thm 2.9";
    pub const DET_D_FLOW: &str = "Prop 3.2";
    pub const HD_DH_IDENTITY: &str = "eq. (HGGH)";
    pub const ANOSOV_GROWTH: &str = "Anosov lower growth";
    pub const EXP_DIVERGENCE: &str = "eq. (expdiv)";
    pub const THIN_TRIANGLES: &str = "delta-thin triangles";
    pub const VOLUME_SPHERES: &str = "sphere volume density";
    pub const LOWER_BOUND_RATIO: &str = "Lemma 4.4";
    pub const PURELY_EXPONENTIAL: &str = "purely exponential growth";
    pub const VOLUME_ENTROPY: &str = "eq. (hvoldef)";
    pub const HOROBALL_SLAB: &str = "Cor 4.6";
    pub const RANK_FROM_GROWTH: &str = "rank detection from growth";
    pub const CHEEGER_LIMIT: &str = "Thm 5.4";
    pub const BOUNDED_ASYMPTOTE: &str = "Lemma 5.2";
    pub const EQUIVALENCES: &str = "Thm 1.3 equivalence narrative";
}

/// Pass/fail with the numeric evidence that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// One verification outcome: the operation, its inputs, every residual with
/// the tolerance it was held to, derived constants, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub op: String,
    pub claim: Option<&'static str>,
    pub inputs: serde_json::Value,
    /// residual name -> (value, tolerance)
    pub residuals: BTreeMap<String, (f64, f64)>,
    pub constants: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(op: impl Into<String>, claim: Option<&'static str>) -> Self {
        VerificationReport {
            op: op.into(),
            claim,
            inputs: serde_json::Value::Null,
            residuals: BTreeMap::new(),
            constants: BTreeMap::new(),
            verdict: Verdict::Pass,
            notes: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, inputs: serde_json::Value) -> Self {
        self.inputs = inputs;
        self
    }

    /// Record a residual with its tolerance; failing the tolerance flips the
    /// verdict.
    pub fn check(&mut self, name: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        let pass = value.is_finite() && value <= tol;
        self.residuals.insert(name.into(), (value, tol));
        if !pass {
            self.verdict = Verdict::Fail;
        }
        self
    }

    /// Record a value that must lie in a closed interval.
    pub fn check_range(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) -> &mut Self {
        let name = name.into();
        let pass = value.is_finite() && value >= lo && value <= hi;
        self.residuals.insert(format!("{name} [{lo}, {hi}]"), (value, hi));
        if !pass {
            self.verdict = Verdict::Fail;
        }
        self
    }

    /// Record a boolean condition as 0/1 evidence.
    pub fn check_flag(&mut self, name: impl Into<String>, ok: bool) -> &mut Self {
        self.residuals.insert(name.into(), (if ok { 0.0 } else { 1.0 }, 0.0));
        if !ok {
            self.verdict = Verdict::Fail;
        }
        self
    }

    pub fn constant(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.constants.insert(name.into(), value);
        self
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One human-readable pass/fail line.
    pub fn summary_line(&self) -> String {
        let tag = self.claim.map(|c| format!(" [{c}]")).unwrap_or_default();
        let status = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        format!("{status} {}{tag}", self.op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_flips_on_failed_residual() {
        let mut r = VerificationReport::new("demo", Some(claims::CENTRAL_IDENTITY_C1));
        r.check("ok", 1e-9, 1e-6);
        assert!(r.passed());
        r.check("bad", 1e-3, 1e-6);
        assert!(!r.passed());
        assert!(r.summary_line().starts_with("FAIL demo"));
        assert!(r.summary_line().contains("Lemma 2.4 (c1)"));
    }

    #[test]
    fn reports_serialize_with_evidence() {
        let mut r = VerificationReport::new("demo", None);
        r.check("residual", 1e-9, 1e-6).constant("h", 1.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"residual\""));
        assert!(json.contains("\"verdict\":\"pass\""));
    }
}
