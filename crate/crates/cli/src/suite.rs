//! The `paper-verification` suite: every acceptance criterion in order,
//! each producing pass/fail verdicts with their numeric evidence.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use horolab_core::asymptotic::{self, build_stable_curve, c1_constant};
use horolab_core::geometry::{ConformalSurface, CurvatureProfile, Point, TimeExpr};
use horolab_core::growth;
use horolab_core::hyperbolic::{self, TriangleSampling, ANOSOV_THRESHOLD};
use horolab_core::jacobi::{self, JacobiOptions, LimitOptions};
use horolab_core::linalg;
use horolab_core::model::{Model, ModelSpec};
use horolab_core::report::{claims, VerificationReport};

use crate::output::Table;

pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub reports: Vec<VerificationReport>,
    /// Set when the criterion aborted on a numerical error.
    pub numerical_error: Option<String>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.numerical_error.is_none() && self.reports.iter().all(|r| r.passed())
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail = match &self.numerical_error {
            Some(e) => format!(" (numerical failure: {e})"),
            None => {
                let failed: Vec<String> = self
                    .reports
                    .iter()
                    .filter(|r| !r.passed())
                    .map(|r| r.summary_line())
                    .collect();
                if failed.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", failed.join("; "))
                }
            }
        };
        format!("{status} criterion {:2}: {}{detail}", self.index, self.name)
    }
}

pub struct SuiteOutcome {
    pub criteria: Vec<CriterionResult>,
    pub tables: BTreeMap<String, Table>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed())
    }

    pub fn had_numerical_error(&self) -> bool {
        self.criteria.iter().any(|c| c.numerical_error.is_some())
    }
}

fn lim() -> LimitOptions {
    LimitOptions::default()
}

fn sin_profile() -> CurvatureProfile {
    CurvatureProfile::time_varying(vec![TimeExpr::Sinusoidal {
        offset: -2.0,
        amplitude: -1.0,
        omega: 1.0,
        phase: 0.0,
    }])
    .expect("valid entries")
}

fn diag_model(eigs: &[f64]) -> Model {
    Model::from_spec(&ModelSpec::ConstantDiag { eigenvalues: eigs.to_vec() }).expect("valid spec")
}

/// Run the full suite; `inject` optionally adds a designed negative control.
pub fn run_suite(inject: Option<&str>) -> anyhow::Result<SuiteOutcome> {
    let mut tables = BTreeMap::new();
    let mut criteria = Vec::new();
    type CriterionFn =
        Box<dyn FnOnce(&mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>>>;
    let runs: Vec<(usize, &'static str, CriterionFn)> = vec![
        (1, "space-form exactness", Box::new(criterion_1)),
        (2, "rank-one symmetric model", Box::new(criterion_2)),
        (3, "identity suite", Box::new(criterion_3)),
        (4, "bound suite", Box::new(criterion_4)),
        (5, "variation formula", Box::new(criterion_5)),
        (6, "Lipschitz estimate", Box::new(criterion_6)),
        (7, "det D flow invariance", Box::new(criterion_7)),
        (8, "volume suite", Box::new(criterion_8)),
        (9, "hyperbolicity suite", Box::new(criterion_9)),
        (10, "equivalence narrative", Box::new(criterion_10)),
        (11, "bounded asymptote suite", Box::new(criterion_11)),
        (12, "determinism", Box::new(criterion_12)),
    ];
    for (index, name, f) in runs {
        let result = match f(&mut tables) {
            Ok(reports) => CriterionResult { index, name, reports, numerical_error: None },
            Err(e) => CriterionResult {
                index,
                name,
                reports: Vec::new(),
                numerical_error: Some(e.to_string()),
            },
        };
        criteria.push(result);
    }
    if let Some(control) = inject {
        criteria.push(negative_control(control)?);
    }
    Ok(SuiteOutcome { criteria, tables })
}

/// A deliberately failing control: demand rank one of a flat model.
fn negative_control(kind: &str) -> anyhow::Result<CriterionResult> {
    match kind {
        "flat-rank-one" => {
            let model = diag_model(&[0.0, 0.0, 0.0]);
            let forms = asymptotic::asymptotic_forms(&model.profile()?, &lim())?;
            let mut rep =
                VerificationReport::new("injected flat control", Some(claims::RANK_FROM_GROWTH));
            rep.note("negative control: rank one demanded of a flat model");
            rep.check("det_d_lower_bound_violation", 1.0 - forms.det_d, 0.0);
            Ok(CriterionResult {
                index: 13,
                name: "injected flat control (expected FAIL)",
                reports: vec![rep],
                numerical_error: None,
            })
        }
        other => anyhow::bail!("unknown injection control `{other}`"),
    }
}

fn criterion_1(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let a = asymptotic::asymptotic_forms(&diag_model(&[-1.0]).profile()?, &lim())?;
    let mut rep = VerificationReport::new("space form n=2", Some(claims::SPACE_FORM_EXACTNESS));
    rep.check("u_error", (a.u[(0, 0)] - 1.0).abs(), 1e-6);
    rep.check("s_error", (a.s[(0, 0)] + 1.0).abs(), 1e-6);
    rep.check("det_d_error", (a.det_d - 2.0).abs(), 1e-6);
    rep.check("h_error", (a.h - 1.0).abs(), 1e-6);
    reports.push(rep);

    let a = asymptotic::asymptotic_forms(&diag_model(&[-1.0, -1.0, -1.0]).profile()?, &lim())?;
    let mut rep = VerificationReport::new("space form n=4", Some(claims::SPACE_FORM_EXACTNESS));
    rep.check("h_error", (a.h - 3.0).abs(), 1e-6);
    rep.check("det_d_error", (a.det_d - 8.0).abs(), 1e-6);
    reports.push(rep);
    Ok(reports)
}

fn criterion_2(tables: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let model = diag_model(&[-4.0, -1.0, -1.0]);
    let mut reports = Vec::new();
    let a = asymptotic::asymptotic_forms(&model.profile()?, &lim())?;
    let mut rep = VerificationReport::new("rank-one model forms", Some(claims::RANK_ONE_MODEL));
    rep.check("h_error", (a.h - 4.0).abs(), 1e-6);
    rep.check("det_d_error", (a.det_d - 16.0).abs(), 1e-5);
    rep.check("rho_min_error", (a.rho_min - 2.0).abs(), 1e-6);
    rep.check_flag("rank_one", a.rank == 1);
    reports.push(rep);

    let radii: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let curve = growth::volume_curve(&model, None, &radii, 0)?;
    push_growth_table(tables, "growth_rank_one", &curve, 4.0);
    let fit = growth::estimate_volume_entropy(&curve, (10.0, 20.0))?;
    let mut rep = VerificationReport::new("rank-one model entropy", Some(claims::VOLUME_ENTROPY));
    rep.check_range("h_vol", fit.h_vol, 3.98, 4.02);
    reports.push(rep);

    let ch = growth::cheeger_limit(&model, None, 20.0, 0)?;
    let mut rep = VerificationReport::new("rank-one model ratio", Some(claims::CHEEGER_LIMIT));
    rep.check_range("g(20)", ch.g_final, 3.99, 4.01);
    reports.push(rep);
    Ok(reports)
}

fn criterion_3(tables: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let profile = sin_profile();
    let ts: Vec<f64> = (1..=8).map(|i| i as f64).collect();
    let rep_core = jacobi::verify_central_identities(&profile, 12.0, &ts, 10.0, &lim())?;
    let mut reports = Vec::new();
    for (tag, val) in [
        (claims::CENTRAL_IDENTITY_C1, rep_core.max_c1),
        (claims::CENTRAL_IDENTITY_C2, rep_core.max_c2),
        (claims::CENTRAL_IDENTITY_C3, rep_core.max_c3),
    ] {
        let mut rep = VerificationReport::new("identity residual", Some(tag));
        rep.check("max_residual", val, 1e-6);
        reports.push(rep);
    }
    let mut rep = VerificationReport::new("wronskian drift", Some(claims::WRONSKIAN_CONSTANT));
    rep.check("drift", rep_core.wronskian_drift, 1e-8);
    reports.push(rep);

    let mut worst = 0.0f64;
    for &t in &ts {
        let tr = jacobi::check_transform_identity(&profile, t, 12.0 - t, &lim())?;
        worst = worst.max(tr.max_residual);
    }
    let mut rep = VerificationReport::new("transform identity", Some(claims::TRANSFORM_IDENTITY));
    rep.check("max_residual", worst, 1e-6);
    reports.push(rep);

    let mut table = Table::new(&["t", "c1", "c2", "c3"]);
    for e in &rep_core.entries {
        table.push(vec![e.t, e.c1, e.c2, e.c3]);
    }
    tables.insert("identity_suite".into(), table);
    Ok(reports)
}

fn criterion_4(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let profiles: Vec<CurvatureProfile> = vec![
        CurvatureProfile::constant_diag(&[0.0])?,
        CurvatureProfile::constant_diag(&[-1.0])?,
        CurvatureProfile::constant_diag(&[-4.0, -1.0])?,
        CurvatureProfile::constant_diag(&[-4.0, -1.0, -1.0])?,
        sin_profile(),
    ];

    // A'A^{-1} envelope at 100 grid points per profile
    let jopts = JacobiOptions { grid_h: 0.0792, ..Default::default() };
    let mut envelope_excess = 0.0f64;
    for p in &profiles {
        let a = jacobi::a_tensor(p, 8.0, &jopts)?;
        let sqrt_r0 = p.curvature_bound.sqrt();
        let mut counted = 0;
        for (t, (v, dv)) in a.ts.iter().zip(a.values.iter().zip(&a.derivs)) {
            if *t < 0.0792 - 1e-9 || counted >= 100 {
                continue;
            }
            counted += 1;
            let (v_inv, _) = linalg::try_invert(v, "envelope")?;
            let eigs = linalg::sym_eigenvalues(&(dv * v_inv));
            let upper = if sqrt_r0 > 0.0 {
                sqrt_r0 * (t * sqrt_r0).cosh() / (t * sqrt_r0).sinh()
            } else {
                1.0 / t
            };
            envelope_excess = envelope_excess
                .max(-sqrt_r0 - eigs[0])
                .max(eigs[eigs.len() - 1] - upper);
        }
    }
    let mut rep = VerificationReport::new("tensor quotient envelope", Some(claims::A_TENSOR_ENVELOPE));
    rep.check("envelope_excess", envelope_excess, 1e-6);
    reports.push(rep);

    // boundary norm bound over [0, 2] for r >= 2
    let mut c1_excess = 0.0f64;
    for p in profiles.iter().skip(1) {
        let c1 = c1_constant(p.curvature_bound, 2.0, 2.0);
        for r in [2.0, 6.0, 12.0] {
            let s = jacobi::boundary_tensor_s(p, r, 0.0, &JacobiOptions::default())?;
            let worst = s
                .ts
                .iter()
                .zip(&s.values)
                .filter(|(t, _)| **t <= 2.0 + 1e-9)
                .map(|(_, v)| linalg::op_norm(v))
                .fold(0.0, f64::max);
            c1_excess = c1_excess.max(worst - c1);
        }
    }
    let mut rep = VerificationReport::new("boundary norm bound", Some(claims::BOUNDARY_NORM_BOUND));
    rep.check("c1_excess", c1_excess, 0.0);
    reports.push(rep);

    // decay envelopes with proof-assembled constants
    for eigs in [vec![-1.0], vec![-4.0, -1.0, -1.0]] {
        let p = CurvatureProfile::constant_diag(&eigs)?;
        let d = asymptotic::check_decay_bounds(&p, None, 10.0, 6.0, &lim())?;
        let mut rep = VerificationReport::new(
            format!("decay envelope {eigs:?}"),
            Some(claims::DECAY_BOUNDS),
        );
        rep.check("a1_excess", d.a1_empirical - d.a1, 0.0);
        rep.check("a2_excess", d.a2_empirical.unwrap_or(f64::NAN) - d.a2.unwrap_or(0.0), 0.0);
        reports.push(rep);
    }

    // a/r envelope with a = a2^2, plus flat exactness to 1e-10
    let hyp = CurvatureProfile::constant_diag(&[-1.0])?;
    let ar = asymptotic::check_ar_bound(&hyp, &[2.0, 5.0, 8.0, 16.0], &lim())?;
    let mut rep = VerificationReport::new("a/r envelope", Some(claims::AR_ENVELOPE));
    rep.check_flag("rank_one_hypothesis", ar.rank_one_hypothesis);
    rep.check("envelope_excess", ar.envelope_excess.unwrap_or(f64::NAN), 0.0);
    rep.check("positivity_defect", ar.rows.iter().map(|r| r.2).fold(0.0, f64::max), 1e-9);
    reports.push(rep);

    let flat = CurvatureProfile::constant_diag(&[0.0])?;
    let ar = asymptotic::check_ar_bound(&flat, &[4.0, 8.0, 16.0], &lim())?;
    let mut rep = VerificationReport::new("flat exact difference", Some(claims::AR_ENVELOPE));
    let mut worst = 0.0f64;
    for (r, diff, _) in &ar.rows {
        worst = worst.max((diff - 1.0 / r).abs());
    }
    rep.check("difference_vs_1_over_r", worst, 1e-10);
    rep.check_flag("hypothesis_reported_failed", !ar.rank_one_hypothesis);
    reports.push(rep);
    Ok(reports)
}

fn criterion_5(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();

    // constant-curvature control: both sides vanish
    let uhp = Arc::new(ConformalSurface::upper_half_plane());
    let control = build_stable_curve(&uhp, Point::new(0.0, 1.0), std::f64::consts::FRAC_PI_2, 0.3, 9, 20.0)?;
    let rep_c = asymptotic::verify_hopf_formula(&uhp, &control, 4.0, 1, 32, &lim())?;
    let mut rep = VerificationReport::new("variation control", Some(claims::HOPF_VARIATION));
    rep.check("lhs_abs", rep_c.lhs.abs(), 1e-8);
    rep.check("rhs_abs", rep_c.rhs.abs(), 1e-8);
    reports.push(rep);

    // pinched surface: residual and quadrature convergence
    let pinched = Arc::new(ConformalSurface::pinched());
    let curve = build_stable_curve(
        &pinched,
        Point::new(0.3, 1.0),
        0.9 * std::f64::consts::FRAC_PI_2,
        0.25,
        33,
        20.0,
    )?;
    // the time quadrature is saturated at both levels so the refinement
    // ratio isolates the order-2 transversal rule
    let coarse = asymptotic::verify_hopf_formula(&pinched, &curve, 5.0, 4, 64, &lim())?;
    let fine = asymptotic::verify_hopf_formula(&pinched, &curve, 5.0, 2, 128, &lim())?;
    let mut rep = VerificationReport::new("variation formula", Some(claims::HOPF_VARIATION));
    rep.constant("lhs", fine.lhs);
    rep.constant("rhs", fine.rhs);
    rep.check("residual_rel", fine.residual_rel, 1e-3);
    rep.check_range("refinement_ratio", fine.residual_rel / coarse.residual_rel, 0.2, 0.8);
    rep.check("ds_r_cross_dev", fine.ds_r_cross_dev, 1e-2);
    reports.push(rep);
    Ok(reports)
}

fn criterion_6(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let pinched = Arc::new(ConformalSurface::pinched());
    let curve = build_stable_curve(
        &pinched,
        Point::new(0.3, 1.0),
        0.9 * std::f64::consts::FRAC_PI_2,
        0.12,
        17,
        20.0,
    )?;
    let l = asymptotic::second_fundamental_lipschitz(&pinched, &curve, 5.0, &lim())?;
    let mut rep = VerificationReport::new("Lipschitz ratios", Some(claims::LIPSCHITZ_FORMS));
    rep.check("stability", l.stability, 0.2);
    rep.check_flag("within_assembled_bound", l.within_bound);
    rep.constant("c5", l.c5);
    rep.constant("rho", l.rho);
    for (i, (ell, ratio)) in l.rows.iter().enumerate() {
        rep.constant(format!("arc_{i}_length"), *ell);
        rep.constant(format!("arc_{i}_ratio"), *ratio);
    }
    Ok(vec![rep])
}

fn criterion_7(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for eigs in [vec![-1.0], vec![-4.0, -1.0, -1.0]] {
        let p = CurvatureProfile::constant_diag(&eigs)?;
        let r = asymptotic::check_det_d_flow_invariance(&p, 3.0, 0.5, &lim())?;
        let mut rep = VerificationReport::new(
            format!("det D constancy {eigs:?}"),
            Some(claims::DET_D_FLOW),
        );
        rep.check("max_deviation", r.max_deviation, 1e-8);
        reports.push(rep);
    }
    let r = asymptotic::check_hd_dh_identity(&sin_profile(), 6.0, &lim())?;
    let mut rep = VerificationReport::new("derivative mechanism", Some(claims::HD_DH_IDENTITY));
    rep.check("max_residual", r.max_residual, 1e-5);
    reports.push(rep);
    Ok(reports)
}

fn criterion_8(tables: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();

    let h2 = diag_model(&[-1.0]);
    let radii: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let curve = growth::volume_curve(&h2, None, &radii, 0)?;
    push_growth_table(tables, "growth_h2", &curve, 1.0);
    let mut worst = 0.0f64;
    for (r, s) in curve.radii.iter().zip(&curve.sphere_vol).take(10) {
        let exact = 2.0 * PI * r.sinh();
        worst = worst.max((s - exact).abs() / exact);
    }
    let mut rep = VerificationReport::new("sphere volumes n=2", Some(claims::VOLUME_SPHERES));
    rep.check("max_rel_error", worst, 1e-4);
    reports.push(rep);

    let h3 = diag_model(&[-1.0, -1.0]);
    let curve3 = growth::volume_curve(&h3, None, &radii[..10], 0)?;
    let mut worst = 0.0f64;
    for (r, s) in curve3.radii.iter().zip(&curve3.sphere_vol) {
        let exact = 4.0 * PI * r.sinh().powi(2);
        worst = worst.max((s - exact).abs() / exact);
    }
    let mut rep = VerificationReport::new("sphere volumes n=3", Some(claims::VOLUME_SPHERES));
    rep.check("max_rel_error", worst, 1e-4);
    reports.push(rep);

    let lbr = growth::lower_bound_ratio(&h2, &[1.0, 2.0, 4.0, 8.0], 0, &lim())?;
    let mut rep = VerificationReport::new("ratio expressions", Some(claims::LOWER_BOUND_RATIO));
    rep.check("max_rel_gap", lbr.rows.iter().map(|r| r.3).fold(0.0, f64::max), 1e-5);
    rep.check("monotonicity_defect", lbr.monotonicity_defect, 1e-9);
    reports.push(rep);

    let pe = growth::check_purely_exponential(&curve, 1.0)?;
    let mut rep = VerificationReport::new("pinching constant", Some(claims::PURELY_EXPONENTIAL));
    rep.check_range("c", pe.c, 3.0, 3.3);
    reports.push(rep);
    Ok(reports)
}

fn criterion_9(tables: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();

    let fit = hyperbolic::anosov_exponent(&diag_model(&[-1.0]), 1, 20.0)?;
    let mut rep = VerificationReport::new("growth rate curvature -1", Some(claims::ANOSOV_GROWTH));
    rep.check("alpha_error", (fit.alpha - 1.0).abs(), 0.01);
    rep.check_flag("anosov_verdict", fit.anosov);
    reports.push(rep);

    let flat_fit = hyperbolic::anosov_exponent(&diag_model(&[0.0]), 1, 20.0)?;
    let mut rep = VerificationReport::new("growth rate flat", Some(claims::ANOSOV_GROWTH));
    rep.check_range("alpha", flat_fit.alpha, 0.0, 0.01 - 1e-12);
    rep.check_flag("non_anosov_verdict", !flat_fit.anosov);
    reports.push(rep);

    let d = hyperbolic::divergence_bounds(&diag_model(&[-1.0]), std::f64::consts::FRAC_PI_2, 0, 20.0)?;
    let mut rep = VerificationReport::new("divergence bracket", Some(claims::EXP_DIVERGENCE));
    rep.check("bracket_defect", d.bracket_defect, 1e-9);
    rep.check("alpha_low_error", (d.alpha_low - 1.0).abs(), 0.02);
    rep.check("alpha_up_error", (d.alpha_up - 1.0).abs(), 0.02);
    reports.push(rep);
    let mut table = Table::new(&["t", "lower", "upper", "log_lower_over_t", "log_upper_over_t"]);
    for i in 0..d.ts.len() {
        let t = d.ts[i];
        table.push(vec![t, d.lower[i], d.upper[i], d.lower[i].ln() / t, d.upper[i].ln() / t]);
    }
    tables.insert("divergence_h2".into(), table);

    let uhp = Arc::new(ConformalSurface::upper_half_plane());
    let tri = hyperbolic::thin_triangle_delta(&uhp, Point::new(0.0, 1.0), &TriangleSampling::default())?;
    let mut rep = VerificationReport::new("thin triangles", Some(claims::THIN_TRIANGLES));
    rep.check("delta", tri.delta, 0.93);
    rep.check_flag("no_skipped_triangles", tri.skipped == 0);
    reports.push(rep);
    Ok(reports)
}

fn criterion_10(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for eigs in [vec![-1.0], vec![-4.0, -1.0, -1.0]] {
        let model = diag_model(&eigs);
        let forms = asymptotic::asymptotic_forms(&model.profile()?, &lim())?;
        let fit = hyperbolic::anosov_exponent(&model, 1, 20.0)?;
        let div = hyperbolic::divergence_bounds(&model, std::f64::consts::FRAC_PI_2, 0, 20.0)?;
        let radii: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let curve = growth::volume_curve(&model, None, &radii, 0)?;
        let entropy = growth::estimate_volume_entropy(&curve, (10.0, 20.0))?;
        let pe = growth::check_purely_exponential(&curve, forms.h)?;
        let mut rep = VerificationReport::new(
            format!("all four diagnostics {eigs:?}"),
            Some(claims::EQUIVALENCES),
        );
        rep.check_flag("rank_one (rho_min > 0)", forms.rho_min > forms.eps_rank);
        rep.check_flag("anosov (alpha > threshold)", fit.alpha > ANOSOV_THRESHOLD);
        rep.check_flag("exponential divergence", div.alpha_low > ANOSOV_THRESHOLD);
        rep.check("entropy_matches_h", (entropy.h_vol - forms.h).abs(), 0.02);
        rep.check_flag("purely_exponential", pe.c.is_finite() && pe.c < 100.0);
        reports.push(rep);
    }

    // flat control: all four diagnostics must fail together
    let model = diag_model(&[0.0, 0.0, 0.0]);
    let forms = asymptotic::asymptotic_forms(&model.profile()?, &lim())?;
    let fit = hyperbolic::anosov_exponent(&model, 1, 20.0)?;
    let div = hyperbolic::divergence_bounds(&model, std::f64::consts::FRAC_PI_2, 0, 20.0)?;
    let radii: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let curve = growth::volume_curve(&model, None, &radii, 0)?;
    let entropy = growth::estimate_volume_entropy(&curve, (10.0, 20.0))?;
    // the flat mean curvature is 0 up to the limit tolerance; pass the exact
    // rate so the positivity precondition rejects it
    let h_flat = if forms.h.abs() < 1e-6 { 0.0 } else { forms.h };
    let pe_rejected = growth::check_purely_exponential(&curve, h_flat).is_err();
    let mut rep = VerificationReport::new("flat control fails all four", Some(claims::EQUIVALENCES));
    rep.check_flag("not_rank_one", forms.rho_min <= forms.eps_rank && forms.rank == 4);
    rep.check_flag("not_anosov", fit.alpha <= ANOSOV_THRESHOLD);
    rep.check_flag("not_exponentially_diverging", div.alpha_low <= ANOSOV_THRESHOLD);
    rep.check_flag("entropy_mismatch (|h_vol - h| > 0.02)", (entropy.h_vol - h_flat).abs() > 0.02);
    rep.check_flag("entropy_subexponential", entropy.h_vol < 0.5);
    rep.check_flag("purely_exponential_rejected (h = 0)", pe_rejected);
    reports.push(rep);
    Ok(reports)
}

fn criterion_11(_t: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let model = diag_model(&[-1.0]);
    let b = growth::bounded_asymptote_check(&model, 1, 10.0, 20.0, &lim())?;
    let mut rep = VerificationReport::new("bounded asymptote", Some(claims::BOUNDED_ASYMPTOTE));
    rep.check("a_minus_one", (b.a_emp - 1.0).abs(), 1e-6);
    rep.check_flag("u_norm_reciprocal", b.reciprocal_ok);
    rep.check_flag("polynomial_volume_bound", b.volume_bound_ok);
    reports.push(rep);

    let ch = growth::cheeger_limit(&model, None, 15.0, 0)?;
    let mut rep = VerificationReport::new("ratio limit", Some(claims::CHEEGER_LIMIT));
    rep.check("g15_minus_h", (ch.g_final - 1.0).abs(), 1e-5);
    reports.push(rep);
    Ok(reports)
}

fn criterion_12(tables: &mut BTreeMap<String, Table>) -> horolab_core::Result<Vec<VerificationReport>> {
    // regenerate a representative table under 1-thread and 8-thread pools
    // and demand bitwise identical CSV bytes
    let make = || -> horolab_core::Result<String> {
        let model = Model::from_spec(&ModelSpec::Surface {
            phi: horolab_core::geometry::PhiFamily::LogConformal,
            base_point: [0.0, 1.0],
            base_angle: std::f64::consts::FRAC_PI_2,
        })?;
        let radii: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let curve = growth::volume_curve(&model, None, &radii, 32)?;
        let mut table = Table::new(&["r", "sphere_vol", "ball_vol"]);
        for i in 0..curve.radii.len() {
            table.push(vec![curve.radii[i], curve.sphere_vol[i], curve.ball_vol[i]]);
        }
        Ok(table.to_csv())
    };
    let run_in_pool = |threads: usize| -> horolab_core::Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| horolab_core::Error::InvalidInput(e.to_string()))?;
        pool.install(make)
    };
    let csv1 = run_in_pool(1)?;
    let csv8 = run_in_pool(8)?;
    let mut rep = VerificationReport::new("worker-count determinism", None);
    rep.check_flag("bitwise_identical_csv", csv1 == csv8);
    let mut probe = Table::new(&["threads", "bytes"]);
    probe.push(vec![1.0, csv1.len() as f64]);
    probe.push(vec![8.0, csv8.len() as f64]);
    tables.insert("determinism_probe".into(), probe);
    Ok(vec![rep])
}

fn push_growth_table(tables: &mut BTreeMap<String, Table>, name: &str, curve: &growth::VolumeCurve, h: f64) {
    let mut table = Table::new(&["r", "sphere_vol", "ball_vol", "ratio_e_hr", "g_r", "quad_err"]);
    for i in 0..curve.radii.len() {
        let r = curve.radii[i];
        table.push(vec![
            r,
            curve.sphere_vol[i],
            curve.ball_vol[i],
            (curve.sphere_vol[i].ln() - h * r).exp(),
            curve.sphere_vol[i] / curve.ball_vol[i],
            curve.quad_error,
        ]);
    }
    tables.insert(name.to_string(), table);
}
