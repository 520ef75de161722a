//! Dispatch from experiment configurations to the library operations.

use std::sync::Arc;
use std::time::Instant;

use serde_json::json;

use horolab_core::asymptotic::{self, build_stable_curve};
use horolab_core::geometry::{self, Point};
use horolab_core::growth;
use horolab_core::hyperbolic::{self, TriangleSampling};
use horolab_core::jacobi::{self, JacobiOptions, LimitOptions};
use horolab_core::linalg;
use horolab_core::model::Model;
use horolab_core::report::{claims, VerificationReport};

use crate::config::{ExperimentConfig, ExperimentKind, Params};
use crate::output::{RunReport, Table};

/// How an experiment ended.
pub enum RunOutcome {
    Done(RunReport),
    /// Invalid configuration (exit code 2).
    Config(String),
    /// Numerical failure with the partial report (exit code 3).
    Numerical { error: String, partial: RunReport },
}

pub fn run(cfg: &ExperimentConfig) -> RunOutcome {
    let started = Instant::now();
    let inputs = json!({
        "model": cfg.model,
        "params": cfg.params,
        "seed": cfg.seed,
    });
    let mut report = RunReport::new(cfg.experiment.id(), inputs);

    let model = match Model::from_spec(&cfg.model) {
        Ok(m) => m,
        Err(e) => return RunOutcome::Config(e.to_string()),
    };
    let p = Params(&cfg.params);

    let result = dispatch(cfg, &model, &p, &mut report);
    report.finish(started);
    match result {
        Ok(()) => RunOutcome::Done(report),
        Err(DispatchError::Config(msg)) => RunOutcome::Config(msg),
        Err(DispatchError::Numerical(msg)) => RunOutcome::Numerical { error: msg, partial: report },
    }
}

enum DispatchError {
    Config(String),
    Numerical(String),
}

impl From<horolab_core::Error> for DispatchError {
    fn from(e: horolab_core::Error) -> Self {
        DispatchError::Numerical(e.to_string())
    }
}

// parameter-extraction errors are configuration errors
fn cfg_err(e: anyhow::Error) -> DispatchError {
    DispatchError::Config(e.to_string())
}

fn lim_options(p: &Params) -> Result<LimitOptions, DispatchError> {
    let tol = p.positive("tol", 1e-10).map_err(cfg_err)?;
    Ok(LimitOptions { tol, ..Default::default() })
}

fn surface_of(model: &Model) -> Result<(Arc<horolab_core::geometry::ConformalSurface>, Point, f64), DispatchError> {
    model
        .surface()
        .map(|(s, b, a)| (s.clone(), b, a))
        .ok_or_else(|| DispatchError::Config("this experiment needs a surface model".into()))
}

fn dispatch(
    cfg: &ExperimentConfig,
    model: &Model,
    p: &Params,
    out: &mut RunReport,
) -> Result<(), DispatchError> {
    use ExperimentKind as K;
    match cfg.experiment {
        K::SurfaceGeodesic => {
            let (surface, base, angle) = surface_of(model)?;
            let extent = p.positive("extent", 6.0).map_err(cfg_err)?;
            let tol = p.positive("tol", 1e-11).map_err(cfg_err)?;
            let (path, profile) = geometry::surface_geodesic(&surface, base, angle, extent, tol)?;
            let mut rep = VerificationReport::new("surface_geodesic", None);
            rep.check("speed_defect", path.speed_defect(&surface), 1e-8);
            rep.check("equation_defect", path.equation_defect(&surface), 1e-6);
            let mut table = Table::new(&["t", "x", "y", "curvature"]);
            for s in &path.samples {
                table.push(vec![s.t, s.x, s.y, profile.evaluate(s.t)[(0, 0)]]);
            }
            out.tables.insert("geodesic".into(), table);
            out.reports.push(rep);
        }
        K::SurfaceDistance => {
            let (surface, base, _) = surface_of(model)?;
            let q = p.f64_list("q", &[base.x + 1.0, base.y]).map_err(cfg_err)?;
            let tol = p.positive("tol", 1e-10).map_err(cfg_err)?;
            let q = Point::new(q[0], q[1]);
            let d = geometry::surface_distance(&surface, base, q, tol)?;
            let d_rev = geometry::surface_distance(&surface, q, base, tol)?;
            let mut rep = VerificationReport::new("surface_distance", None);
            rep.constant("distance", d);
            rep.check("symmetry", (d - d_rev).abs(), 1e-8);
            out.reports.push(rep);
        }
        K::BusemannValue => {
            let (surface, base, angle) = surface_of(model)?;
            let q = p.f64_list("q", &[base.x, base.y * 2.0]).map_err(cfg_err)?;
            let horizon = p.positive("horizon", 20.0).map_err(cfg_err)?;
            let b = geometry::busemann_value(&surface, base, angle, Point::new(q[0], q[1]), horizon)?;
            let mut rep = VerificationReport::new("busemann_value", None);
            rep.constant("value", b.value);
            rep.check("cauchy_estimate", b.cauchy, 1e-4);
            out.reports.push(rep);
        }
        K::IntegrateJacobi | K::ATensor => {
            let profile = model.profile()?;
            let t_max = p.positive("t_max", 5.0).map_err(cfg_err)?;
            let jopts = JacobiOptions::default();
            let path = if cfg.experiment == K::ATensor {
                jacobi::a_tensor(&profile, t_max, &jopts)?
            } else {
                let m = profile.normal_dim();
                let y0 = nalgebra::DMatrix::identity(m, m)
                    * p.f64("y0_scale", 1.0).map_err(cfg_err)?;
                let y0p = nalgebra::DMatrix::identity(m, m)
                    * p.f64("y0p_scale", 0.0).map_err(cfg_err)?;
                jacobi::integrate_jacobi(&profile, &y0, &y0p, 0.0, t_max, &jopts)?
            };
            let mut rep = VerificationReport::new(cfg.experiment.id(), None);
            let bound = 1e-7 * (1.0 + profile.curvature_bound) * path.max_norm();
            rep.check("residual_max", path.residual_max, bound);
            rep.constant("min_singular_value", path.min_singular_value_on(t_max * 0.01, t_max));
            let mut table = Table::new(&["t", "norm", "min_singular_value"]);
            for (t, v) in path.ts.iter().zip(&path.values) {
                table.push(vec![*t, linalg::op_norm(v), linalg::min_singular_value(v)]);
            }
            out.tables.insert("tensor".into(), table);
            out.reports.push(rep);
        }
        K::BoundaryTensorS | K::BoundaryTensorU => {
            let profile = model.profile()?;
            let r = p.positive("r", 4.0).map_err(cfg_err)?;
            let jopts = JacobiOptions::default();
            let mut rep = VerificationReport::new(cfg.experiment.id(), None);
            let path = if cfg.experiment == K::BoundaryTensorS {
                jacobi::boundary_tensor_s(&profile, r, 0.0, &jopts)?
            } else {
                jacobi::boundary_tensor_u(&profile, r, &jopts)?
            };
            let at0 = path.value_at(0.0)?;
            let m = profile.normal_dim();
            let id = nalgebra::DMatrix::<f64>::identity(m, m);
            rep.check("identity_at_zero", linalg::op_norm(&(at0 - id)), 1e-12);
            let vanish_at = if cfg.experiment == K::BoundaryTensorS { r } else { -r };
            rep.check("vanishing_end", linalg::op_norm(path.value_at(vanish_at)?), 1e-8);
            rep.constant("derivative_at_zero_norm", linalg::op_norm(path.deriv_at(0.0)?));
            out.reports.push(rep);
        }
        K::StableLimit => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let lim = jacobi::stable_limit(&profile, &opts)?;
            let mut rep = VerificationReport::new("stable_limit", None);
            rep.constant("r_star", lim.r_star);
            rep.constant("cauchy", lim.cauchy);
            rep.check("monotone_defect", lim.monotone_defect, 1e-9);
            rep.check_flag("converged_or_flagged_slow", lim.converged || lim.slow_convergence);
            let mut table = Table::new(&["r", "norm", "r_times_diff"]);
            for ((r, w), (_, ar)) in lim.trace.iter().zip(&lim.ar_ratios) {
                table.push(vec![*r, linalg::op_norm(w), *ar]);
            }
            out.tables.insert("trace".into(), table);
            out.reports.push(rep);
        }
        K::RiccatiFlow => {
            let profile = model.profile()?;
            let m = profile.normal_dim();
            let v0 = nalgebra::DMatrix::identity(m, m) * p.f64("v0_scale", 0.0).map_err(cfg_err)?;
            let t_max = p.positive("t_max", 4.0).map_err(cfg_err)?;
            let path = jacobi::riccati_flow(&profile, &v0, 0.0, t_max, 0.01, &Default::default())?;
            let mut rep = VerificationReport::new("riccati_flow", None);
            let bound = 1e-7 * (1.0 + profile.curvature_bound).powi(2);
            rep.check("residual_max", path.residual_max, bound);
            rep.check("asymmetry_max", path.asymmetry_max, 1e-9);
            out.reports.push(rep);
        }
        K::Wronskian => {
            let profile = model.profile()?;
            let r = p.positive("r", 4.0).map_err(cfg_err)?;
            let opts = lim_options(p)?;
            let jopts = JacobiOptions::default();
            let s = jacobi::boundary_tensor_s(&profile, r, 0.0, &jopts)?;
            let u = jacobi::unstable_tensor_path(&profile, 0.0, r * 0.75, 0.01, &opts)?;
            let w0 = jacobi::wronskian(&u, &s, 0.0)?;
            let drift = jacobi::wronskian_drift(&u, &s)?;
            let mut rep = VerificationReport::new("wronskian", Some(claims::WRONSKIAN_CONSTANT));
            rep.constant("w_at_zero_norm", linalg::op_norm(&w0));
            rep.check("drift", drift, 1e-8);
            out.reports.push(rep);
        }
        K::VerifyCentralIdentities => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let r = p.positive("r", 12.0).map_err(cfg_err)?;
            let t_tail = p.positive("t_tail", 10.0).map_err(cfg_err)?;
            let ts = p.f64_list("ts", &[1.0, 2.0, 3.0, 4.0]).map_err(cfg_err)?;
            let tol = p.positive("residual_tol", 1e-6).map_err(cfg_err)?;
            let rep_core = jacobi::verify_central_identities(&profile, r, &ts, t_tail, &opts)?;
            for (tag, val) in [
                (claims::CENTRAL_IDENTITY_C1, rep_core.max_c1),
                (claims::CENTRAL_IDENTITY_C2, rep_core.max_c2),
                (claims::CENTRAL_IDENTITY_C3, rep_core.max_c3),
            ] {
                let mut rep = VerificationReport::new("verify_central_identities", Some(tag));
                rep.check("max_residual", val, tol);
                out.reports.push(rep);
            }
            let mut rep =
                VerificationReport::new("verify_central_identities", Some(claims::WRONSKIAN_CONSTANT));
            rep.check("wronskian_drift", rep_core.wronskian_drift, 1e-8);
            rep.constant("tail_bound_rel", rep_core.tail_bound_rel);
            out.reports.push(rep);
            let mut table = Table::new(&["t", "c1", "c2", "c3"]);
            for e in &rep_core.entries {
                table.push(vec![e.t, e.c1, e.c2, e.c3]);
            }
            out.tables.insert("identities".into(), table);
        }
        K::CheckTransformIdentity => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let t = p.positive("t", 1.0).map_err(cfg_err)?;
            let x = p.positive("x", 2.0).map_err(cfg_err)?;
            let tol = p.positive("residual_tol", 1e-6).map_err(cfg_err)?;
            let r = jacobi::check_transform_identity(&profile, t, x, &opts)?;
            let mut rep =
                VerificationReport::new("check_transform_identity", Some(claims::TRANSFORM_IDENTITY));
            rep.check("max_residual", r.max_residual, tol);
            out.reports.push(rep);
        }
        K::AsymptoticForms => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let a = asymptotic::asymptotic_forms(&profile, &opts)?;
            let mut rep = VerificationReport::new("asymptotic_forms", None);
            rep.constant("h", a.h);
            rep.constant("det_d", a.det_d);
            rep.constant("rho_min", a.rho_min);
            rep.constant("rank", a.rank as f64);
            rep.constant("r_used", a.r_used);
            rep.check("d_psd_defect", a.d_psd_defect, 1e-8);
            rep.check("band_defect", a.band_defect, 1e-6);
            rep.check_flag("converged_or_flagged_slow", a.converged || a.slow_convergence);
            if a.det_d > a.eps_rank {
                rep.check_flag("h_positive_when_det_d_positive", a.h > 0.0);
            }
            out.reports.push(rep);
        }
        K::CheckAsymptoticHarmonicity => {
            let opts = lim_options(p)?;
            let n = p.usize("samples", 16).map_err(cfg_err)?;
            let tol = p.positive("dev_tol", 1e-6).map_err(cfg_err)?;
            let profiles = model.direction_profiles(n)?;
            let rep_core = asymptotic::check_asymptotic_harmonicity(&profiles, tol, &opts)?;
            let mut rep = VerificationReport::new("check_asymptotic_harmonicity", None);
            rep.constant("h_mean", rep_core.h_mean);
            rep.constant("h_max_dev", rep_core.h_max_dev);
            rep.check_flag("verdict_ah", rep_core.asymptotically_harmonic);
            out.reports.push(rep);
        }
        K::CheckDetDFlowInvariance => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let t_max = p.positive("t_max", 4.0).map_err(cfg_err)?;
            let step = p.positive("step", 0.25).map_err(cfg_err)?;
            let dev_tol = p.positive("dev_tol", 1e-8).map_err(cfg_err)?;
            let r = asymptotic::check_det_d_flow_invariance(&profile, t_max, step, &opts)?;
            let mut rep =
                VerificationReport::new("check_det_d_flow_invariance", Some(claims::DET_D_FLOW));
            rep.check("max_deviation", r.max_deviation, dev_tol);
            rep.check("route_gap", r.route_gap, 1e-6);
            if let Some(m) = r.mechanism_residual {
                rep.constant("mechanism_residual", m);
            }
            let mut table = Table::new(&["t", "det_d", "tr_h"]);
            for i in 0..r.ts.len() {
                table.push(vec![r.ts[i], r.det_d[i], r.tr_h[i]]);
            }
            out.tables.insert("det_d_flow".into(), table);
            out.reports.push(rep);
        }
        K::CheckHdDhIdentity => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let t_max = p.positive("t_max", 6.0).map_err(cfg_err)?;
            let tol = p.positive("residual_tol", 1e-5).map_err(cfg_err)?;
            let r = asymptotic::check_hd_dh_identity(&profile, t_max, &opts)?;
            let mut rep = VerificationReport::new("check_hd_dh_identity", Some(claims::HD_DH_IDENTITY));
            rep.check("max_residual", r.max_residual, tol);
            out.reports.push(rep);
        }
        K::CheckArBound => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let r_list = p.f64_list("r_list", &[2.0, 4.0, 8.0, 16.0]).map_err(cfg_err)?;
            let r = asymptotic::check_ar_bound(&profile, &r_list, &opts)?;
            let mut rep = VerificationReport::new("check_ar_bound", Some(claims::AR_ENVELOPE));
            rep.check("monotonicity_defect", r.monotonicity_defect, 1e-9);
            rep.check(
                "positivity_defect",
                r.rows.iter().map(|x| x.2).fold(0.0, f64::max),
                1e-9,
            );
            if let (Some(a), Some(excess)) = (r.envelope_a, r.envelope_excess) {
                rep.constant("envelope_a", a);
                rep.check("envelope_excess", excess, 0.0);
            } else {
                rep.note("rank-one hypothesis failed; only the r*diff table is reported");
            }
            let mut table = Table::new(&["r", "diff_norm", "r_times_diff"]);
            for ((r_val, d, _), (_, rd)) in r.rows.iter().zip(&r.r_times_diff) {
                table.push(vec![*r_val, *d, *rd]);
            }
            out.tables.insert("ar_bound".into(), table);
            out.reports.push(rep);
        }
        K::CheckDecayBounds => {
            let opts = lim_options(p)?;
            let profile = model.profile()?;
            let r = p.positive("r", 10.0).map_err(cfg_err)?;
            let t_max = p.positive("t_max", 6.0).map_err(cfg_err)?;
            let d = asymptotic::check_decay_bounds(&profile, None, r, t_max, &opts)?;
            let mut rep = VerificationReport::new("check_decay_bounds", Some(claims::DECAY_BOUNDS));
            rep.constant("rho", d.rho);
            rep.constant("a1_empirical", d.a1_empirical);
            rep.check("a1_excess", d.a1_empirical - d.a1, 0.0);
            match (d.a2_empirical, d.a2) {
                (Some(emp), Some(a2)) => {
                    rep.constant("a2_empirical", emp);
                    rep.check("a2_excess", emp - a2, 0.0);
                }
                _ => {
                    rep.note("positivity hypothesis failed: growth bound only");
                }
            }
            out.reports.push(rep);
        }
        K::BuildStableCurve => {
            let (surface, base, angle) = surface_of(model)?;
            let arc = p.positive("arc_span", 0.25).map_err(cfg_err)?;
            let n = p.usize("samples", 9).map_err(cfg_err)?;
            let horizon = p.positive("horizon", 20.0).map_err(cfg_err)?;
            let curve = build_stable_curve(&surface, base, angle, arc, n, horizon)?;
            let mut rep = VerificationReport::new("build_stable_curve", None);
            rep.check("busemann_residual_max", curve.busemann_residual_max, 1e-4);
            rep.constant("length", curve.length);
            let mut table = Table::new(&["s", "x", "y", "theta"]);
            for i in 0..curve.len() {
                table.push(vec![
                    curve.params[i],
                    curve.footpoints[i].x,
                    curve.footpoints[i].y,
                    curve.thetas[i],
                ]);
            }
            out.tables.insert("stable_curve".into(), table);
            out.reports.push(rep);
        }
        K::VerifyHopfFormula => {
            let (surface, base, angle) = surface_of(model)?;
            let opts = lim_options(p)?;
            let arc = p.positive("arc_span", 0.25).map_err(cfg_err)?;
            let n = p.usize("samples", 17).map_err(cfg_err)?;
            let horizon = p.positive("horizon", 20.0).map_err(cfg_err)?;
            let r = p.positive("r", 5.0).map_err(cfg_err)?;
            let n_t = p.usize("t_quad", 32).map_err(cfg_err)?;
            let stride = p.usize("stride", 1).map_err(cfg_err)?.max(1);
            let tol = p.positive("residual_tol", 1e-3).map_err(cfg_err)?;
            let curve = build_stable_curve(&surface, base, angle, arc, n, horizon)?;
            let h = asymptotic::verify_hopf_formula(&surface, &curve, r, stride, n_t, &opts)?;
            let mut rep = VerificationReport::new("verify_hopf_formula", Some(claims::HOPF_VARIATION));
            rep.constant("lhs", h.lhs);
            rep.constant("rhs", h.rhs);
            rep.check("residual_rel", h.residual_rel, tol);
            rep.check("ds_r_cross_dev", h.ds_r_cross_dev, 1e-2);
            rep.check("ds_r_bound_ratio", h.ds_r_bound_ratio, 1.0);
            out.reports.push(rep);
        }
        K::SecondFundamentalLipschitz => {
            let (surface, base, angle) = surface_of(model)?;
            let opts = lim_options(p)?;
            let arc = p.positive("arc_span", 0.12).map_err(cfg_err)?;
            let n = p.usize("samples", 17).map_err(cfg_err)?;
            let horizon = p.positive("horizon", 20.0).map_err(cfg_err)?;
            let r = p.positive("r", 5.0).map_err(cfg_err)?;
            let curve = build_stable_curve(&surface, base, angle, arc, n, horizon)?;
            let l = asymptotic::second_fundamental_lipschitz(&surface, &curve, r, &opts)?;
            let mut rep =
                VerificationReport::new("second_fundamental_lipschitz", Some(claims::LIPSCHITZ_FORMS));
            rep.check("stability", l.stability, 0.2);
            rep.check_flag("within_assembled_bound", l.within_bound);
            rep.constant("c5", l.c5);
            let mut table = Table::new(&["arc_length", "ratio"]);
            for (ell, ratio) in &l.rows {
                table.push(vec![*ell, *ratio]);
            }
            out.tables.insert("lipschitz".into(), table);
            out.reports.push(rep);
        }
        K::SphereVolume | K::BallVolume => {
            let r = p.positive("r", 2.0).map_err(cfg_err)?;
            let n_angles = p.usize("quad_nodes", 64).map_err(cfg_err)?;
            let (v, err) = if cfg.experiment == K::SphereVolume {
                growth::sphere_volume(model, None, r, n_angles)?
            } else {
                growth::ball_volume(model, None, r, n_angles)?
            };
            let mut rep = VerificationReport::new(cfg.experiment.id(), Some(claims::VOLUME_SPHERES));
            rep.constant("value", v);
            rep.constant("quad_error", err);
            out.reports.push(rep);
        }
        K::EstimateVolumeEntropy | K::CheckPurelyExponential | K::CheegerLimit => {
            let r_max = p.positive("r_max", 20.0).map_err(cfg_err)?;
            let n_angles = p.usize("quad_nodes", 64).map_err(cfg_err)?;
            let radii: Vec<f64> = (1..=(r_max.floor() as usize)).map(|i| i as f64).collect();
            let curve = growth::volume_curve(model, None, &radii, n_angles)?;
            let opts = lim_options(p)?;
            let h_ref = asymptotic::asymptotic_forms(&model.profile()?, &opts)?.h;
            let mut table =
                Table::new(&["r", "sphere_vol", "ball_vol", "ratio_e_hr", "g_r", "quad_err"]);
            for i in 0..curve.radii.len() {
                table.push(vec![
                    curve.radii[i],
                    curve.sphere_vol[i],
                    curve.ball_vol[i],
                    (curve.sphere_vol[i].ln() - h_ref * curve.radii[i]).exp(),
                    curve.sphere_vol[i] / curve.ball_vol[i],
                    curve.quad_error,
                ]);
            }
            out.tables.insert("volumes".into(), table);
            match cfg.experiment {
                K::EstimateVolumeEntropy => {
                    let lo = p.positive("window_lo", 10.0).map_err(cfg_err)?;
                    let hi = p.positive("window_hi", r_max).map_err(cfg_err)?;
                    let fit = growth::estimate_volume_entropy(&curve, (lo, hi))?;
                    let mut rep =
                        VerificationReport::new("estimate_volume_entropy", Some(claims::VOLUME_ENTROPY));
                    rep.constant("h_vol", fit.h_vol);
                    rep.constant("window_slope", fit.window_slope);
                    rep.constant("sphere_slope", fit.sphere_slope);
                    out.reports.push(rep);
                }
                K::CheckPurelyExponential => {
                    let h = p.positive("h", 1.0).map_err(cfg_err)?;
                    let rep_core = growth::check_purely_exponential(&curve, h)?;
                    let mut rep = VerificationReport::new(
                        "check_purely_exponential",
                        Some(claims::PURELY_EXPONENTIAL),
                    );
                    rep.constant("c", rep_core.c);
                    rep.constant("r_extremal", rep_core.r_extremal);
                    out.reports.push(rep);
                }
                _ => {
                    let rep_core = growth::cheeger_limit(model, None, r_max, n_angles)?;
                    let mut rep = VerificationReport::new("cheeger_limit", Some(claims::CHEEGER_LIMIT));
                    rep.constant("g_final", rep_core.g_final);
                    rep.constant("limit_estimate", rep_core.limit_estimate);
                    out.reports.push(rep);
                }
            }
        }
        K::LowerBoundRatio => {
            let opts = lim_options(p)?;
            let r_list = p.f64_list("r_list", &[1.0, 2.0, 4.0, 8.0]).map_err(cfg_err)?;
            let n_angles = p.usize("quad_nodes", 32).map_err(cfg_err)?;
            let tol = p.positive("gap_tol", 1e-5).map_err(cfg_err)?;
            let r = growth::lower_bound_ratio(model, &r_list, n_angles, &opts)?;
            let mut rep = VerificationReport::new("lower_bound_ratio", Some(claims::LOWER_BOUND_RATIO));
            let worst_gap = r.rows.iter().map(|x| x.3).fold(0.0, f64::max);
            rep.check("route_gap_rel", worst_gap, tol);
            if r.ah_satisfied {
                rep.check("monotonicity_defect", r.monotonicity_defect, 1e-8);
            } else {
                rep.note("mean-curvature hypothesis failed; bound not asserted");
            }
            rep.constant("c1_low", r.c1_low);
            let mut table = Table::new(&["r", "ratio_e_hr", "integral_form", "rel_gap"]);
            for (rr, a, b, g) in &r.rows {
                table.push(vec![*rr, *a, *b, *g]);
            }
            out.tables.insert("lower_bound".into(), table);
            out.reports.push(rep);
        }
        K::HoroballSlabVolume => {
            let opts = lim_options(p)?;
            let rho = p.positive("rho", 2.0).map_err(cfg_err)?;
            let r = p.f64("r", 3.0).map_err(cfg_err)?;
            let vol0 = growth::model_patch_volume(model, rho)?;
            let h = asymptotic::asymptotic_forms(&model.profile()?, &opts)?.h;
            let v = growth::horoball_slab_volume(h, vol0, rho, r)?;
            let mut rep = VerificationReport::new("horoball_slab_volume", Some(claims::HOROBALL_SLAB));
            rep.constant("vol0", vol0);
            rep.constant("slab_volume", v);
            rep.constant("h", h);
            out.reports.push(rep);
        }
        K::BoundedAsymptoteCheck => {
            let opts = lim_options(p)?;
            let n = p.usize("samples", 4).map_err(cfg_err)?;
            let t_max = p.positive("t_max", 10.0).map_err(cfg_err)?;
            let r_max = p.positive("r_max", 20.0).map_err(cfg_err)?;
            let b = growth::bounded_asymptote_check(model, n, t_max, r_max, &opts)?;
            let mut rep =
                VerificationReport::new("bounded_asymptote_check", Some(claims::BOUNDED_ASYMPTOTE));
            rep.constant("a_empirical", b.a_emp);
            rep.check_flag("reciprocal_bound", b.reciprocal_ok);
            rep.check_flag("volume_bound", b.volume_bound_ok);
            out.reports.push(rep);
        }
        K::RankDetectionFromGrowth => {
            let opts = lim_options(p)?;
            let r_list = p.f64_list("r_list", &[4.0, 8.0, 16.0, 32.0]).map_err(cfg_err)?;
            let n = p.usize("samples", 4).map_err(cfg_err)?;
            let r = growth::rank_detection_from_growth(model, &r_list, n, &opts)?;
            let mut rep =
                VerificationReport::new("rank_detection_from_growth", Some(claims::RANK_FROM_GROWTH));
            rep.constant("final_ratio", r.final_ratio);
            rep.note(format!("verdict: {:?}", r.verdict));
            let mut table = Table::new(&["r", "min_det"]);
            for (rr, d) in &r.rows {
                table.push(vec![*rr, *d]);
            }
            out.tables.insert("rank_detection".into(), table);
            out.reports.push(rep);
        }
        K::AnosovExponent => {
            let n = p.usize("samples", 4).map_err(cfg_err)?;
            let t_fit = p.positive("t_fit", 20.0).map_err(cfg_err)?;
            let f = hyperbolic::anosov_exponent(model, n, t_fit)?;
            let mut rep = VerificationReport::new("anosov_exponent", Some(claims::ANOSOV_GROWTH));
            rep.constant("alpha", f.alpha);
            rep.constant("c", f.c);
            rep.constant("c_envelope", f.c_envelope);
            rep.constant("threshold", hyperbolic::ANOSOV_THRESHOLD);
            rep.note(format!("verdict: {}", if f.anosov { "anosov" } else { "non-anosov" }));
            out.reports.push(rep);
        }
        K::DivergenceBounds => {
            let angle = p.positive("angle", std::f64::consts::FRAC_PI_2).map_err(cfg_err)?;
            let axis = p.usize("axis", 0).map_err(cfg_err)?;
            let t_max = p.positive("t_max", 20.0).map_err(cfg_err)?;
            let d = hyperbolic::divergence_bounds(model, angle, axis, t_max)?;
            let mut rep = VerificationReport::new("divergence_bounds", Some(claims::EXP_DIVERGENCE));
            rep.constant("alpha_low", d.alpha_low);
            rep.constant("alpha_up", d.alpha_up);
            rep.constant("liminf_estimate", d.liminf_estimate);
            rep.constant("c0_ratio", d.c0_ratio);
            rep.check("bracket_defect", d.bracket_defect, 1e-9);
            let mut table = Table::new(&["t", "lower", "upper", "log_lower_over_t", "log_upper_over_t"]);
            for i in 0..d.ts.len() {
                let t = d.ts[i];
                table.push(vec![t, d.lower[i], d.upper[i], d.lower[i].ln() / t, d.upper[i].ln() / t]);
            }
            out.tables.insert("divergence".into(), table);
            out.reports.push(rep);
        }
        K::ThinTriangleDelta => {
            let (surface, base, _) = surface_of(model)?;
            let sampling = TriangleSampling {
                n_triangles: p.usize("triangles", 30).map_err(cfg_err)?,
                n_probes: p.usize("probes", 20).map_err(cfg_err)?,
                ball_radius: p.positive("ball_radius", 3.0).map_err(cfg_err)?,
                seed: cfg.seed,
                side_samples: p.usize("side_samples", 64).map_err(cfg_err)?,
            };
            let t = hyperbolic::thin_triangle_delta(&surface, base, &sampling)?;
            let mut rep = VerificationReport::new("thin_triangle_delta", Some(claims::THIN_TRIANGLES));
            rep.constant("delta", t.delta);
            rep.constant("skipped", t.skipped as f64);
            out.reports.push(rep);
        }
    }
    Ok(())
}
