//! Constants assembled exactly as in the underlying estimates, so the
//! numerical checks can compare empirical quantities against the proved
//! envelopes rather than ad-hoc fits.

/// `C1(R0, r_min, T)`: bound on boundary tensors over `[0, T]` for radii at
/// least `r_min > 1`, assembled as `exp(T sqrt(R0^2 + 1)) sqrt(1 + R0 coth^2(r_min sqrt(R0)))`.
pub fn c1_constant(r0: f64, r_min: f64, t_max: f64) -> f64 {
    assert!(r0 > 0.0 && r_min > 1.0 && t_max <= r_min);
    let s = r0.sqrt();
    let coth = (r_min * s).cosh() / (r_min * s).sinh();
    (t_max * (r0 * r0 + 1.0).sqrt()).exp() * (1.0 + r0 * coth * coth).sqrt()
}

/// `a1(R0)`: growth envelope constant, `sinh(sqrt(R0)(r+t))/sinh(sqrt(R0) r)
/// <= a1 e^{sqrt(R0) t}` for all `r > 1`.
pub fn a1_constant(r0: f64) -> f64 {
    assert!(r0 > 0.0);
    1.0 / (1.0 - (-2.0 * r0.sqrt()).exp())
}

/// `a2(R0, rho)`: decay envelope constant
/// `sqrt(C1(R0,1,1) / min(rho/e, e^{-rho}))`.
pub fn a2_constant(r0: f64, rho: f64) -> f64 {
    assert!(r0 > 0.0 && rho > 0.0);
    // C1 with r_min -> 1 taken as the limit from above
    let c1 = c1_constant(r0, 1.0 + 1e-12, 1.0);
    (c1 / (rho / std::f64::consts::E).min((-rho).exp())).sqrt()
}

/// The two-sided envelope `b(t)` for boundary tensors along stable families:
/// decay `a2 e^{-rho t / 2}` for `t >= 0`, growth `a1 e^{sqrt(R0) |t|}` for
/// `t < 0`.
pub fn b_envelope(r0: f64, rho: f64, t: f64) -> f64 {
    if t >= 0.0 {
        a2_constant(r0, rho) * (-0.5 * rho * t).exp()
    } else {
        a1_constant(r0) * (r0.sqrt() * t.abs()).exp()
    }
}

fn b_l1(r0: f64, rho: f64, r: f64) -> f64 {
    let a1 = a1_constant(r0);
    let a2 = a2_constant(r0, rho);
    let s = r0.sqrt();
    a1 * ((s * r).exp() - 1.0) / s + a2 * 2.0 / rho * (1.0 - (-0.5 * rho * r).exp())
}

fn b_sq_l1(r0: f64, rho: f64, r: f64) -> f64 {
    let a1 = a1_constant(r0);
    let a2 = a2_constant(r0, rho);
    let s = r0.sqrt();
    a1 * a1 * ((2.0 * s * r).exp() - 1.0) / (2.0 * s) + a2 * a2 / rho * (1.0 - (-rho * r).exp())
}

/// `C2(R0, rho, r)`: frame-transport bound
/// `sqrt(R0) + R0 * int_{-r}^{r} b(t) dt`.
pub fn c2_constant(r0: f64, rho: f64, r: f64) -> f64 {
    r0.sqrt() + r0 * b_l1(r0, rho, r)
}

/// `C4(R0, R0', rho, r) = C3 + R0 C2`, with
/// `C3 = R0' b + R0 C2 + 2 R0^{3/2} b` evaluated at the sup of `b` over
/// `(-r, r)`.
pub fn c4_constant(r0: f64, r0_prime: f64, rho: f64, r: f64) -> f64 {
    let b_sup = b_envelope(r0, rho, -r).max(b_envelope(r0, rho, 0.0));
    let c2 = c2_constant(r0, rho, r);
    let c3 = r0_prime * b_sup + r0 * c2 + 2.0 * r0.powf(1.5) * b_sup;
    c3 + r0 * c2
}

/// `C5(R0, R0', rho, r) = C4 * int_{-r}^{r} b(t)^2 dt`: the Lipschitz bound
/// for boundary second fundamental forms along stable curves.
pub fn c5_constant(r0: f64, r0_prime: f64, rho: f64, r: f64) -> f64 {
    c4_constant(r0, r0_prime, rho, r) * b_sq_l1(r0, rho, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_at_unit_curvature() {
        // C1(1, 1, 1) = e^{sqrt 2} sqrt(1 + coth^2 1)
        let coth1 = 1f64.cosh() / 1f64.sinh();
        assert_relative_eq!(
            c1_constant(1.0, 1.0 + 1e-12, 1.0),
            2f64.sqrt().exp() * (1.0 + coth1 * coth1).sqrt(),
            max_relative = 1e-9
        );
        assert_relative_eq!(a1_constant(1.0), 1.0 / (1.0 - (-2f64).exp()), max_relative = 1e-12);
        // rho = 2 for unit-curvature space forms
        let a2 = a2_constant(1.0, 2.0);
        assert!(a2 > 1.0 && a2 < 10.0, "a2 = {a2}");
        // envelopes dominate the closed forms they bound
        for &t in &[0.0f64, 0.5, 1.0, 3.0, 6.0] {
            // sinh(10 - t)/sinh(10) <= a2 e^{-t}
            let exact = (10.0 - t).sinh() / 10f64.sinh();
            assert!(exact <= b_envelope(1.0, 2.0, t) + 1e-12);
            // sinh(10 + t)/sinh(10) <= a1 e^{t}
            let grow = (10.0 + t).sinh() / 10f64.sinh();
            assert!(grow <= b_envelope(1.0, 2.0, -t) + 1e-12);
        }
        assert!(c5_constant(1.0, 0.5, 2.0, 4.0).is_finite());
    }
}
