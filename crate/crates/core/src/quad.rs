//! Composite quadrature rules on uniform grids.

use crate::error::{Error, Result};

/// Composite Simpson rule over `[a, b]` with `n` subintervals (`n` rounded up
/// to even). `f` is sampled at the `n + 1` uniform nodes.
pub fn simpson(a: f64, b: f64, n: usize, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    let n = if n.is_multiple_of(2) { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Composite Simpson over pre-sampled uniform values (odd length required).
pub fn simpson_samples(h: f64, values: &[f64]) -> Result<f64> {
    if values.len() < 3 || values.len().is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "simpson_samples needs an odd number >= 3 of nodes, got {}",
            values.len()
        )));
    }
    let mut acc = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

/// Trapezoid rule over pre-sampled uniform values.
pub fn trapezoid_samples(h: f64, values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

/// Trapezoid rule for a periodic integrand sampled at `n` uniform nodes over
/// one period of length `period` (node `n` coincides with node `0`).
pub fn periodic_trapezoid(period: f64, values: &[f64]) -> f64 {
    let n = values.len();
    let h = period / n as f64;
    h * values.iter().sum::<f64>()
}

/// Cumulative integral of uniformly sampled values: `out[i] = ∫_{x_0}^{x_i}`.
///
/// Uses Simpson on even prefixes and a cubic-accurate half-panel correction on
/// odd ones, so the result is O(h^4) on smooth integrands.
pub fn cumulative_integral(h: f64, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    for i in 1..n {
        // one-panel increments from a cubic through four neighbouring nodes
        let inc = if i == 1 {
            if n >= 4 {
                h / 24.0 * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
            } else {
                0.5 * h * (values[0] + values[1])
            }
        } else if i + 1 < n {
            h / 24.0 * (-values[i - 2] + 13.0 * values[i - 1] + 13.0 * values[i] - values[i + 1])
        } else if i >= 3 {
            h / 24.0 * (values[i - 3] - 5.0 * values[i - 2] + 19.0 * values[i - 1] + 9.0 * values[i])
        } else {
            0.5 * h * (values[i - 1] + values[i])
        };
        out[i] = out[i - 1] + inc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_exponential() {
        let v = simpson(0.0, 2.0, 256, &mut |x: f64| x.exp());
        assert_relative_eq!(v, 2f64.exp() - 1.0, max_relative = 1e-10);
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let h = 0.01;
        let values: Vec<f64> = (0..=500).map(|i| (i as f64 * h).exp()).collect();
        let cum = cumulative_integral(h, &values);
        for (i, c) in cum.iter().enumerate().step_by(37) {
            let x = i as f64 * h;
            assert_relative_eq!(*c, x.exp() - 1.0, epsilon = 2e-9, max_relative = 2e-9);
        }
    }

    #[test]
    fn periodic_rule_is_spectrally_accurate() {
        let n = 32;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                1.0 / (2.0 + th.cos())
            })
            .collect();
        let v = periodic_trapezoid(2.0 * std::f64::consts::PI, &vals);
        let exact = 2.0 * std::f64::consts::PI / 3f64.sqrt();
        assert_relative_eq!(v, exact, max_relative = 1e-12);
    }
}
