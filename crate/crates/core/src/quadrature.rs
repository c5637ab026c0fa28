//! Gauss–Legendre rules and barycentric interpolation.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights mapped to `[a, b]`, nodes ascending.
///
/// The rule is symmetrized about the interval midpoint so mirrored nodes are
/// bit-exact reflections of each other.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussLegendre::new(n).map_err(|e| Error::invalid(format!("Gauss-Legendre rule: {e}")))?;
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // force exact antisymmetry of the reference nodes on [-1, 1]
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = pairs.iter().map(|(x, _)| mid + half * x).collect();
    let weights = pairs.iter().map(|(_, w)| half * w).collect();
    Ok((nodes, weights))
}

/// Barycentric weights for arbitrary distinct nodes, scaled so the largest is 1.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut log_mag = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for j in 0..n {
        for l in 0..n {
            if l != j {
                let d = nodes[j] - nodes[l];
                log_mag[j] -= d.abs().ln();
                if d < 0.0 {
                    sign[j] = -sign[j];
                }
            }
        }
    }
    let max = log_mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..n).map(|j| sign[j] * (log_mag[j] - max).exp()).collect()
}

/// Second-form barycentric interpolation.
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let t = wj / d;
        num += fj * t;
        den += t;
    }
    num / den
}

/// Trigonometric interpolation on `m` equispaced angles `φ_j = φ_0 + 2πj/m`.
pub fn trig_interp(phi0: f64, values: &[Complex64], phi: f64) -> Complex64 {
    let m = values.len();
    if m == 1 {
        return values[0];
    }
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, &fj) in values.iter().enumerate() {
        let half = 0.5 * (phi - (phi0 + h * j as f64));
        let s = half.sin();
        if s.abs() < 1e-15 {
            return fj;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let kernel = if m % 2 == 1 { 1.0 / s } else { half.cos() / s };
        num += fj * (sign * kernel);
        den += sign * kernel;
    }
    num / den
}
