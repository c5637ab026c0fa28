//! Independent cross-checks: one-dimensional transfer matrices, first Born
//! amplitudes and convergence tables.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{optical, PotentialSpec};

/// A 1D transfer matrix at wavenumber k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transfer1D {
    pub m: Matrix2<Complex64>,
    pub k: f64,
}

impl Transfer1D {
    pub fn det(&self) -> Complex64 {
        self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]
    }

    /// Reflection amplitude for left incidence, −M₂₁/M₂₂.
    pub fn reflection_left(&self) -> Complex64 {
        -self.m[(1, 0)] / self.m[(1, 1)]
    }

    /// Transmission amplitude, 1/M₂₂.
    pub fn transmission(&self) -> Complex64 {
        self.m[(1, 1)].inv()
    }
}

/// Integrates iΨ′ = H(x)Ψ with H = (v(x)/2k)[[1, e^{−2ikx}], [−e^{2ikx}, −1]]
/// from `support.0` to `support.1` by classical RK4.
pub fn transfer_1d<F>(v: F, support: (f64, f64), k: f64, steps: usize) -> Result<Transfer1D>
where
    F: Fn(f64) -> Complex64,
{
    if !(k > 0.0) {
        return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
    }
    let (a, b) = support;
    if !(a <= b) || steps == 0 {
        return Err(Error::invalid("transfer_1d needs a non-empty interval and steps ≥ 1"));
    }
    let i = Complex64::i();
    let h_at = |x: f64| {
        let c = v(x) / (2.0 * k);
        let ph = Complex64::from_polar(1.0, 2.0 * k * x);
        Matrix2::new(c, c * ph.conj(), -c * ph, -c)
    };
    let dx = (b - a) / steps as f64;
    // Step points are computed directly so the last one is exactly b.
    let at = |s: usize| {
        if s == steps {
            b
        } else {
            a + (b - a) * (s as f64 / steps as f64)
        }
    };
    let mut u = Matrix2::<Complex64>::identity();
    for s in 0..steps {
        let (x, x1) = (at(s), at(s + 1));
        let xm = 0.5 * (x + x1);
        let f = |x: f64, u: &Matrix2<Complex64>| -(h_at(x) * u) * i;
        let k1 = f(x, &u);
        let k2 = f(xm, &(u + k1 * Complex64::from(dx / 2.0)));
        let k3 = f(xm, &(u + k2 * Complex64::from(dx / 2.0)));
        let k4 = f(x1, &(u + k3 * Complex64::from(dx)));
        u += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(dx / 6.0);
    }
    if u.iter().any(|z| !z.is_finite()) {
        return Err(Error::Divergence("transfer_1d produced non-finite entries".into()));
    }
    Ok(Transfer1D { m: u, k })
}

/// [`transfer_1d`] over consecutive pieces `breaks[i]..breaks[i+1]` of a
/// piecewise-smooth profile, with `steps` shared in proportion to length.
/// Each piece samples v only inside its own interval (one-sided at the
/// ends), so jumps at the breaks do not spoil the fourth-order accuracy.
pub fn transfer_1d_piecewise<F>(v: F, breaks: &[f64], k: f64, steps: usize) -> Result<Transfer1D>
where
    F: Fn(f64) -> Complex64,
{
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("transfer_1d_piecewise needs at least two increasing breaks"));
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut m = Matrix2::<Complex64>::identity();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((steps as f64 * (b - a) / total).round() as usize).max(1);
        let (lo, hi) = (a.next_up(), b.next_down());
        let piece = transfer_1d(|x| v(x.clamp(lo, hi)), (a, b), k, n)?;
        m = piece.m * m;
    }
    Ok(Transfer1D { m, k })
}

/// First-order T± at one momentum p: smooth values and coefficients of 2πδ(p).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BornT {
    pub delta_plus: Complex64,
    pub smooth_plus: Complex64,
    pub delta_minus: Complex64,
    pub smooth_minus: Complex64,
}

impl std::ops::Add for BornT {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            delta_plus: self.delta_plus + o.delta_plus,
            smooth_plus: self.smooth_plus + o.smooth_plus,
            delta_minus: self.delta_minus + o.delta_minus,
            smooth_minus: self.smooth_minus + o.smooth_minus,
        }
    }
}

/// First Born approximation: T±(p) = −(i/2ω)·v̂(±ω − k, p) with
/// v̂(Q_x, Q_y) = ∫∫ e^{−i(Q_x x + Q_y y)} v(x, y) dx dy and ω = ω(p).
///
/// For a slab v̂ carries 2πδ(Q_y), so only δ coefficients appear:
/// T₊ = −(i/2k)∫ z̃ dx and T₋ = −(i/2k)∫ e^{2ikx} z̃ dx over the layer.
pub fn born1_t(pot: &PotentialSpec, k: f64, p: f64) -> Result<BornT> {
    if !(k > 0.0) || !(p.abs() < k) {
        return Err(Error::invalid(format!("born1_t needs k > 0 and |p| < k, got k = {k}, p = {p}")));
    }
    let omega = ((k - p) * (k + p)).sqrt();
    let i = Complex64::i();
    Ok(match pot {
        PotentialSpec::GaussianBump { amplitude, center, widths } => {
            let vhat = |qx: f64, qy: f64| {
                let mag = 2.0
                    * PI
                    * widths[0]
                    * widths[1]
                    * (-0.5 * (widths[0] * qx).powi(2) - 0.5 * (widths[1] * qy).powi(2)).exp();
                amplitude * Complex64::from_polar(mag, -(qx * center[0] + qy * center[1]))
            };
            BornT {
                smooth_plus: -i / (2.0 * omega) * vhat(omega - k, p),
                smooth_minus: -i / (2.0 * omega) * vhat(-omega - k, p),
                ..Default::default()
            }
        }
        PotentialSpec::Delta2d { strength } => {
            let t = -i * strength / (2.0 * omega);
            BornT { smooth_plus: t, smooth_minus: t, ..Default::default() }
        }
        PotentialSpec::Slab { epsilon, thickness, start } => {
            let zt = optical(*epsilon, k);
            let (a, b) = (*start, start + thickness);
            // ∫_a^b e^{2ikx} dx
            let osc = ((2.0 * i * k * b).exp() - (2.0 * i * k * a).exp()) / (2.0 * i * k);
            BornT {
                delta_plus: -i / (2.0 * k) * zt * (b - a),
                delta_minus: -i / (2.0 * k) * zt * osc,
                ..Default::default()
            }
        }
        PotentialSpec::Sum { members } => {
            let mut acc = BornT::default();
            for m in members {
                acc = acc + born1_t(&m.potential, k, p)?;
            }
            acc
        }
        _ => return Err(Error::invalid("born1_t supports Gaussian bumps, slabs, 2D deltas and sums of them")),
    })
}

/// Values of a sequence at increasing sizes with successive differences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub sizes: Vec<usize>,
    pub values: Vec<Complex64>,
    /// |v_{i+1} − v_i|.
    pub deltas: Vec<f64>,
    /// Order estimated from the last two deltas; `None` when undefined
    /// (fewer than three sizes or a vanishing delta).
    pub order: Option<f64>,
}

pub fn convergence_report<F>(f: F, sizes: &[usize]) -> Result<ConvergenceReport>
where
    F: Fn(usize) -> Complex64,
{
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("convergence sizes must increase"));
    }
    let values: Vec<Complex64> = sizes.iter().map(|&n| f(n)).collect();
    let deltas: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let order = if deltas.len() >= 2 {
        let m = deltas.len();
        let (d0, d1) = (deltas[m - 2], deltas[m - 1]);
        if d0 > 0.0 && d1 > 0.0 {
            let ratio = sizes[m] as f64 / sizes[m - 1] as f64;
            Some((d0 / d1).ln() / ratio.ln())
        } else {
            None
        }
    } else {
        None
    };
    Ok(ConvergenceReport { sizes: sizes.to_vec(), values, deltas, order })
}

impl ConvergenceReport {
    /// Plain-text table: size, value, delta to the previous row.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>8}  {:>24}  {:>24}  {:>12}\n", "size", "re", "im", "delta");
        for (i, (n, v)) in self.sizes.iter().zip(&self.values).enumerate() {
            let d = if i == 0 { "-".to_string() } else { format!("{:.3e}", self.deltas[i - 1]) };
            out.push_str(&format!("{n:>8}  {:>24.16e}  {:>24.16e}  {d:>12}\n", v.re, v.im));
        }
        match self.order {
            Some(p) => out.push_str(&format!("order ≈ {p:.3}\n")),
            None => out.push_str("order undefined\n"),
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "sizes": self.sizes,
            "values": self.values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
            "deltas": self.deltas,
            "order": self.order,
        })
        .to_string()
    }
}
