//! Exactly solvable systems: the 2D delta potential, a homogeneous slab,
//! a slab with a line defect on its left face, the oblique-incidence
//! threshold gain of a slab laser and spectral singularities.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{k_matrix, Mat2, I, ONE, ZERO};
use crate::operator::{Multiplier, TransferOperator};
use crate::quadrature::gauss_legendre;
use crate::spectral::{ChannelGrid, MomentumGrid};

/// Default number of Gauss–Legendre points for the Y integral.
pub const DEFAULT_QUAD_POINTS: usize = 200;

/// A homogeneous layer of relative permittivity ε on `start ≤ x ≤ start + L`
/// probed at wavenumber k. Its potential is z̃ = k²(1 − ε).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabParams {
    pub epsilon: Complex64,
    pub thickness: f64,
    pub k: f64,
    #[serde(default)]
    pub start: f64,
}

impl SlabParams {
    pub fn new(epsilon: Complex64, thickness: f64, k: f64) -> Result<Self> {
        Self::with_start(epsilon, thickness, k, 0.0)
    }

    pub fn with_start(epsilon: Complex64, thickness: f64, k: f64, start: f64) -> Result<Self> {
        if !(thickness > 0.0 && thickness.is_finite()) {
            return Err(Error::invalid(format!("slab thickness must be positive, got {thickness}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if !(epsilon.re.is_finite() && epsilon.im.is_finite() && start.is_finite()) {
            return Err(Error::invalid("slab parameters must be finite"));
        }
        Ok(Self { epsilon, thickness, k, start })
    }

    /// Slab with refractive index η + iκ.
    pub fn from_index(eta: f64, kappa: f64, thickness: f64, k: f64) -> Result<Self> {
        let n = Complex64::new(eta, kappa);
        Self::new(n * n, thickness, k)
    }

    pub fn z_tilde(&self) -> Complex64 {
        (ONE - self.epsilon) * (self.k * self.k)
    }

    /// n(ω) = √(1 − z̃/ω²), principal branch. n(k) = √ε.
    pub fn refr(&self, omega: f64) -> Complex64 {
        refr_complex(self.z_tilde(), Complex64::new(omega, 0.0))
    }

    /// (n₊, n₋) = ((n + 1/n)/2, (n − 1/n)/2).
    pub fn n_pm(&self, omega: f64) -> (Complex64, Complex64) {
        let n = self.refr(omega);
        ((n + n.inv()) * 0.5, (n - n.inv()) * 0.5)
    }

    pub fn eta(&self) -> f64 {
        self.epsilon.sqrt().re
    }

    pub fn kappa(&self) -> f64 {
        self.epsilon.sqrt().im
    }

    /// Gain coefficient g = −2kκ.
    pub fn gain(&self) -> f64 {
        -2.0 * self.k * self.kappa()
    }

    /// The same slab moved to start at the origin.
    pub fn at_origin(&self) -> Self {
        Self { start: 0.0, ..*self }
    }

    /// Transfer matrix M̃(ω) of the layer.
    pub fn matrix(&self, omega: f64) -> Mat2 {
        slab_matrix_complex(self.z_tilde(), self.thickness, self.start, Complex64::new(omega, 0.0))
    }

    /// Ends of the layer.
    pub fn interval(&self) -> (f64, f64) {
        (self.start, self.start + self.thickness)
    }
}

fn refr_complex(z_tilde: Complex64, omega: Complex64) -> Complex64 {
    (ONE - z_tilde / (omega * omega)).sqrt()
}

fn slab_matrix_complex(z_tilde: Complex64, l: f64, start: f64, omega: Complex64) -> Mat2 {
    let n = refr_complex(z_tilde, omega);
    let (np, nm) = ((n + n.inv()) * 0.5, (n - n.inv()) * 0.5);
    let a = n * omega * l;
    let (c, s) = (a.cos(), a.sin());
    let em = (-I * omega * l).exp();
    let ep = (I * omega * l).exp();
    let m11 = (c + I * np * s) * em;
    let m22 = (c - I * np * s) * ep;
    let mut m12 = I * nm * s * em;
    let mut m21 = -I * nm * s * ep;
    if start != 0.0 {
        let ph = (I * omega * (2.0 * start)).exp();
        m12 /= ph;
        m21 *= ph;
    }
    Mat2::new(m11, m12, m21, m22)
}

/// The purely multiplicative transfer operator of a slab.
pub fn slab_operator<G: ChannelGrid>(sp: &SlabParams, grid: &G) -> TransferOperator<G> {
    TransferOperator::multiplicative(grid, Multiplier::Slab(*sp))
}

/// Line-defect coupling; from a wire with ε = 1 + iζδ(x)δ(y) it is 𝔷 = −iζk².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectParams {
    pub coupling: Complex64,
    pub zeta: Option<f64>,
}

impl DefectParams {
    pub fn from_coupling(coupling: Complex64) -> Self {
        Self { coupling, zeta: None }
    }

    pub fn from_zeta(zeta: f64, k: f64) -> Self {
        Self { coupling: wire_coupling(zeta, k), zeta: Some(zeta) }
    }
}

/// 𝔷 = −iζk².
pub fn wire_coupling(zeta: f64, k: f64) -> Complex64 {
    Complex64::new(0.0, -zeta * k * k)
}

/// M = I − (i𝔷/2ω) 𝒦 ⟨·⟩ where ⟨·⟩ is the grid's averaging functional.
/// Valid on any channel grid; in 3D this is the point interaction.
pub fn delta_operator<G: ChannelGrid>(z: Complex64, grid: &G) -> TransferOperator<G> {
    if z == ZERO {
        return TransferOperator::identity(grid);
    }
    let n = grid.len();
    let kk = k_matrix();
    let avg = grid.averaging_weights();
    let col: Vec<Complex64> = grid.omegas().iter().map(|w| -I * z / (2.0 * w)).collect();
    let kernel = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (a, j) = (r / n, r % n);
        let (b, l) = (c / n, c % n);
        col[j] * kk[(a, b)] * avg[l]
    });
    let kz = DMatrix::from_fn(2 * n, 2, |r, b| col[r % n] * kk[(r / n, b)]);
    TransferOperator::new(grid, Multiplier::Identity, Some(kernel), Some(kz)).expect("shapes are consistent")
}

/// Transfer operator of 𝔷δ(x)δ(y).
pub fn delta2d_operator(z: Complex64, grid: &MomentumGrid) -> TransferOperator<MomentumGrid> {
    delta_operator(z, grid)
}

/// The θ-independent amplitude −√(2/π)𝔷/(4 + i𝔷) of 𝔷δ(x)δ(y).
pub fn delta2d_f(z: Complex64) -> Result<Complex64> {
    let den = Complex64::new(4.0, 0.0) + I * z;
    if den.norm() <= 1e-14 * z.norm().max(4.0) {
        return Err(Error::SpectralSingularity(format!("delta2d amplitude diverges at coupling {z}")));
    }
    Ok(-(2.0 / PI).sqrt() * z / den)
}

/// First Born approximation −𝔷/(2√(2π)).
pub fn born2d_f(z: Complex64) -> Complex64 {
    -z / (2.0 * (2.0 * PI).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireMode {
    Lasing,
    Cpa,
}

/// Wavenumber of the wire's spectral singularity: k = 2/√(−ζ) for lasing
/// (ζ < 0, where 𝔷 = 4i) and k = 2/√ζ for coherent perfect absorption
/// (ζ > 0, where 𝔷 = −4i, the time reverse of the lasing coupling).
pub fn wire_modes(zeta: f64, mode: WireMode) -> Result<f64> {
    match mode {
        WireMode::Lasing if zeta < 0.0 => Ok(2.0 / (-zeta).sqrt()),
        WireMode::Cpa if zeta > 0.0 => Ok(2.0 / zeta.sqrt()),
        WireMode::Lasing => Err(Error::invalid(format!("lasing needs a gain wire (ζ < 0), got ζ = {zeta}"))),
        WireMode::Cpa => Err(Error::invalid(format!("CPA needs a lossy wire (ζ > 0), got ζ = {zeta}"))),
    }
}

/// Z(ω) = e^{−2inLω} − ((n−1)/(n+1))² for complex ω.
fn z_of(n: Complex64, l: f64, omega: Complex64) -> Complex64 {
    let r = (n - ONE) / (n + ONE);
    (-2.0 * I * n * l * omega).exp() - r * r
}

/// X(ω) from its closed form 2(e^{−2inLω} + (n−1)/(n+1)) / ((n+1)Z(ω)).
pub fn slab_x_closed(sp: &SlabParams, omega: f64) -> Complex64 {
    let n = sp.refr(omega);
    let w = Complex64::new(omega, 0.0);
    let e = (-2.0 * I * n * sp.thickness * w).exp();
    2.0 * (e + (n - ONE) / (n + ONE)) / ((n + ONE) * z_of(n, sp.thickness, w))
}

/// Z(ω) of the slab placed at the origin.
pub fn slab_z(sp: &SlabParams, omega: f64) -> Complex64 {
    z_of(sp.refr(omega), sp.thickness, Complex64::new(omega, 0.0))
}

/// (X(ω), Z(ω)) with X = 1 − M̃₂₁/M̃₂₂ for the slab placed at the origin.
pub fn slab_xyz(sp: &SlabParams, omega: f64) -> Result<(Complex64, Complex64)> {
    let z = slab_z(sp, omega);
    let m = sp.at_origin().matrix(omega);
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if z.norm() < 1e-14 || m[(1, 1)].norm() < 1e-14 * scale {
        return Err(Error::SpectralSingularity(format!("M22 vanishes at omega = {omega}")));
    }
    let x = ONE - m[(1, 0)] / m[(1, 1)];
    let closed = slab_x_closed(sp, omega);
    let mismatch = (x - closed).norm();
    if mismatch > 1e-10 * x.norm().max(1.0) {
        log::warn!("X(ω) identity mismatch {mismatch:e} at ω = {omega}");
    }
    Ok((x, z))
}

/// J = (1/π)∫₀^{π/2} X(k sin u) du, so that Y(k) = 2 + i𝔷J.
fn slab_j(sp: &SlabParams, quad_points: usize) -> Result<Complex64> {
    let (us, ws) = gauss_legendre(quad_points, 0.0, PI / 2.0)?;
    let mut acc = ZERO;
    let mut worst = (f64::INFINITY, 0.0);
    for (u, w) in us.iter().zip(&ws) {
        let omega = sp.k * u.sin();
        let z = slab_z(sp, omega);
        if z.norm() < worst.0 {
            worst = (z.norm(), omega);
        }
        let m = sp.at_origin().matrix(omega);
        acc += (ONE - m[(1, 0)] / m[(1, 1)]) * *w;
    }
    if worst.0 < 1e-8 || !acc.is_finite() {
        let omega = refine_pole(sp, worst.1).unwrap_or(Complex64::new(worst.1, 0.0));
        return Err(Error::NearResonance { omega });
    }
    Ok(acc / PI)
}

fn refine_pole(sp: &SlabParams, omega: f64) -> Option<Complex64> {
    let z_tilde = sp.z_tilde();
    let f = |w: Complex64| z_of(refr_complex(z_tilde, w), sp.thickness, w);
    secant(f, Complex64::new(omega, 0.0), 50).ok().map(|(r, _, _)| r)
}

/// Y(k) = 2 + (i𝔷/π)∫₀^{π/2} X(k sin u) du by Gauss–Legendre.
pub fn slab_y(sp: &SlabParams, z: Complex64, quad_points: usize) -> Result<Complex64> {
    if z == ZERO {
        return Ok(Complex64::new(2.0, 0.0));
    }
    Ok(Complex64::new(2.0, 0.0) + I * z * slab_j(sp, quad_points)?)
}

/// T± of the slab with a line defect 𝔷δ(x)δ(y) on its left face, at one p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabDefectT {
    pub delta_minus: Complex64,
    pub smooth_minus: Complex64,
    pub delta_plus: Complex64,
    pub smooth_plus: Complex64,
}

/// The p-independent ingredients of the slab-with-defect solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabDefect {
    pub slab: SlabParams,
    pub coupling: Complex64,
    pub x_k: Complex64,
    pub y_k: Complex64,
    pub m22_k: Complex64,
    /// B̃₋ + 1, computed as X(k)(1 − i𝔷J/Y) with J on a doubled quadrature.
    pub b_tilde_plus_one: Complex64,
    /// |B̃₋ + 1 − 2X(k)/Y(k)| / |2X(k)/Y(k)|.
    pub identity_residual: f64,
}

impl SlabDefect {
    pub fn new(sp: &SlabParams, z: Complex64, quad_points: usize) -> Result<Self> {
        let sp = sp.at_origin();
        let (x_k, _) = slab_xyz(&sp, sp.k)?;
        let y_k = slab_y(&sp, z, quad_points)?;
        if y_k.norm() < 1e-12 {
            return Err(Error::SpectralSingularity(format!("Y(k) vanishes for coupling {z}")));
        }
        let m22_k = sp.matrix(sp.k)[(1, 1)];
        let j2 = if z == ZERO { ZERO } else { slab_j(&sp, 2 * quad_points)? };
        let b1 = x_k * (ONE - I * z * j2 / y_k);
        let target = 2.0 * x_k / y_k;
        let identity_residual = (b1 - target).norm() / target.norm().max(f64::MIN_POSITIVE);
        Ok(Self { slab: sp, coupling: z, x_k, y_k, m22_k, b_tilde_plus_one: b1, identity_residual })
    }

    pub fn t_at(&self, p: f64) -> Result<SlabDefectT> {
        let k = self.slab.k;
        if !(p.abs() < k) {
            return Err(Error::invalid(format!("|p| = {} must be below k = {k}", p.abs())));
        }
        let omega = ((k - p) * (k + p)).sqrt();
        let (x_w, _) = slab_xyz(&self.slab, omega)?;
        let m22 = self.slab.matrix(omega)[(1, 1)];
        let z = self.coupling;
        Ok(SlabDefectT {
            delta_minus: self.x_k - ONE,
            smooth_minus: -I * z * self.x_k * x_w / (self.y_k * omega),
            delta_plus: self.m22_k.inv() - ONE,
            smooth_plus: -I * z * self.x_k / (self.y_k * m22 * omega),
        })
    }
}

pub fn slab_defect_t(sp: &SlabParams, z: Complex64, p: f64, quad_points: usize) -> Result<SlabDefectT> {
    SlabDefect::new(sp, z, quad_points)?.t_at(p)
}

/// sin and cos of an angle in degrees, exact at multiples of 90° and with
/// bitwise mirror symmetry about every multiple of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    let q = ((r / 90.0).floor() as i64).rem_euclid(4);
    let a = (r - 90.0 * q as f64).clamp(0.0, 90.0);
    let (sa, ca) = if a == 45.0 {
        (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
    } else if a < 45.0 {
        a.to_radians().sin_cos()
    } else {
        let (c, s) = (90.0 - a).to_radians().sin_cos();
        (s, c)
    };
    match q {
        0 => (sa, ca),
        1 => (ca, -sa),
        2 => (-sa, -ca),
        _ => (-ca, sa),
    }
}

fn gain_from(eta: f64, s: f64, c: f64, l: f64) -> Result<f64> {
    if !(eta > 1.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("threshold gain needs η > 1, got {eta}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::invalid(format!("slab thickness must be positive, got {l}")));
    }
    let root = (eta * eta - s * s).sqrt();
    let g = 4.0 * root / (eta * l) * ((root + c.abs()) / (eta * eta - 1.0).sqrt()).ln();
    Ok(g.max(0.0))
}

/// Threshold gain of a slab laser at incidence angle θ (radians), valid
/// for |κ| ≪ η − 1.
pub fn threshold_gain(eta: f64, theta: f64, l: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    gain_from(eta, s, c, l)
}

/// [`threshold_gain`] with θ in degrees; exactly zero at ±90°.
pub fn threshold_gain_deg(eta: f64, theta_deg: f64, l: f64) -> Result<f64> {
    let (s, c) = sin_cos_deg(theta_deg);
    gain_from(eta, s, c, l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unknown {
    /// ω at fixed k (oblique incidence).
    Omega,
    /// k at normal incidence (ω = k).
    K,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub root: Complex64,
    /// |Z(root)|.
    pub residual: f64,
    /// |M̃₂₂(root)|.
    pub m22_abs: f64,
    pub iterations: usize,
}

pub const SECANT_MAX_ITERATIONS: usize = 200;

/// Complex root of Z by the secant method from `guess`.
pub fn spectral_singularity(sp: &SlabParams, unknown: Unknown, guess: Complex64) -> Result<SingularityReport> {
    if !guess.is_finite() {
        return Err(Error::invalid("root guess must be finite"));
    }
    let l = sp.thickness;
    let (root, residual, iterations) = match unknown {
        Unknown::Omega => {
            let zt = sp.z_tilde();
            secant(|w| z_of(refr_complex(zt, w), l, w), guess, SECANT_MAX_ITERATIONS)?
        }
        Unknown::K => {
            let n = sp.epsilon.sqrt();
            secant(|k| z_of(n, l, k), guess, SECANT_MAX_ITERATIONS)?
        }
    };
    let m22 = match unknown {
        Unknown::Omega => slab_matrix_complex(sp.z_tilde(), l, 0.0, root)[(1, 1)],
        Unknown::K => slab_matrix_complex((ONE - sp.epsilon) * root * root, l, 0.0, root)[(1, 1)],
    };
    Ok(SingularityReport { root, residual, m22_abs: m22.norm(), iterations })
}

fn secant<F: Fn(Complex64) -> Complex64>(f: F, guess: Complex64, max_iter: usize) -> Result<(Complex64, f64, usize)> {
    let mut x0 = guess;
    let mut x1 = guess * (1.0 + 1e-6) + Complex64::new(1e-6, 1e-7);
    let (mut f0, mut f1) = (f(x0), f(x1));
    for it in 1..=max_iter {
        let den = f1 - f0;
        if den == ZERO || !den.is_finite() {
            return Err(Error::NoRoot { iterations: it, residual: f1.norm() });
        }
        let x2 = x1 - f1 * (x1 - x0) / den;
        if !x2.is_finite() {
            return Err(Error::NoRoot { iterations: it, residual: f1.norm() });
        }
        let step = (x2 - x1).norm();
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(x1);
        if f1.norm() < 1e-10 && step <= 1e-9 * x1.norm().max(1.0) {
            return Ok((x1, f1.norm(), it));
        }
    }
    Err(Error::NoRoot { iterations: max_iter, residual: f1.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::det2;
    use crate::spectral::build_grid;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn empty_slab_is_identity() {
        let sp = SlabParams::new(ONE, 1.3, 2.0).unwrap();
        for w in [0.1, 1.0, 2.0] {
            let m = sp.matrix(w);
            assert!((m - Mat2::identity()).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn slab_matrix_is_unimodular_and_even_in_branch() {
        let sp = SlabParams::new(c(2.0, 0.1), 1.0, 2.0).unwrap();
        for w in [0.05, 0.7, 1.3, 2.0] {
            assert!((det2(&sp.matrix(w)) - ONE).norm() < 1e-12);
            let (np, nm) = sp.n_pm(w);
            assert!((np * np - nm * nm - ONE).norm() < 1e-12);
        }
        assert!((sp.refr(2.0) - sp.epsilon.sqrt()).norm() < 1e-15);
        // flipping the sign of n leaves the matrix unchanged
        let zt = sp.z_tilde();
        let w = c(1.1, 0.0);
        let n = -refr_complex(zt, w);
        let (np, nm) = ((n + n.inv()) * 0.5, (n - n.inv()) * 0.5);
        let a = n * w;
        let m11 = (a.cos() + I * np * a.sin()) * (-I * w).exp();
        let m12 = I * nm * a.sin() * (-I * w).exp();
        let m = sp.matrix(1.1);
        assert!((m11 - m[(0, 0)]).norm() < 1e-14 && (m12 - m[(0, 1)]).norm() < 1e-14);
    }

    #[test]
    fn delta_operator_zero_coupling_is_identity() {
        assert!(delta2d_operator(ZERO, &build_grid(1.0, 4).unwrap()).is_identity());
    }

    #[test]
    fn delta_amplitude_values() {
        assert_eq!(delta2d_f(ZERO).unwrap(), ZERO);
        let expect = -(2.0 / PI).sqrt() * c(4.0, -1.0) / 17.0;
        assert!((delta2d_f(ONE).unwrap() - expect).norm() < 1e-15);
        assert!(matches!(delta2d_f(c(0.0, 4.0)), Err(Error::SpectralSingularity(_))));
        assert!((born2d_f(ONE) + 1.0 / (2.0 * (2.0 * PI).sqrt())).norm() < 1e-16);
    }

    #[test]
    fn wire_mode_values() {
        assert_eq!(wire_modes(-1.0, WireMode::Lasing).unwrap(), 2.0);
        assert_eq!(wire_modes(4.0, WireMode::Cpa).unwrap(), 1.0);
        assert!(wire_modes(1.0, WireMode::Lasing).is_err());
        assert!(wire_modes(-1.0, WireMode::Cpa).is_err());
        assert_eq!(DefectParams::from_zeta(-1.0, 2.0).coupling, c(0.0, 4.0));
    }

    #[test]
    fn x_identity_and_empty_slab() {
        let sp = SlabParams::new(c(2.0, 0.1), 1.0, 2.0).unwrap();
        let (x, _) = slab_xyz(&sp, 1.3).unwrap();
        assert!((x - slab_x_closed(&sp, 1.3)).norm() < 1e-10);
        let empty = SlabParams::new(ONE, 1.0, 2.0).unwrap();
        let (x, z) = slab_xyz(&empty, 0.7).unwrap();
        assert!((x - ONE).norm() < 1e-15);
        assert!((z - (-2.0 * I * 0.7).exp()).norm() < 1e-15);
    }

    #[test]
    fn y_limits() {
        let sp = SlabParams::new(c(2.0, 0.01), 1.0, 2.0).unwrap();
        assert_eq!(slab_y(&sp, ZERO, 200).unwrap(), c(2.0, 0.0));
        let empty = SlabParams::new(ONE, 1.0, 2.0).unwrap();
        let z = c(0.7, -0.2);
        assert!((slab_y(&empty, z, 50).unwrap() - (2.0 + I * z / 2.0)).norm() < 1e-14);
        let d = slab_y(&sp, ONE, 200).unwrap() - slab_y(&sp, ONE, 400).unwrap();
        assert!(d.norm() < 1e-10, "{d}");
    }

    #[test]
    fn defect_reduces_to_delta_without_slab() {
        let empty = SlabParams::new(ONE, 1.0, 2.0).unwrap();
        let z = c(1.0, 0.3);
        let t = slab_defect_t(&empty, z, 0.4, 64).unwrap();
        let w = (4.0f64 - 0.16).sqrt();
        let expect = -2.0 * I * z / ((4.0 + I * z) * w);
        assert!((t.smooth_minus - expect).norm() < 1e-13);
        assert!((t.smooth_plus - expect).norm() < 1e-13);
        assert!(t.delta_minus.norm() < 1e-15 && t.delta_plus.norm() < 1e-15);
    }

    #[test]
    fn defect_identity_holds() {
        let sp = SlabParams::new(c(2.0, 0.01), 1.0, 2.0).unwrap();
        let d = SlabDefect::new(&sp, ONE, 200).unwrap();
        assert!(d.identity_residual < 1e-10, "{}", d.identity_residual);
    }

    #[test]
    fn gain_special_angles() {
        for eta in [1.2, 1.5, 3.0] {
            assert_eq!(threshold_gain_deg(eta, 90.0, 1.0).unwrap(), 0.0);
            assert_eq!(threshold_gain_deg(eta, -90.0, 1.0).unwrap(), 0.0);
            let g0 = threshold_gain_deg(eta, 0.0, 2.0).unwrap();
            let expect = 2.0 * ((eta + 1.0) / (eta * eta - 1.0).sqrt()).ln();
            assert!((g0 - expect).abs() < 1e-12);
            for th in [10.0, 33.0, 71.0, 89.0] {
                let g = threshold_gain_deg(eta, th, 1.0).unwrap();
                assert_eq!(g, threshold_gain_deg(eta, 180.0 - th, 1.0).unwrap());
                assert_eq!(g, threshold_gain_deg(eta, -th, 1.0).unwrap());
            }
        }
        assert!(threshold_gain(1.0, 0.0, 1.0).is_err());
        assert!(threshold_gain(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn sin_cos_deg_matches_libm() {
        for d in [-725.0, -30.0, 0.0, 17.5, 45.0, 89.9, 135.0, 200.0, 359.0] {
            let (s, c) = sin_cos_deg(d);
            let (s2, c2) = f64::to_radians(d).sin_cos();
            assert!((s - s2).abs() < 1e-14 && (c - c2).abs() < 1e-14, "{d}");
        }
    }

    #[test]
    fn no_root_without_slab() {
        let sp = SlabParams::new(ONE, 1.0, 2.0).unwrap();
        for u in [Unknown::Omega, Unknown::K] {
            assert!(matches!(spectral_singularity(&sp, u, c(2.0, 0.0)), Err(Error::NoRoot { .. })));
        }
    }
}
