//! The three-dimensional formulation: channels are transverse momenta p⃗ in
//! the disc |p⃗| < k, z is the scattering axis and the incident wave is
//! 4π²δ(p_x)δ(p_y).
//!
//! The disc grid is polar. Its radial rule is Gauss–Legendre in ω = √(k² − |p⃗|²)
//! on (0, k): since d²p = ω dω dφ, integrands carrying a 1/ω factor become
//! polynomials in ω and the disc integral of 1/ω is exact for any radial order.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_forms::delta_operator;
use crate::error::{Error, Result};
use crate::evolution::{checked, evolve_coupling, AccuracyWarning, Coupling, EvolutionConfig, HamiltonianBlock, Term};
use crate::linalg::{I, ONE, ZERO};
use crate::operator::{solve_outgoing, Outgoing, TransferOperator, GRAZING_COS};
use crate::potential::{gaussian_ft, gaussian_profile, optical, PotentialSpec};
use crate::quadrature::{barycentric_eval, barycentric_weights, gauss_legendre};
use crate::spectral::{ChannelGrid, SpectralAmplitude};

/// Largest channel count accepted for dense 3D Hamiltonians and evolution.
pub const MAX_DENSE_CHANNELS_3D: usize = 64;

/// Samples on a [`DiscGrid`]; the δ coefficient multiplies 4π²δ(p_x)δ(p_y).
pub type SpectralAmplitude3D = SpectralAmplitude;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscGrid {
    k: f64,
    radial_omegas: Vec<f64>,
    radial_weights: Vec<f64>,
    radial_bary: Vec<f64>,
    phis: Vec<f64>,
    nodes: Vec<[f64; 2]>,
    omegas: Vec<f64>,
    weights: Vec<f64>,
    averaging: Vec<f64>,
}

impl DiscGrid {
    /// `radial` rings times `azimuthal` equally spaced angles φ_m = 2πm/M.
    /// Node index is `ring * azimuthal + m`.
    pub fn new(k: f64, radial: usize, azimuthal: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if radial < 2 || azimuthal < 1 {
            return Err(Error::invalid(format!("disc grid needs ≥2 rings and ≥1 angle, got {radial}×{azimuthal}")));
        }
        let (radial_omegas, radial_weights) = gauss_legendre(radial, 0.0, k)?;
        let radial_bary = barycentric_weights(&radial_omegas);
        let phis: Vec<f64> = (0..azimuthal).map(|m| 2.0 * PI * m as f64 / azimuthal as f64).collect();
        let dphi = 2.0 * PI / azimuthal as f64;
        let mut nodes = Vec::with_capacity(radial * azimuthal);
        let mut omegas = Vec::with_capacity(radial * azimuthal);
        let mut weights = Vec::with_capacity(radial * azimuthal);
        for (w, wr) in radial_omegas.iter().zip(&radial_weights) {
            let rho = ((k - w) * (k + w)).sqrt();
            for phi in &phis {
                let (s, c) = phi.sin_cos();
                nodes.push([rho * c, rho * s]);
                omegas.push(*w);
                weights.push(wr * w * dphi);
            }
        }
        let averaging = weights.iter().map(|w| w / (4.0 * PI * PI)).collect();
        Ok(Self { k, radial_omegas, radial_weights, radial_bary, phis, nodes, omegas, weights, averaging })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn radial_len(&self) -> usize {
        self.radial_omegas.len()
    }

    pub fn azimuthal_len(&self) -> usize {
        self.phis.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Weights of the plain measure: Σ W_i f(p⃗_i) ≈ ∫_disc d²p f.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_disc d²p f by the product rule.
    pub fn disc_integral(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.nodes.len() {
            return Err(Error::invalid(format!("expected {} samples, got {}", self.nodes.len(), samples.len())));
        }
        Ok(samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum())
    }

    /// Interpolates node samples at p⃗ (|p⃗| ≤ k).
    ///
    /// Each ring is expanded in azimuthal harmonics c_m e^{imφ}. For a smooth
    /// function c_m(ρ) = ρ^{|m|}·(smooth in ρ²), and ρ² = k² − ω² is a
    /// polynomial in ω, so c_m/ρ^{|m|} is interpolated barycentrically in ω.
    pub fn interpolate(&self, values: &[Complex64], p: [f64; 2]) -> Complex64 {
        let m = self.phis.len();
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt().min(self.k);
        let omega = ((self.k - rho) * (self.k + rho)).max(0.0).sqrt();
        let phi = p[1].atan2(p[0]);
        let nyquist = m.is_multiple_of(2).then_some(m / 2);
        let lo = -(((m - 1) / 2) as i64);
        let hi = (m / 2) as i64;
        let mut total = ZERO;
        for h in lo..=hi {
            let order = h.unsigned_abs() as i32;
            let scaled: Vec<Complex64> = values
                .chunks(m)
                .zip(&self.radial_omegas)
                .map(|(ring, w)| {
                    let rho_r = ((self.k - w) * (self.k + w)).sqrt();
                    let c: Complex64 = ring
                        .iter()
                        .zip(&self.phis)
                        .map(|(v, ph)| v * Complex64::from_polar(1.0, -(h as f64) * ph))
                        .sum::<Complex64>()
                        / m as f64;
                    c / rho_r.powi(order)
                })
                .collect();
            let radial = barycentric_eval(&self.radial_omegas, &self.radial_bary, &scaled, omega) * rho.powi(order);
            let angular = if Some(h as usize) == nyquist && h > 0 {
                Complex64::new((h as f64 * phi).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, h as f64 * phi)
            };
            total += radial * angular;
        }
        total
    }
}

impl ChannelGrid for DiscGrid {
    fn wavenumber(&self) -> f64 {
        self.k
    }
    fn len(&self) -> usize {
        self.nodes.len()
    }
    fn omegas(&self) -> &[f64] {
        &self.omegas
    }
    fn averaging_weights(&self) -> &[f64] {
        &self.averaging
    }
    fn delta_normalization(&self) -> f64 {
        4.0 * PI * PI
    }
}

/// (1/4π²)∫_disc d²p f.
pub fn disc_quadrature(grid: &DiscGrid, samples: &[Complex64]) -> Result<Complex64> {
    Ok(grid.disc_integral(samples)? / (4.0 * PI * PI))
}

/// Transfer operator of the point interaction 𝔷δ(x)δ(y)δ(z).
pub fn delta3d_operator(z: Complex64, grid: &DiscGrid) -> TransferOperator<DiscGrid> {
    delta_operator(z, grid)
}

/// f = −𝔷/(4π + ik𝔷), the same in every direction.
pub fn delta3d_f(z: Complex64, k: f64) -> Result<Complex64> {
    let den = Complex64::new(4.0 * PI, 0.0) + I * k * z;
    if den.norm() <= 1e-14 * (k * z.norm()).max(4.0 * PI) {
        return Err(Error::SpectralSingularity(format!("3D delta amplitude diverges at k = {k}")));
    }
    Ok(-z / den)
}

/// B̃₋ + 1 = 4π/(4π + i𝔷k), the transverse average of the lower amplitude plus one.
pub fn delta3d_b_plus_one(z: Complex64, k: f64) -> Complex64 {
    4.0 * PI / (Complex64::new(4.0 * PI, 0.0) + I * z * k)
}

/// Scattering length ξ = −lim_{k→0} f = 𝔷/4π.
pub fn scattering_length(z: Complex64) -> Complex64 {
    z / (4.0 * PI)
}

/// μ = 4π/|𝔷|, so that |f|² = 1/(k² + μ²) for real 𝔷.
pub fn mu(z: Complex64) -> f64 {
    4.0 * PI / z.norm()
}

pub fn solve_outgoing_3d(m: &TransferOperator<DiscGrid>) -> Outgoing {
    solve_outgoing(m)
}

/// f(ϑ, φ) = −(ik|cos ϑ|/2π) T±(k sin ϑ cos φ, k sin ϑ sin φ), ± = sgn cos ϑ.
pub fn amplitude3d(
    t_plus: &SpectralAmplitude3D,
    t_minus: &SpectralAmplitude3D,
    grid: &DiscGrid,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    let n = grid.len();
    if t_plus.len() != n || t_minus.len() != n {
        return Err(Error::invalid("amplitude3d: sample count does not match the grid"));
    }
    let (s, c) = theta.sin_cos();
    if c.abs() < GRAZING_COS {
        return Err(Error::invalid(format!("amplitude undefined at grazing angle ϑ = {theta}")));
    }
    let t = if c > 0.0 { t_plus } else { t_minus };
    let g: Vec<Complex64> = t.smooth.iter().zip(grid.omegas()).map(|(v, w)| v * w).collect();
    let rho = grid.k() * s;
    let value = grid.interpolate(&g, [rho * phi.cos(), rho * phi.sin()]);
    Ok(value * Complex64::new(0.0, -1.0 / (2.0 * PI)))
}

/// Transverse (x, y) Fourier transform of a 3D potential at height z:
/// (smooth part, transverse-uniform value).
pub fn fourier_xy(pot: &PotentialSpec, z: f64, q: [f64; 2], k: f64) -> Result<(Complex64, Complex64)> {
    Ok(match pot {
        PotentialSpec::Gaussian3d { amplitude, center, widths } => {
            let s = amplitude
                * gaussian_profile(z, center[2], widths[2])
                * gaussian_ft(q[0], center[0], widths[0])
                * gaussian_ft(q[1], center[1], widths[1]);
            (s, ZERO)
        }
        PotentialSpec::Slab { epsilon, thickness, start } => {
            let u = if z >= *start && z <= start + thickness { optical(*epsilon, k) } else { ZERO };
            (ZERO, u)
        }
        PotentialSpec::Sum { members } => {
            let mut acc = (ZERO, ZERO);
            for m in members {
                let (a, b) = fourier_xy(&m.potential, z, q, k)?;
                acc = (acc.0 + a, acc.1 + b);
            }
            acc
        }
        PotentialSpec::Delta3d { .. } => {
            return Err(Error::UnsupportedEvaluation("δ(z) factor cannot be discretized".into()));
        }
        _ => return Err(Error::invalid("two-dimensional potential on a 3D grid")),
    })
}

fn check_bound(grid: &DiscGrid) -> Result<()> {
    if grid.len() > MAX_DENSE_CHANNELS_3D {
        return Err(Error::ResourceLimit { channels: grid.len(), limit: MAX_DENSE_CHANNELS_3D });
    }
    Ok(())
}

/// H(z) on the disc grid; bounded to small grids.
pub fn effective_hamiltonian_3d(pot: &PotentialSpec, z: f64, grid: &DiscGrid) -> Result<HamiltonianBlock> {
    check_bound(grid)?;
    let p = grid.nodes();
    let avg = grid.averaging_weights();
    let n = p.len();
    let mut v = DMatrix::zeros(n, n);
    let mut uniform = ZERO;
    for j in 0..n {
        for l in 0..n {
            let (s, u) = fourier_xy(pot, z, [p[j][0] - p[l][0], p[j][1] - p[l][1]], grid.k())?;
            uniform = u;
            v[(j, l)] = s * avg[l];
        }
    }
    for j in 0..n {
        v[(j, j)] += uniform;
    }
    Ok(HamiltonianBlock::assemble(z, grid.omegas(), &v))
}

fn coupling_3d(pot: &PotentialSpec, grid: &DiscGrid) -> Result<Coupling> {
    pot.validate()?;
    if pot.is_axis_singular() {
        return Err(Error::UnsupportedEvaluation("δ(z) factors are handled by the closed-form operators".into()));
    }
    let mut c = Coupling::default();
    let k = grid.k();
    let mut bad = false;
    collect_3d(pot, &mut |item| match item {
        Item3::Layer(_, _, eps) if eps == ONE => {}
        Item3::Bump(amp, ..) if amp == ZERO => {}
        Item3::Layer(a, b, eps) => c.layers.push((a, b, optical(eps, k))),
        Item3::Bump(amp, center, widths) => {
            let p = grid.nodes();
            let ft =
                |qx: f64, qy: f64| amp * gaussian_ft(qx, center[0], widths[0]) * gaussian_ft(qy, center[1], widths[1]);
            c.terms.push(Term::build(
                center[2],
                widths[2],
                p.len(),
                grid.averaging_weights(),
                |j, l| ft(p[j][0] - p[l][0], p[j][1] - p[l][1]),
                |j| ft(p[j][0], p[j][1]),
            ));
        }
        Item3::Other => bad = true,
    });
    if bad {
        return Err(Error::invalid("two-dimensional potential on a 3D grid"));
    }
    if !c.terms.is_empty() {
        check_bound(grid)?;
    }
    Ok(c)
}

enum Item3 {
    Layer(f64, f64, Complex64),
    Bump(Complex64, [f64; 3], [f64; 3]),
    Other,
}

fn collect_3d(pot: &PotentialSpec, f: &mut dyn FnMut(Item3)) {
    match pot {
        PotentialSpec::Slab { epsilon, thickness, start } => f(Item3::Layer(*start, start + thickness, *epsilon)),
        PotentialSpec::Gaussian3d { amplitude, center, widths } => f(Item3::Bump(*amplitude, *center, *widths)),
        PotentialSpec::Sum { members } => members.iter().for_each(|m| collect_3d(&m.potential, f)),
        _ => f(Item3::Other),
    }
}

/// Numeric 3D transfer operator by integration along z. Slabs are read as
/// layers in z.
pub fn evolve_transfer_3d(
    pot: &PotentialSpec,
    grid: &DiscGrid,
    cfg: &EvolutionConfig,
) -> Result<TransferOperator<DiscGrid>> {
    let c = coupling_3d(pot, grid)?;
    evolve_coupling(grid, &c, cfg)
}

pub fn evolve_transfer_3d_checked(
    pot: &PotentialSpec,
    grid: &DiscGrid,
    cfg: &EvolutionConfig,
    tolerance: f64,
) -> Result<(TransferOperator<DiscGrid>, Option<AccuracyWarning>)> {
    let c = coupling_3d(pot, grid)?;
    checked(grid, &c, cfg, tolerance, "evolve_transfer_3d")
}

/// Summary of the 3D delta pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta3dReport {
    pub k: f64,
    pub coupling: Complex64,
    pub f: Complex64,
    pub scattering_length: Complex64,
    pub mu: f64,
}
