//! Momentum-space foundations: the channel grid on (−k, k), the dispersion
//! ω(p) = √(k² − p²), singular-weight quadrature and the amplitude data model.
//!
//! Quadrature weights `w_j` integrate against the measure dp/ω(p), i.e.
//! `Σ_j w_j g(p_j) ≈ ∫_{−k}^{k} g(p)/√(k²−p²) dp`. Writing p = k cos t turns
//! that measure into dt on (0, π), which removes the endpoint singularity.
//! The endpoints ±k (where ω vanishes) are never nodes, and evanescent
//! momenta |p| > k are not represented.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{barycentric_eval, barycentric_weights, gauss_legendre};

/// The discretized channel space shared by transfer operators.
///
/// Implemented by [`MomentumGrid`] (2D, p ∈ (−k, k)) and
/// [`DiscGrid`](crate::three_d::DiscGrid) (3D, p⃗ in the disc |p⃗| < k).
pub trait ChannelGrid: Clone + PartialEq + Send + Sync + std::fmt::Debug {
    fn wavenumber(&self) -> f64;

    /// Number of smooth channels (quadrature nodes).
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// ω at every node.
    fn omegas(&self) -> &[f64];

    /// Weights `a_l` with `Σ a_l φ(p_l) ≈ (2π)^{−d} ∫ d^d p φ(p)`.
    fn averaging_weights(&self) -> &[f64];

    /// Normalization of the δ channel: 2π in 2D, 4π² in 3D.
    fn delta_normalization(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFamily {
    /// p_j = k cos(π(2j−1)/2N), w_j = π/N: exact for polynomial g of degree < 2N.
    ChebyshevGauss,
    /// p_j = k cos t_j with t_j Gauss–Legendre on (0, π). Spectrally accurate for
    /// integrands that are smooth in the angle t but carry a √ branch in p at ±k,
    /// such as functions of ω(p) that are not even in ω.
    AngularGaussLegendre,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    k: f64,
    family: NodeFamily,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    omegas: Vec<f64>,
    averaging: Vec<f64>,
    bary: Vec<f64>,
}

/// Chebyshev–Gauss grid with `n` nodes on (−k, k).
pub fn build_grid(k: f64, n: usize) -> Result<MomentumGrid> {
    MomentumGrid::new(k, n, NodeFamily::ChebyshevGauss)
}

impl MomentumGrid {
    pub fn new(k: f64, n: usize, family: NodeFamily) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 nodes, got {n}")));
        }
        // angles t_j ∈ (0, π), ascending; p = k cos t is then descending
        let (angles, weights) = match family {
            NodeFamily::ChebyshevGauss => {
                let t = (1..=n).map(|j| PI * (2 * j - 1) as f64 / (2 * n) as f64).collect::<Vec<_>>();
                (t, vec![PI / n as f64; n])
            }
            NodeFamily::AngularGaussLegendre => gauss_legendre(n, 0.0, PI)?,
        };
        let mut nodes = vec![0.0; n];
        let mut omegas = vec![0.0; n];
        for j in 0..n.div_ceil(2) {
            let (s, c) = angles[j].sin_cos();
            let mirror = n - 1 - j;
            if mirror == j {
                nodes[j] = 0.0;
                omegas[j] = k;
            } else {
                nodes[j] = k * c;
                nodes[mirror] = -k * c;
                omegas[j] = k * s;
                omegas[mirror] = k * s;
            }
        }
        let bary = match family {
            NodeFamily::ChebyshevGauss => (0..n)
                .map(|j| {
                    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                    s * (omegas[j] / k)
                })
                .collect(),
            NodeFamily::AngularGaussLegendre => barycentric_weights(&nodes),
        };
        let averaging = weights.iter().zip(&omegas).map(|(w, o)| w * o / (2.0 * PI)).collect();
        Ok(Self { k, family, nodes, weights, omegas, averaging, bary })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn family(&self) -> NodeFamily {
        self.family
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for the 1/ω-weighted rule.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ω(p) = √(k² − p²) for any |p| ≤ k.
    pub fn omega_at(&self, p: f64) -> f64 {
        ((self.k - p) * (self.k + p)).max(0.0).sqrt()
    }

    /// Barycentric interpolation of node samples at `p`.
    pub fn interpolate(&self, values: &[Complex64], p: f64) -> Complex64 {
        barycentric_eval(&self.nodes, &self.bary, values, p)
    }
}

impl ChannelGrid for MomentumGrid {
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
        2.0 * PI
    }
}

/// `weighted = true`: (1/2π) Σ w_j ω_j s_j ≈ (1/2π) ∫ s(p) dp, the plain average.
/// `weighted = false`: (1/2π) Σ w_j s_j ≈ (1/2π) ∫ s(p)/ω(p) dp.
pub fn quadrature(grid: &MomentumGrid, samples: &[Complex64], weighted: bool) -> Result<Complex64> {
    if samples.len() != grid.len() {
        return Err(Error::invalid(format!(
            "quadrature: {} samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    let sum: Complex64 = if weighted {
        samples.iter().zip(grid.averaging_weights()).map(|(s, a)| s * a).sum()
    } else {
        samples.iter().zip(grid.weights()).map(|(s, w)| s * w).sum::<Complex64>() / (2.0 * PI)
    };
    Ok(sum)
}

/// A half-line wave in momentum space: `delta_coeff · (2π)^d δ(p) + smooth(p)`.
///
/// In 2D the δ factor is 2πδ(p); in 3D it is 4π²δ(p_x)δ(p_y). The smooth part is
/// sampled on the owning grid's nodes and δ(p) itself is never sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    pub delta_coeff: Complex64,
    pub smooth: Vec<Complex64>,
}

impl SpectralAmplitude {
    pub fn zero(n: usize) -> Self {
        Self { delta_coeff: Complex64::new(0.0, 0.0), smooth: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn is_zero(&self) -> bool {
        self.delta_coeff == Complex64::new(0.0, 0.0) && self.smooth.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smooth.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { delta_coeff: self.delta_coeff * c, smooth: self.smooth.iter().map(|z| z * c).collect() }
    }

    /// Largest deviation from `other` over the δ coefficient and all samples.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.smooth
            .iter()
            .zip(&other.smooth)
            .map(|(a, b)| (a - b).norm())
            .fold((self.delta_coeff - other.delta_coeff).norm(), f64::max)
    }
}
