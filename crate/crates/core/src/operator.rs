//! Transfer operators on a channel grid, their composition and the
//! extraction of outgoing amplitudes.
//!
//! An operator is split into a part that multiplies pointwise in momentum
//! (a 2×2 matrix depending on p only through ω(p)) and an integral kernel
//! discretized on the grid. The multiplicative part is what carries an
//! incident plane wave, 2πδ(p), through unchanged in kind; kernels only ever
//! produce smooth output. `kernel_at_zero` is the kernel applied to a unit
//! δ-channel source.
//!
//! Kernel matrices act on stacked samples `[upper; lower]` of length 2N with
//! the quadrature weights already folded into their columns.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_forms::SlabParams;
use crate::error::{Error, Result};
use crate::evolution::LayerStack;
use crate::linalg::{
    condition_number, mat2_identity, mat2_max_abs, mat2_to_dense, nodewise_left, nodewise_right, Mat2, ONE,
};
use crate::par;
use crate::spectral::{ChannelGrid, MomentumGrid, SpectralAmplitude};

/// Condition estimates above this make the extraction singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Condition estimates above this are flagged as near-singular.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e8;

/// The pointwise part of a transfer operator as a function of ω.
#[derive(Clone, Debug, PartialEq)]
pub enum Multiplier {
    Identity,
    /// Closed-form homogeneous layer.
    Slab(SlabParams),
    /// Numerically evolved stack of homogeneous layers.
    Evolved(LayerStack),
    /// Product in application order reversed: `Product([a, b])` is a·b.
    Product(Vec<Multiplier>),
}

impl Multiplier {
    pub fn at(&self, omega: f64) -> Mat2 {
        match self {
            Multiplier::Identity => mat2_identity(),
            Multiplier::Slab(sp) => sp.matrix(omega),
            Multiplier::Evolved(stack) => stack.matrix(omega),
            Multiplier::Product(items) => items.iter().fold(mat2_identity(), |acc, m| acc * m.at(omega)),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Multiplier::Identity)
    }

    /// `self · first`, flattening nested products.
    pub fn then_after(&self, first: &Multiplier) -> Multiplier {
        match (self, first) {
            (Multiplier::Identity, m) | (m, Multiplier::Identity) => m.clone(),
            _ => {
                let mut items = Vec::new();
                for m in [self, first] {
                    match m {
                        Multiplier::Product(v) => items.extend(v.iter().cloned()),
                        other => items.push(other.clone()),
                    }
                }
                Multiplier::Product(items)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOperator<G: ChannelGrid> {
    grid: Arc<G>,
    mult: Multiplier,
    mult_zero: Mat2,
    mult_nodes: Vec<Mat2>,
    kernel: Option<DMatrix<Complex64>>,
    kernel_at_zero: Option<DMatrix<Complex64>>,
}

impl<G: ChannelGrid> TransferOperator<G> {
    pub fn identity(grid: &G) -> Self {
        Self::from_arc(Arc::new(grid.clone()), Multiplier::Identity)
    }

    /// A purely multiplicative operator.
    pub fn multiplicative(grid: &G, mult: Multiplier) -> Self {
        Self::from_arc(Arc::new(grid.clone()), mult)
    }

    fn from_arc(grid: Arc<G>, mult: Multiplier) -> Self {
        let mult_zero = mult.at(grid.wavenumber());
        let mult_nodes = match &mult {
            Multiplier::Identity => vec![mat2_identity(); grid.len()],
            m => par::map_slice(grid.omegas(), |&w| m.at(w)),
        };
        Self { grid, mult, mult_zero, mult_nodes, kernel: None, kernel_at_zero: None }
    }

    /// Builds an operator from all parts. `kernel` is 2N×2N and
    /// `kernel_at_zero` 2N×2, both in stacked `[upper; lower]` layout.
    pub fn new(
        grid: &G,
        mult: Multiplier,
        kernel: Option<DMatrix<Complex64>>,
        kernel_at_zero: Option<DMatrix<Complex64>>,
    ) -> Result<Self> {
        let mut op = Self::multiplicative(grid, mult);
        let n2 = 2 * grid.len();
        if let Some(k) = &kernel {
            if k.shape() != (n2, n2) {
                return Err(Error::invalid(format!("kernel shape {:?}, expected ({n2}, {n2})", k.shape())));
            }
        }
        if let Some(k) = &kernel_at_zero {
            if k.shape() != (n2, 2) {
                return Err(Error::invalid(format!("kernel_at_zero shape {:?}, expected ({n2}, 2)", k.shape())));
            }
        }
        op.kernel = kernel;
        op.kernel_at_zero = kernel_at_zero;
        Ok(op)
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn mult(&self) -> &Multiplier {
        &self.mult
    }

    /// The multiplicative part at the node p_j.
    pub fn mult_at_node(&self, j: usize) -> Mat2 {
        self.mult_nodes[j]
    }

    pub fn mult_nodes(&self) -> &[Mat2] {
        &self.mult_nodes
    }

    /// The multiplicative part on the δ channel (p = 0, ω = k).
    pub fn mult_at_zero(&self) -> Mat2 {
        self.mult_zero
    }

    /// The multiplicative part at any ω in [0, k].
    pub fn mult_at_omega(&self, omega: f64) -> Mat2 {
        self.mult.at(omega)
    }

    pub fn kernel(&self) -> Option<&DMatrix<Complex64>> {
        self.kernel.as_ref()
    }

    pub fn kernel_at_zero(&self) -> Option<&DMatrix<Complex64>> {
        self.kernel_at_zero.as_ref()
    }

    /// Block (a, b) of the kernel, a, b ∈ {0, 1}; zeros when there is no kernel.
    pub fn kernel_block(&self, a: usize, b: usize) -> DMatrix<Complex64> {
        let n = self.grid.len();
        match &self.kernel {
            Some(k) => k.view((a * n, b * n), (n, n)).into_owned(),
            None => DMatrix::zeros(n, n),
        }
    }

    /// Column block (a, b) of `kernel_at_zero` as an N-vector.
    pub fn kernel_at_zero_block(&self, a: usize, b: usize) -> DVector<Complex64> {
        let n = self.grid.len();
        match &self.kernel_at_zero {
            Some(k) => k.view((a * n, b), (n, 1)).column(0).into_owned(),
            None => DVector::zeros(n),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mult.is_identity() && self.kernel.is_none() && self.kernel_at_zero.is_none()
    }

    /// Largest entrywise difference over node multipliers, δ-channel
    /// multiplier, kernel and kernel_at_zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n2 = 2 * self.grid.len();
        let mut d = mat2_max_abs(&(self.mult_zero - other.mult_zero));
        for (a, b) in self.mult_nodes.iter().zip(&other.mult_nodes) {
            d = d.max(mat2_max_abs(&(a - b)));
        }
        let dense = |m: &Option<DMatrix<Complex64>>, cols: usize| m.clone().unwrap_or_else(|| DMatrix::zeros(n2, cols));
        for (x, y, cols) in [(&self.kernel, &other.kernel, n2), (&self.kernel_at_zero, &other.kernel_at_zero, 2)] {
            if x.is_some() || y.is_some() {
                d = d.max(crate::linalg::max_abs_diff(&dense(x, cols), &dense(y, cols)));
            }
        }
        d
    }
}

/// `second ∘ first`: the operator of a potential whose piece described by
/// `first` lies entirely to the left of the piece described by `second`.
pub fn compose<G: ChannelGrid>(
    second: &TransferOperator<G>,
    first: &TransferOperator<G>,
) -> Result<TransferOperator<G>> {
    if !Arc::ptr_eq(&second.grid, &first.grid) && *second.grid != *first.grid {
        return Err(Error::invalid("compose: operators live on different grids"));
    }
    if first.is_identity() {
        return Ok(second.clone());
    }
    if second.is_identity() {
        return Ok(first.clone());
    }
    let mult = second.mult.then_after(&first.mult);
    let mult_nodes = second.mult_nodes.iter().zip(&first.mult_nodes).map(|(a, b)| a * b).collect();
    let mult_zero = second.mult_zero * first.mult_zero;

    let left = |m: &DMatrix<Complex64>| {
        if second.mult.is_identity() {
            m.clone()
        } else {
            nodewise_left(&second.mult_nodes, m)
        }
    };
    let kernel = match (&second.kernel, &first.kernel) {
        (None, None) => None,
        (None, Some(k1)) => Some(left(k1)),
        (Some(k2), None) => Some(right_mult(k2, &first.mult, &first.mult_nodes)),
        (Some(k2), Some(k1)) => Some(left(k1) + right_mult(k2, &first.mult, &first.mult_nodes) + par::matmul(k2, k1)),
    };

    let mut kz: Option<DMatrix<Complex64>> = first.kernel_at_zero.as_ref().map(&left);
    if let (Some(k2), Some(z1)) = (&second.kernel, &first.kernel_at_zero) {
        add_into(&mut kz, k2 * z1);
    }
    if let Some(z2) = &second.kernel_at_zero {
        add_into(&mut kz, z2 * mat2_to_dense(&first.mult_zero));
    }

    Ok(TransferOperator { grid: second.grid.clone(), mult, mult_zero, mult_nodes, kernel, kernel_at_zero: kz })
}

fn right_mult(k: &DMatrix<Complex64>, mult: &Multiplier, nodes: &[Mat2]) -> DMatrix<Complex64> {
    if mult.is_identity() {
        k.clone()
    } else {
        nodewise_right(k, nodes)
    }
}

fn add_into(acc: &mut Option<DMatrix<Complex64>>, m: DMatrix<Complex64>) {
    match acc {
        Some(a) => *a += m,
        None => *acc = Some(m),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SingularityFlag {
    None,
    NearSingular { condition: f64 },
    Singular,
}

impl SingularityFlag {
    pub fn is_singular(&self) -> bool {
        matches!(self, SingularityFlag::Singular)
    }
}

/// Outgoing amplitudes for an incident wave c·(normalization)·δ(p).
#[derive(Clone, Debug, PartialEq)]
pub struct Outgoing {
    pub t_plus: SpectralAmplitude,
    pub t_minus: SpectralAmplitude,
    pub flag: SingularityFlag,
}

/// T± for a unit incident plane wave A₋ = 2πδ(p), B₊ = 0.
pub fn solve_outgoing<G: ChannelGrid>(m: &TransferOperator<G>) -> Outgoing {
    solve_outgoing_with_incident(m, ONE)
}

/// T± for the incident wave A₋ = c·2πδ(p), B₊ = 0 (4π²δ(p⃗) in 3D).
///
/// Values may be non-finite when the flag is `Singular`.
pub fn solve_outgoing_with_incident<G: ChannelGrid>(m: &TransferOperator<G>, c: Complex64) -> Outgoing {
    let n = m.grid.len();
    let mz = m.mult_zero;
    let scale = mat2_max_abs(&mz).max(f64::MIN_POSITIVE);
    let mut flag = SingularityFlag::None;
    if mz[(1, 1)].norm() <= 1e-14 * scale {
        flag = SingularityFlag::Singular;
    }
    let b0 = -mz[(1, 0)] / mz[(1, 1)] * c;
    let a0 = mz[(0, 0)] * c + mz[(0, 1)] * b0;

    let kz21 = m.kernel_at_zero_block(1, 0);
    let kz22 = m.kernel_at_zero_block(1, 1);
    let rhs: DVector<Complex64> = -(kz21 * c + kz22 * b0);

    let m22: Vec<Complex64> = m.mult_nodes.iter().map(|x| x[(1, 1)]).collect();
    let (phi, cond) = match &m.kernel {
        None => {
            let mags: Vec<f64> = m22.iter().map(|z| z.norm()).collect();
            let hi = mags.iter().cloned().fold(0.0, f64::max);
            let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
            let phi = DVector::from_iterator(n, rhs.iter().zip(&m22).map(|(r, d)| r / d));
            (phi, if lo > 0.0 { hi / lo } else { f64::INFINITY })
        }
        Some(_) => {
            let mut a = m.kernel_block(1, 1);
            for j in 0..n {
                a[(j, j)] += m22[j];
            }
            let cond = condition_number(&a);
            let phi =
                a.lu().solve(&rhs).unwrap_or_else(|| DVector::from_element(n, Complex64::new(f64::NAN, f64::NAN)));
            (phi, cond)
        }
    };
    if !cond.is_finite() || cond > SINGULAR_CONDITION {
        flag = SingularityFlag::Singular;
    } else if cond > NEAR_SINGULAR_CONDITION && flag == SingularityFlag::None {
        flag = SingularityFlag::NearSingular { condition: cond };
    }

    let mut smooth_plus: DVector<Complex64> = m.kernel_at_zero_block(0, 0) * c + m.kernel_at_zero_block(0, 1) * b0;
    for j in 0..n {
        smooth_plus[j] += m.mult_nodes[j][(0, 1)] * phi[j];
    }
    if m.kernel.is_some() {
        smooth_plus += m.kernel_block(0, 1) * &phi;
    }

    Outgoing {
        t_plus: SpectralAmplitude { delta_coeff: a0 - c, smooth: smooth_plus.iter().copied().collect() },
        t_minus: SpectralAmplitude { delta_coeff: b0, smooth: phi.iter().copied().collect() },
        flag,
    }
}

/// Angles closer than this (in |cos θ|) to grazing are rejected.
pub const GRAZING_COS: f64 = 1e-12;

/// Reduces an angle to [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// f(θ) = −(ik|cos θ|/√(2π)) T±(k sin θ), with T₊ for cos θ > 0 and T₋ for
/// cos θ < 0. Only smooth parts enter; δ-coefficients describe the
/// forward/backward coherent beams and are reported separately.
///
/// The interpolated quantity is ω·T, which stays bounded at |p| → k.
pub fn amplitude(
    t_plus: &SpectralAmplitude,
    t_minus: &SpectralAmplitude,
    grid: &MomentumGrid,
    thetas: &[f64],
) -> Result<Vec<(f64, Complex64)>> {
    let n = grid.len();
    if t_plus.len() != n || t_minus.len() != n {
        return Err(Error::invalid("amplitude: sample count does not match the grid"));
    }
    let weighted =
        |t: &SpectralAmplitude| -> Vec<Complex64> { t.smooth.iter().zip(grid.omegas()).map(|(v, w)| v * w).collect() };
    let (gp, gm) = (weighted(t_plus), weighted(t_minus));
    let pref = Complex64::new(0.0, -1.0 / (2.0 * PI).sqrt());
    par::map_slice(thetas, |&theta| {
        let th = normalize_angle(theta);
        let (s, c) = th.sin_cos();
        if c.abs() < GRAZING_COS {
            return Err(Error::invalid(format!("amplitude undefined at grazing angle θ = {theta}")));
        }
        let p = grid.k() * s;
        let g = if c > 0.0 { grid.interpolate(&gp, p) } else { grid.interpolate(&gm, p) };
        Ok((th, pref * g))
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringResult {
    pub t_plus: SpectralAmplitude,
    pub t_minus: SpectralAmplitude,
    /// (θ in [0, 2π), f(θ)); grazing angles are omitted.
    pub f_samples: Vec<(f64, Complex64)>,
    pub singularity: SingularityFlag,
}

/// Full extraction: T± and f at the requested angles, skipping cos θ = 0.
pub fn scatter(m: &TransferOperator<MomentumGrid>, thetas: &[f64]) -> Result<ScatteringResult> {
    let out = solve_outgoing(m);
    let usable: Vec<f64> = thetas.iter().copied().filter(|t| normalize_angle(*t).cos().abs() >= GRAZING_COS).collect();
    let f_samples = amplitude(&out.t_plus, &out.t_minus, m.grid(), &usable)?;
    Ok(ScatteringResult { t_plus: out.t_plus, t_minus: out.t_minus, f_samples, singularity: out.flag })
}

/// `count` angles uniformly spaced on [0, 2π), offset by a third of a step
/// so that none of them is grazing.
pub fn default_angles(count: usize) -> Vec<f64> {
    let h = 2.0 * PI / count as f64;
    (0..count).map(|i| (i as f64 + 1.0 / 3.0) * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{delta2d_operator, slab_operator};
    use crate::linalg::ZERO;
    use crate::spectral::build_grid;

    fn grid() -> MomentumGrid {
        build_grid(2.0, 12).unwrap()
    }

    #[test]
    fn identity_extracts_nothing() {
        let out = solve_outgoing(&TransferOperator::identity(&grid()));
        assert!(out.t_plus.is_zero() && out.t_minus.is_zero());
        assert_eq!(out.flag, SingularityFlag::None);
    }

    #[test]
    fn identity_laws_are_exact() {
        let g = grid();
        let d = delta2d_operator(Complex64::new(1.0, 0.5), &g);
        let id = TransferOperator::identity(&g);
        for c in [compose(&d, &id).unwrap(), compose(&id, &d).unwrap()] {
            assert_eq!(c.kernel(), d.kernel());
            assert_eq!(c.kernel_at_zero(), d.kernel_at_zero());
            assert_eq!(c.mult_nodes(), d.mult_nodes());
        }
    }

    #[test]
    fn compose_rejects_foreign_grid() {
        let a = TransferOperator::identity(&grid());
        let b = delta2d_operator(Complex64::new(1.0, 0.0), &build_grid(2.0, 10).unwrap());
        assert!(compose(&a, &b).is_err() || a.is_identity());
        let c = delta2d_operator(Complex64::new(1.0, 0.0), &grid());
        assert!(compose(&b, &c).is_err());
    }

    #[test]
    fn multiplicative_operator_gives_only_delta_terms() {
        let g = grid();
        let sp = SlabParams::new(Complex64::new(2.0, 0.1), 1.0, 2.0).unwrap();
        let out = solve_outgoing(&slab_operator(&sp, &g));
        assert!(out.t_plus.smooth.iter().chain(&out.t_minus.smooth).all(|z| *z == ZERO));
        let m = sp.matrix(2.0);
        assert!((out.t_minus.delta_coeff + m[(1, 0)] / m[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn angles_are_normalized_and_grazing_rejected() {
        let g = grid();
        let z = SpectralAmplitude::zero(g.len());
        let f = amplitude(&z, &z, &g, &[-0.3]).unwrap();
        assert!((f[0].0 - (2.0 * PI - 0.3)).abs() < 1e-15);
        assert!(amplitude(&z, &z, &g, &[PI / 2.0]).is_err());
        assert!(default_angles(50).iter().all(|t| t.cos().abs() > 1e-3));
    }
}
