//! Numeric transfer operators: the effective Hamiltonian on the channel grid
//! and its time-ordered exponential along the scattering axis.
//!
//! The state evolved is U(x) on an augmented channel space: the N smooth
//! nodes plus one δ channel (an extra node with ω = k) that carries the
//! incident plane wave. A potential maps a δ source to a smooth function
//! ṽ(x, p) and, through its transverse average, back to the δ channel; a
//! smooth source never feeds the δ channel. Integrating the augmented
//! system therefore yields the kernel and its δ-source column together.
//!
//! Transverse-uniform layers act node by node. Stretches containing only
//! layers are propagated with per-node 2×2 integrations and stretches where
//! the potential vanishes are skipped, so free propagation is exact.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat2_identity, nodewise_left, Mat2, I, ONE, ZERO};
use crate::operator::{Multiplier, TransferOperator};
use crate::par;
use crate::potential::{fourier_y, gaussian_ft, gaussian_profile, optical, PotentialSpec, GAUSSIAN_SUPPORT_SIGMAS};
use crate::spectral::{ChannelGrid, MomentumGrid};

/// Default relative change tolerated by the step-doubling check.
pub const DEFAULT_HALVING_TOLERANCE: f64 = 1e-6;

/// H(x) on the grid as four N×N blocks acting on stacked (upper, lower) samples.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianBlock {
    pub x: f64,
    pub h11: DMatrix<Complex64>,
    pub h12: DMatrix<Complex64>,
    pub h21: DMatrix<Complex64>,
    pub h22: DMatrix<Complex64>,
}

impl HamiltonianBlock {
    /// Assembles H from the potential kernel V at x:
    /// H₁₁ = ½Ω⁻¹D₋VD₊, H₁₂ = ½Ω⁻¹D₋VD₋, H₂₁ = −½Ω⁻¹D₊VD₊, H₂₂ = −½Ω⁻¹D₊VD₋.
    pub fn assemble(x: f64, omegas: &[f64], v: &DMatrix<Complex64>) -> Self {
        let n = omegas.len();
        let ep: Vec<Complex64> = omegas.iter().map(|w| (I * w * x).exp()).collect();
        let em: Vec<Complex64> = ep.iter().map(|e| e.inv()).collect();
        let block = |left: &[Complex64], right: &[Complex64], sign: f64| {
            DMatrix::from_fn(n, n, |j, l| v[(j, l)] * left[j] * right[l] * (sign * 0.5 / omegas[j]))
        };
        Self {
            x,
            h11: block(&em, &ep, 1.0),
            h12: block(&em, &em, 1.0),
            h21: block(&ep, &ep, -1.0),
            h22: block(&ep, &em, -1.0),
        }
    }

    /// The stacked 2N×2N matrix.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.h11.nrows();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&self.h11);
        out.view_mut((0, n), (n, n)).copy_from(&self.h12);
        out.view_mut((n, 0), (n, n)).copy_from(&self.h21);
        out.view_mut((n, n), (n, n)).copy_from(&self.h22);
        out
    }

    pub fn is_zero(&self) -> bool {
        [&self.h11, &self.h12, &self.h21, &self.h22].iter().all(|b| b.iter().all(|z| *z == ZERO))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical fixed-step fourth-order Runge–Kutta.
    #[default]
    ClassicalRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub steps: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

impl EvolutionConfig {
    pub fn new(x_min: f64, x_max: f64, steps: usize) -> Result<Self> {
        let cfg = Self { x_min, x_max, steps, scheme: Scheme::ClassicalRk4 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Window covering the potential's support (Gaussians cut at ±8σ).
    pub fn auto(pot: &PotentialSpec, steps: usize) -> Result<Self> {
        match pot.support_window() {
            Some((a, b)) if b > a => Self::new(a, b, steps),
            _ => {
                Err(Error::UnsupportedEvaluation("potential has no extended support along the scattering axis".into()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::invalid(format!("evolution window [{}, {}] is empty", self.x_min, self.x_max)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("evolution needs at least one step"));
        }
        Ok(())
    }

    pub fn with_steps(&self, steps: usize) -> Self {
        Self { steps, ..*self }
    }
}

/// Structured record emitted when doubling the step count changes the result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyWarning {
    pub op: String,
    pub steps: usize,
    pub delta: f64,
}

impl fmt::Display for AccuracyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let json = serde_json::json!({"accuracy_warning": {"op": self.op, "steps": self.steps, "delta": self.delta}});
        write!(f, "{json}")
    }
}

/// One homogeneous layer with potential `z_tilde` integrated in `steps` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub start: f64,
    pub end: f64,
    pub z_tilde: Complex64,
    pub steps: usize,
}

impl Layer {
    /// RK4 transfer matrix of the layer at ω, from
    /// H(x) = (z̃/2ω)[[1, e^{−2iωx}], [−e^{2iωx}, −1]].
    pub fn matrix(&self, omega: f64) -> Mat2 {
        let c = self.z_tilde / (2.0 * omega);
        let h_at = |x: f64| {
            let e = (I * (2.0 * omega * x)).exp();
            Mat2::new(c, c / e, -c * e, -c)
        };
        let n = self.steps.max(1);
        let len = self.end - self.start;
        let h = len / n as f64;
        let mut u = mat2_identity();
        for s in 0..n {
            let x0 = self.start + len * (s as f64 / n as f64);
            let (h0, hm, h1) = (h_at(x0), h_at(x0 + 0.5 * h), h_at(x0 + h));
            let k1 = -(h0 * u) * I;
            let half = Complex64::new(0.5 * h, 0.0);
            let k2 = -(hm * (u + k1 * half)) * I;
            let k3 = -(hm * (u + k2 * half)) * I;
            let k4 = -(h1 * (u + k3 * Complex64::new(h, 0.0))) * I;
            u += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
        }
        u
    }
}

/// A sequence of layers ordered along the axis; the multiplicative part of
/// an evolved operator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
}

impl LayerStack {
    pub fn matrix(&self, omega: f64) -> Mat2 {
        self.layers.iter().fold(mat2_identity(), |acc, l| l.matrix(omega) * acc)
    }
}

/// A transversely localized term: profile(x) · Q, with Q the Nyström matrix
/// of its transverse Fourier transform on the augmented channel space.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub center: f64,
    pub sigma: f64,
    pub amplitude_q: DMatrix<Complex64>,
}

impl Term {
    fn window(&self) -> (f64, f64) {
        let r = GAUSSIAN_SUPPORT_SIGMAS * self.sigma;
        (self.center - r, self.center + r)
    }

    /// Q for a transverse transform `ft(Δp)` on nodes with averaging weights:
    /// Q[j, l] = ft(p_j − p_l)·a_l, Q[j, N] = ft(p_j) (δ source), Q[N, ·] = 0.
    pub fn build(
        center: f64,
        sigma: f64,
        n: usize,
        avg: &[f64],
        ft_pair: impl Fn(usize, usize) -> Complex64,
        ft_source: impl Fn(usize) -> Complex64,
    ) -> Self {
        let mut q = DMatrix::zeros(n + 1, n + 1);
        for j in 0..n {
            for l in 0..n {
                q[(j, l)] = ft_pair(j, l) * avg[l];
            }
            q[(j, n)] = ft_source(j);
        }
        Self { center, sigma, amplitude_q: q }
    }
}

/// Everything the engine needs to know about a potential.
#[derive(Clone, Debug, Default)]
pub(crate) struct Coupling {
    pub terms: Vec<Term>,
    /// (start, end, z̃) of transverse-uniform layers.
    pub layers: Vec<(f64, f64, Complex64)>,
}

impl Coupling {
    fn uniform_at(&self, x: f64) -> Complex64 {
        self.layers.iter().filter(|(a, b, _)| x >= *a && x <= *b).map(|l| l.2).sum()
    }
}

struct Segment {
    a: f64,
    b: f64,
    steps: usize,
    uniform: Complex64,
    terms: Vec<usize>,
}

fn segments(c: &Coupling, cfg: &EvolutionConfig) -> Vec<Segment> {
    let mut cuts = vec![cfg.x_min, cfg.x_max];
    for (a, b, _) in &c.layers {
        cuts.extend([*a, *b]);
    }
    for t in &c.terms {
        let (a, b) = t.window();
        cuts.extend([a, b]);
    }
    cuts.retain(|x| *x >= cfg.x_min && *x <= cfg.x_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut segs: Vec<Segment> = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .filter_map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let uniform = c.uniform_at(mid);
            let terms: Vec<usize> = (0..c.terms.len())
                .filter(|&i| {
                    let (a, b) = c.terms[i].window();
                    mid > a && mid < b
                })
                .collect();
            (uniform != ZERO || !terms.is_empty()).then_some(Segment { a: w[0], b: w[1], steps: 0, uniform, terms })
        })
        .collect();
    let active: f64 = segs.iter().map(|s| s.b - s.a).sum();
    for s in &mut segs {
        s.steps = ((cfg.steps as f64 * (s.b - s.a) / active).round() as usize).max(1);
    }
    segs
}

/// Evolves a coupling on any channel grid.
pub(crate) fn evolve_coupling<G: ChannelGrid>(
    grid: &G,
    c: &Coupling,
    cfg: &EvolutionConfig,
) -> Result<TransferOperator<G>> {
    cfg.validate()?;
    let segs = segments(c, cfg);
    let stack = LayerStack {
        layers: segs
            .iter()
            .filter(|s| s.uniform != ZERO)
            .map(|s| Layer { start: s.a, end: s.b, z_tilde: s.uniform, steps: s.steps })
            .collect(),
    };
    let mult = if stack.layers.is_empty() { Multiplier::Identity } else { Multiplier::Evolved(stack) };
    let uses_kernel = segs.iter().any(|s| !s.terms.is_empty());
    if !uses_kernel {
        let op = TransferOperator::multiplicative(grid, mult);
        return finite_or_divergence(op);
    }

    let n = grid.len();
    let n1 = n + 1;
    let mut omegas = grid.omegas().to_vec();
    omegas.push(grid.wavenumber());

    // per-node matrices of layer-only segments, shared by all column chunks
    let nodewise: Vec<Option<Vec<Mat2>>> = segs
        .iter()
        .map(|s| {
            s.terms.is_empty().then(|| {
                let layer = Layer { start: s.a, end: s.b, z_tilde: s.uniform, steps: s.steps };
                par::map_slice(&omegas, |&w| layer.matrix(w))
            })
        })
        .collect();

    let cols = 2 * n1;
    let chunks = par::chunk_count().min(cols).max(1);
    let width = cols.div_ceil(chunks);
    let starts: Vec<usize> = (0..cols).step_by(width).collect();
    let blocks = par::map_slice(&starts, |&c0| {
        let w = width.min(cols - c0);
        let mut u = DMatrix::<Complex64>::zeros(cols, w);
        for i in 0..w {
            u[(c0 + i, i)] = Complex64::new(1.0, 0.0);
        }
        for (s, nw) in segs.iter().zip(&nodewise) {
            match nw {
                Some(m) => u = nodewise_left(m, &u),
                None => rk4_dense(&mut u, s, c, &omegas),
            }
        }
        u
    });
    let mut u = DMatrix::zeros(cols, cols);
    for (c0, blk) in starts.iter().zip(blocks) {
        u.columns_mut(*c0, blk.ncols()).copy_from(&blk);
    }
    if u.iter().any(|z| !z.is_finite()) {
        return Err(Error::Divergence("evolution produced non-finite entries".into()));
    }

    let op = TransferOperator::multiplicative(grid, mult);
    let idx = |a: usize, j: usize| a * n1 + j;
    let mut kernel = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..2 {
        for b in 0..2 {
            for j in 0..n {
                for l in 0..n {
                    kernel[(a * n + j, b * n + l)] = u[(idx(a, j), idx(b, l))];
                }
            }
        }
    }
    for (j, m) in op.mult_nodes().iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                kernel[(a * n + j, b * n + j)] -= m[(a, b)];
            }
        }
    }
    let kz = DMatrix::from_fn(2 * n, 2, |r, b| u[(idx(r / n, r % n), idx(b, n))]);
    TransferOperator::new(grid, op.mult().clone(), Some(kernel), Some(kz))
}

fn finite_or_divergence<G: ChannelGrid>(op: TransferOperator<G>) -> Result<TransferOperator<G>> {
    let ok = op.mult_nodes().iter().chain(std::iter::once(&op.mult_at_zero())).all(|m| m.iter().all(|z| z.is_finite()));
    if ok {
        Ok(op)
    } else {
        Err(Error::Divergence("evolution produced non-finite entries".into()))
    }
}

/// Classical RK4 on the columns `u` (augmented, stacked) across one segment.
fn rk4_dense(u: &mut DMatrix<Complex64>, s: &Segment, c: &Coupling, omegas: &[f64]) {
    let n1 = omegas.len();
    let potential = |x: f64| {
        let mut v = DMatrix::<Complex64>::identity(n1, n1) * s.uniform;
        for &t in &s.terms {
            let term = &c.terms[t];
            v += &term.amplitude_q * Complex64::new(gaussian_profile(x, term.center, term.sigma), 0.0);
        }
        v
    };
    let rhs = |x: f64, v: &DMatrix<Complex64>, u: &DMatrix<Complex64>| {
        let w = u.ncols();
        let ep: Vec<Complex64> = omegas.iter().map(|om| (I * om * x).exp()).collect();
        let mut wmat = DMatrix::zeros(n1, w);
        for col in 0..w {
            for j in 0..n1 {
                wmat[(j, col)] = ep[j] * u[(j, col)] + u[(n1 + j, col)] / ep[j];
            }
        }
        let y = v * wmat;
        let mut out = DMatrix::zeros(2 * n1, w);
        for col in 0..w {
            for j in 0..n1 {
                let f = y[(j, col)] * (0.5 / omegas[j]);
                out[(j, col)] = -I * f / ep[j];
                out[(n1 + j, col)] = I * f * ep[j];
            }
        }
        out
    };
    let len = s.b - s.a;
    let h = len / s.steps as f64;
    for step in 0..s.steps {
        let x0 = s.a + len * (step as f64 / s.steps as f64);
        let (v0, vm, v1) = (potential(x0), potential(x0 + 0.5 * h), potential(x0 + h));
        let k1 = rhs(x0, &v0, u);
        let k2 = rhs(x0 + 0.5 * h, &vm, &(&*u + &k1 * Complex64::new(0.5 * h, 0.0)));
        let k3 = rhs(x0 + 0.5 * h, &vm, &(&*u + &k2 * Complex64::new(0.5 * h, 0.0)));
        let k4 = rhs(x0 + h, &v1, &(&*u + &k3 * Complex64::new(h, 0.0)));
        *u += (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
    }
}

/// Builds the engine description of a 2D potential.
pub(crate) fn coupling_2d(pot: &PotentialSpec, grid: &MomentumGrid) -> Result<Coupling> {
    pot.validate()?;
    if pot.is_three_dimensional() {
        return Err(Error::invalid("three-dimensional potential on a 2D grid"));
    }
    if pot.is_axis_singular() {
        return Err(Error::UnsupportedEvaluation(
            "δ(x) factors are handled by the closed-form operators, not by evolution".into(),
        ));
    }
    let mut c = Coupling::default();
    let k = grid.k();
    pot.collect_layers(&mut |a, b, eps| {
        if eps != ONE {
            c.layers.push((a, b, optical(eps, k)))
        }
    });
    collect_bumps(pot, &mut |amp, center, widths| {
        if amp == ZERO {
            return;
        }
        let p = grid.nodes();
        c.terms.push(Term::build(
            center[0],
            widths[0],
            p.len(),
            grid.averaging_weights(),
            |j, l| amp * gaussian_ft(p[j] - p[l], center[1], widths[1]),
            |j| amp * gaussian_ft(p[j], center[1], widths[1]),
        ));
    });
    Ok(c)
}

fn collect_bumps(pot: &PotentialSpec, f: &mut dyn FnMut(Complex64, [f64; 2], [f64; 2])) {
    match pot {
        PotentialSpec::GaussianBump { amplitude, center, widths } => f(*amplitude, *center, *widths),
        PotentialSpec::Sum { members } => members.iter().for_each(|m| collect_bumps(&m.potential, f)),
        _ => {}
    }
}

/// Nyström matrix of v(x, i∂_p): entry (j, l) = ṽ(x, p_j − p_l)·w_lω_l/2π,
/// plus ṽ₀(x)·I for the transverse-uniform part.
pub fn potential_kernel(pot: &PotentialSpec, x: f64, grid: &MomentumGrid) -> Result<DMatrix<Complex64>> {
    if pot.is_three_dimensional() {
        return Err(Error::invalid("three-dimensional potential on a 2D grid"));
    }
    let k = grid.k();
    let p = grid.nodes();
    let avg = grid.averaging_weights();
    let n = p.len();
    let mut out = DMatrix::zeros(n, n);
    let mut uniform = ZERO;
    for j in 0..n {
        for l in 0..n {
            let t = fourier_y(pot, x, p[j] - p[l], k)?;
            if t.x_singular != ZERO {
                return Err(Error::UnsupportedEvaluation("δ(x) factor cannot be discretized".into()));
            }
            uniform = t.uniform;
            out[(j, l)] = t.smooth * avg[l];
        }
    }
    for j in 0..n {
        out[(j, j)] += uniform;
    }
    Ok(out)
}

/// H(x) of the potential on the grid.
pub fn effective_hamiltonian(pot: &PotentialSpec, x: f64, grid: &MomentumGrid) -> Result<HamiltonianBlock> {
    let v = potential_kernel(pot, x, grid)?;
    Ok(HamiltonianBlock::assemble(x, grid.omegas(), &v))
}

/// The transfer operator U(x_max, x_min) by fixed-step integration of
/// U′ = −iH(x)U. The window may cover only part of the potential, which
/// gives the operator of that slice.
pub fn evolve_transfer(
    pot: &PotentialSpec,
    grid: &MomentumGrid,
    cfg: &EvolutionConfig,
) -> Result<TransferOperator<MomentumGrid>> {
    let c = coupling_2d(pot, grid)?;
    evolve_coupling(grid, &c, cfg)
}

/// [`evolve_transfer`] plus a step-doubling check: when the largest entry
/// change exceeds `tolerance`, an [`AccuracyWarning`] is returned (and logged).
pub fn evolve_transfer_checked(
    pot: &PotentialSpec,
    grid: &MomentumGrid,
    cfg: &EvolutionConfig,
    tolerance: f64,
) -> Result<(TransferOperator<MomentumGrid>, Option<AccuracyWarning>)> {
    let c = coupling_2d(pot, grid)?;
    checked(grid, &c, cfg, tolerance, "evolve_transfer")
}

pub(crate) fn checked<G: ChannelGrid>(
    grid: &G,
    c: &Coupling,
    cfg: &EvolutionConfig,
    tolerance: f64,
    name: &str,
) -> Result<(TransferOperator<G>, Option<AccuracyWarning>)> {
    let fine = cfg.with_steps(cfg.steps * 2);
    let (coarse, fine) = par::join(|| evolve_coupling(grid, c, cfg), || evolve_coupling(grid, c, &fine));
    let (coarse, fine) = (coarse?, fine?);
    let delta = coarse.max_abs_diff(&fine);
    let warning = (delta > tolerance).then(|| AccuracyWarning { op: name.to_string(), steps: cfg.steps, delta });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok((coarse, warning))
}
