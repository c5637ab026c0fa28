//! Transfer-matrix scattering in two and three dimensions.
//!
//! The transfer matrix of a potential is an operator acting on momentum-space
//! coefficient functions of the asymptotic plane waves. It is the
//! x-evolution operator of a non-Hermitian effective Hamiltonian, so it
//! composes like its one-dimensional counterpart: slicing a potential along
//! the scattering axis and multiplying the slices' transfer matrices gives
//! the transfer matrix of the whole.
//!
//! Modules:
//!
//! * [`spectral`] – momentum grids, quadrature, interpolation, amplitudes.
//! * [`potential`] – potential descriptions and their Fourier transforms.
//! * [`evolution`] – numeric transfer operators by x-evolution.
//! * [`operator`] – the transfer-operator algebra and amplitude extraction.
//! * [`closed_forms`] – exactly solvable systems (delta, slab, slab with defect).
//! * [`three_d`] – the three-dimensional formulation.
//! * [`oracle`] – independent cross-checks (1D transfer matrices, Born terms).
//! * [`acceptance`] – the acceptance criteria, shared by the test suite and
//!   the `selftest` command.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod closed_forms;
pub mod error;
pub mod evolution;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod par;
pub mod potential;
pub mod quadrature;
pub mod spectral;
pub mod three_d;

pub use error::{Error, Result};
pub use num_complex::Complex64;
