use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported evaluation: {0}")]
    UnsupportedEvaluation(String),

    /// A real-wavenumber divergence of the scattering amplitude.
    #[error("spectral singularity: {0}")]
    SpectralSingularity(String),

    /// A pole of the integrand sits on (or next to) the integration path.
    #[error("near resonance: pole close to omega = {omega}")]
    NearResonance { omega: Complex64 },

    #[error("no root found after {iterations} iterations (residual {residual:e})")]
    NoRoot { iterations: usize, residual: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("resource limit: {channels} channels exceeds the bound of {limit}")]
    ResourceLimit { channels: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable tag, used in structured diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UnsupportedEvaluation(_) => "unsupported-evaluation",
            Error::SpectralSingularity(_) => "spectral-singularity",
            Error::NearResonance { .. } => "near-resonance",
            Error::NoRoot { .. } => "no-root",
            Error::Divergence(_) => "divergence",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::Parse(_) => "parse",
        }
    }
}
