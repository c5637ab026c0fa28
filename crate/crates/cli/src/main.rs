//! `tmscat`: scattering computations from the command line.
//!
//! Exit status: 0 on success, 1 on I/O failures or a failing self-test,
//! 2 for malformed input, 3 for numeric failures (spectral singularities,
//! missing roots, resonances). Failures print one JSON record on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::commands::Failure;

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run document; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output prefix; files are PREFIX.csv, PREFIX_t.csv and PREFIX.meta.json.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Wavenumber.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Grid size (radial rings in 3D).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// RK4 steps for numeric evolution.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Quadrature points for the slab-defect Y(k) integral.
    #[arg(long, global = true)]
    pub quad_points: Option<usize>,
    /// Number of output angles.
    #[arg(long, global = true)]
    pub theta_samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point scatterer 𝔷δ(x)δ(y): amplitude, T± table and closed-form check.
    Delta2d {
        #[arg(long, allow_hyphen_values = true)]
        strength: Option<String>,
    },
    /// Point scatterer 𝔷δ(x)δ(y)δ(z): amplitude, scattering length and μ.
    Delta3d {
        #[arg(long, allow_hyphen_values = true)]
        strength: Option<String>,
        #[arg(long)]
        phi_samples: Option<usize>,
        /// Azimuthal nodes per ring.
        #[arg(long)]
        azimuthal: Option<usize>,
    },
    /// Transfer-matrix entries of a homogeneous slab versus p.
    Slab {
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<String>,
        #[arg(long)]
        thickness: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Slab with a line defect on its left face: T± and f(θ).
    SlabDefect {
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<String>,
        #[arg(long)]
        thickness: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        strength: Option<String>,
    },
    /// Threshold gain of a slab laser versus incidence angle, θ ∈ [−90°, 90°].
    ThresholdGain {
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        thickness: Option<f64>,
    },
    /// Numeric pipeline on the potential of the config document.
    Scatter {
        /// Step-doubling tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Complex root of Z for a slab.
    Singularity {
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[arg(long)]
        thickness: Option<f64>,
        #[arg(long, value_enum)]
        unknown: Option<UnknownArg>,
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<String>,
    },
    /// Runs the acceptance suite.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Evolve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnknownArg {
    K,
    Omega,
}

#[derive(Parser, Debug)]
#[command(name = "tmscat", version, about = "Transfer-matrix scattering in two and three dimensions")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TMSCAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Input(format!("TMSCAT_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| dispatch(cli.command, &cli.common));
    match result {
        Ok(code) => code,
        Err(f) => {
            let record = json!({"error": {"kind": f.kind(), "message": f.to_string()}});
            eprintln!("{record}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn dispatch(command: Command, common: &Common) -> Result<ExitCode, Failure> {
    use commands::*;
    let ctx = Context::load(common)?;
    match command {
        Command::Delta2d { strength } => delta2d(&ctx, strength.as_deref()),
        Command::Delta3d { strength, phi_samples, azimuthal } => {
            delta3d(&ctx, strength.as_deref(), phi_samples, azimuthal)
        }
        Command::Slab { epsilon, thickness, start, method } => slab(&ctx, epsilon.as_deref(), thickness, start, method),
        Command::SlabDefect { epsilon, thickness, strength } => {
            slab_defect(&ctx, epsilon.as_deref(), thickness, strength.as_deref())
        }
        Command::ThresholdGain { eta, thickness } => threshold_gain(&ctx, eta, thickness),
        Command::Scatter { tolerance } => scatter(&ctx, tolerance),
        Command::Singularity { epsilon, eta, kappa, thickness, unknown, guess } => {
            singularity(&ctx, SingularityArgs { epsilon, eta, kappa, thickness, unknown, guess })
        }
        Command::Selftest => selftest(&ctx),
    }?;
    Ok(ExitCode::SUCCESS)
}
