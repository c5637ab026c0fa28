use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use tmscat::closed_forms::{
    delta2d_f, delta2d_operator, slab_operator, spectral_singularity, threshold_gain_deg, SlabDefect, SlabParams,
    Unknown, DEFAULT_QUAD_POINTS,
};
use tmscat::evolution::{evolve_transfer, evolve_transfer_checked, EvolutionConfig, DEFAULT_HALVING_TOLERANCE};
use tmscat::io::{self, complex_json, flag_json, merge, to_pretty};
use tmscat::linalg::det2;
use tmscat::operator::{self, amplitude, compose, default_angles, solve_outgoing};
use tmscat::par;
use tmscat::potential::PotentialSpec;
use tmscat::spectral::{build_grid, MomentumGrid, NodeFamily, SpectralAmplitude};
use tmscat::three_d::{
    amplitude3d, delta3d_b_plus_one, delta3d_f, delta3d_operator, mu, scattering_length, solve_outgoing_3d, DiscGrid,
};

use crate::config::{parse_complex, positive, ConfigDoc};
use crate::{Common, Method, UnknownArg};

#[derive(Debug)]
pub enum Failure {
    /// Malformed flags or documents.
    Input(String),
    Numeric(tmscat::Error),
    Io(String),
    SelfTest(Vec<usize>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(tmscat::Error::Parse(_) | tmscat::Error::InvalidArgument(_)) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) | Failure::SelfTest(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Input(_) => "parse",
            Failure::Numeric(e) => e.kind(),
            Failure::Io(_) => "io",
            Failure::SelfTest(_) => "selftest",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "{m}"),
            Failure::Numeric(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "{m}"),
            Failure::SelfTest(ids) => write!(f, "acceptance criteria failed: {ids:?}"),
        }
    }
}

impl From<tmscat::Error> for Failure {
    fn from(e: tmscat::Error) -> Self {
        Failure::Numeric(e)
    }
}

pub struct Context {
    pub doc: ConfigDoc,
    pub common: Common,
}

impl Context {
    pub fn load(common: &Common) -> Result<Self, Failure> {
        let doc = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
                ConfigDoc::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
            }
            None => ConfigDoc::default(),
        };
        Ok(Self { doc, common: common.clone() })
    }

    fn k(&self) -> Result<f64, Failure> {
        self.common.k.or(self.doc.k.map(|n| n.0)).ok_or_else(|| Failure::Input("missing wavenumber k".into()))
    }

    fn knob(&self, name: &str, flag: Option<usize>, doc: Option<usize>, default: usize) -> Result<usize, Failure> {
        positive(name, flag.or(doc).unwrap_or(default)).map_err(Failure::Input)
    }

    fn n(&self, default: usize) -> Result<usize, Failure> {
        self.knob("n", self.common.n, self.doc.numerics.n, default)
    }

    fn steps(&self, default: usize) -> Result<usize, Failure> {
        self.knob("steps", self.common.steps, self.doc.numerics.steps, default)
    }

    fn quad_points(&self) -> Result<usize, Failure> {
        self.knob("quad_points", self.common.quad_points, self.doc.numerics.quad_points, DEFAULT_QUAD_POINTS)
    }

    fn theta_samples(&self, default: usize) -> Result<usize, Failure> {
        self.knob("theta_samples", self.common.theta_samples, self.doc.numerics.theta_samples, default)
    }

    fn prefix(&self, command: &str) -> PathBuf {
        self.common
            .output
            .clone()
            .or_else(|| self.doc.output.clone())
            .unwrap_or_else(|| PathBuf::from(format!("tmscat-{command}")))
    }

    fn potential(&self) -> Option<&PotentialSpec> {
        self.doc.potential.as_ref()
    }
}

fn complex_flag(name: &str, flag: Option<&str>) -> Result<Option<Complex64>, Failure> {
    flag.map(|s| parse_complex(s).map_err(|e| Failure::Input(format!("--{name}: {e}")))).transpose()
}

fn missing(what: &str) -> Failure {
    Failure::Input(format!("missing {what} (flag or config document)"))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(prefix: &Path, suffix: &str, content: &str) -> Result<PathBuf, Failure> {
    let path = with_suffix(prefix, suffix);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(&path, content).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn singular(flag: &operator::SingularityFlag, what: &str) -> Result<(), Failure> {
    if flag.is_singular() {
        return Err(Failure::Numeric(tmscat::Error::SpectralSingularity(format!(
            "{what}: the outgoing-wave system is singular"
        ))));
    }
    Ok(())
}

pub fn delta2d(ctx: &Context, strength: Option<&str>) -> Result<(), Failure> {
    let z = match (complex_flag("strength", strength)?, ctx.potential()) {
        (Some(z), _) => z,
        (None, Some(PotentialSpec::Delta2d { strength })) => *strength,
        _ => return Err(missing("delta strength")),
    };
    let k = ctx.common.k.or(ctx.doc.k.map(|n| n.0)).unwrap_or(1.0);
    let n = ctx.n(16)?;
    let exact = delta2d_f(z)?;
    let grid = build_grid(k, n)?;
    let result = operator::scatter(&delta2d_operator(z, &grid), &default_angles(ctx.theta_samples(360)?))?;
    singular(&result.singularity, "delta2d")?;
    let worst = result.f_samples.iter().map(|(_, f)| (f - exact).norm()).fold(0.0, f64::max);
    let prefix = ctx.prefix("delta2d");
    let extra = json!({
        "command": "delta2d",
        "strength": complex_json(z),
        "f_closed_form": complex_json(exact),
        "max_abs_diff_closed_form": worst,
    });
    announce(&[
        write(&prefix, ".csv", &io::amplitude_csv(&result.f_samples))?,
        write(&prefix, "_t.csv", &io::t_table_csv(grid.nodes(), &result.t_plus, &result.t_minus))?,
        write(&prefix, ".meta.json", &io::scatter_metadata(k, n, &result, extra))?,
    ]);
    Ok(())
}

pub fn delta3d(
    ctx: &Context,
    strength: Option<&str>,
    phi_samples: Option<usize>,
    azimuthal: Option<usize>,
) -> Result<(), Failure> {
    let z = match (complex_flag("strength", strength)?, ctx.potential()) {
        (Some(z), _) => z,
        (None, Some(PotentialSpec::Delta3d { strength })) => *strength,
        _ => return Err(missing("delta strength")),
    };
    let k = ctx.k()?;
    let rings = ctx.n(4)?;
    let az = ctx.knob("azimuthal", azimuthal, ctx.doc.numerics.azimuthal, 8)?;
    let n_phi = ctx.knob("phi_samples", phi_samples, ctx.doc.numerics.phi_samples, 16)?;
    let n_theta = ctx.theta_samples(36)?;
    let exact = delta3d_f(z, k)?;
    let grid = DiscGrid::new(k, rings, az)?;
    let out = solve_outgoing_3d(&delta3d_operator(z, &grid));
    singular(&out.flag, "delta3d")?;
    let mut rows = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = (i as f64 + 1.0 / 3.0) * PI / n_theta as f64;
        for m in 0..n_phi {
            let phi = 2.0 * PI * m as f64 / n_phi as f64;
            rows.push((theta, phi, amplitude3d(&out.t_plus, &out.t_minus, &grid, theta, phi)?));
        }
    }
    let worst = rows.iter().map(|r| (r.2 - exact).norm()).fold(0.0, f64::max);
    let meta = json!({
        "command": "delta3d",
        "k": k,
        "radial": rings,
        "azimuthal": az,
        "strength": complex_json(z),
        "f_closed_form": complex_json(exact),
        "b_plus_one": complex_json(delta3d_b_plus_one(z, k)),
        "scattering_length": complex_json(scattering_length(z)),
        "mu": mu(z),
        "t_plus_delta": complex_json(out.t_plus.delta_coeff),
        "t_minus_delta": complex_json(out.t_minus.delta_coeff),
        "singularity_flag": flag_json(&out.flag),
        "max_abs_diff_closed_form": worst,
    });
    let prefix = ctx.prefix("delta3d");
    announce(&[write(&prefix, ".csv", &io::amplitude3d_csv(&rows))?, write(&prefix, ".meta.json", &to_pretty(&meta))?]);
    Ok(())
}

fn slab_inputs(
    ctx: &Context,
    epsilon: Option<&str>,
    thickness: Option<f64>,
    start: Option<f64>,
) -> Result<(Complex64, f64, f64), Failure> {
    let (doc_eps, doc_l, doc_start) = match ctx.potential() {
        Some(PotentialSpec::Slab { epsilon, thickness, start }) => (Some(*epsilon), Some(*thickness), Some(*start)),
        Some(PotentialSpec::SlabWithDefect { epsilon, thickness, .. }) => (Some(*epsilon), Some(*thickness), None),
        _ => (None, ctx.doc.thickness.map(|n| n.0), None),
    };
    let eps = complex_flag("epsilon", epsilon)?.or(doc_eps).ok_or_else(|| missing("permittivity epsilon"))?;
    let l = thickness.or(doc_l).ok_or_else(|| missing("slab thickness"))?;
    Ok((eps, l, start.or(doc_start).unwrap_or(0.0)))
}

pub fn slab(
    ctx: &Context,
    epsilon: Option<&str>,
    thickness: Option<f64>,
    start: Option<f64>,
    method: Option<Method>,
) -> Result<(), Failure> {
    let (eps, l, a) = slab_inputs(ctx, epsilon, thickness, start)?;
    let k = ctx.k()?;
    let n = ctx.n(16)?;
    let method = match (method, ctx.doc.method.as_deref()) {
        (Some(m), _) => m,
        (None, None | Some("closed")) => Method::Closed,
        (None, Some("evolve")) => Method::Evolve,
        (None, Some(other)) => return Err(Failure::Input(format!("unknown method {other:?}"))),
    };
    let sp = SlabParams::with_start(eps, l, k, a)?;
    let grid = build_grid(k, n)?;
    let closed = slab_operator(&sp, &grid);
    let (m, steps) = match method {
        Method::Closed => (closed.clone(), None),
        Method::Evolve => {
            let steps = ctx.steps(4000)?;
            let pot = PotentialSpec::Slab { epsilon: eps, thickness: l, start: a };
            (evolve_transfer(&pot, &grid, &EvolutionConfig::new(a, a + l, steps)?)?, Some(steps))
        }
    };
    let mut rows: Vec<(f64, _)> = grid.nodes().iter().copied().zip(m.mult_nodes().iter().copied()).collect();
    if !grid.nodes().contains(&0.0) {
        rows.push((0.0, m.mult_at_zero()));
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let det_dev = rows.iter().map(|(_, mm)| (det2(mm) - 1.0).norm()).fold(0.0, f64::max);
    let meta = json!({
        "command": "slab",
        "k": k,
        "N": n,
        "method": match method { Method::Closed => "closed", Method::Evolve => "evolve" },
        "steps": steps,
        "epsilon": complex_json(eps),
        "thickness": l,
        "start": a,
        "max_abs_det_minus_one": det_dev,
        "max_abs_diff_closed_form": m.max_abs_diff(&closed),
    });
    let prefix = ctx.prefix("slab");
    announce(&[write(&prefix, ".csv", &io::transfer_csv(&rows))?, write(&prefix, ".meta.json", &to_pretty(&meta))?]);
    Ok(())
}

pub fn slab_defect(
    ctx: &Context,
    epsilon: Option<&str>,
    thickness: Option<f64>,
    strength: Option<&str>,
) -> Result<(), Failure> {
    let (eps, l, _) = slab_inputs(ctx, epsilon, thickness, None)?;
    let z = match (complex_flag("strength", strength)?, ctx.potential()) {
        (Some(z), _) => z,
        (None, Some(PotentialSpec::SlabWithDefect { strength, .. })) => *strength,
        _ => return Err(missing("defect strength")),
    };
    let k = ctx.k()?;
    let n = ctx.n(32)?;
    let sp = SlabParams::new(eps, l, k)?;
    let direct = SlabDefect::new(&sp, z, ctx.quad_points()?)?;
    let grid = MomentumGrid::new(k, n, NodeFamily::AngularGaussLegendre)?;
    let ts = grid.nodes().iter().map(|p| direct.t_at(*p)).collect::<Result<Vec<_>, _>>()?;
    let t_plus =
        SpectralAmplitude { delta_coeff: direct.m22_k.inv() - 1.0, smooth: ts.iter().map(|t| t.smooth_plus).collect() };
    let t_minus =
        SpectralAmplitude { delta_coeff: direct.x_k - 1.0, smooth: ts.iter().map(|t| t.smooth_minus).collect() };
    let f = amplitude(&t_plus, &t_minus, &grid, &default_angles(ctx.theta_samples(360)?))?;
    let pipeline = solve_outgoing(&compose(&slab_operator(&sp, &grid), &delta2d_operator(z, &grid))?);
    let agreement = pipeline.t_plus.max_abs_diff(&t_plus).max(pipeline.t_minus.max_abs_diff(&t_minus));
    let meta = json!({
        "command": "slab-defect",
        "k": k,
        "N": n,
        "epsilon": complex_json(eps),
        "thickness": l,
        "strength": complex_json(z),
        "x_k": complex_json(direct.x_k),
        "y_k": complex_json(direct.y_k),
        "m22_k": complex_json(direct.m22_k),
        "b_tilde_plus_one": complex_json(direct.b_tilde_plus_one),
        "identity_residual": direct.identity_residual,
        "t_plus_delta": complex_json(t_plus.delta_coeff),
        "t_minus_delta": complex_json(t_minus.delta_coeff),
        "pipeline_max_abs_diff": agreement,
        "singularity_flag": flag_json(&pipeline.flag),
    });
    let prefix = ctx.prefix("slab-defect");
    announce(&[
        write(&prefix, ".csv", &io::amplitude_csv(&f))?,
        write(&prefix, "_t.csv", &io::t_table_csv(grid.nodes(), &t_plus, &t_minus))?,
        write(&prefix, ".meta.json", &to_pretty(&meta))?,
    ]);
    Ok(())
}

pub fn threshold_gain(ctx: &Context, eta: Option<f64>, thickness: Option<f64>) -> Result<(), Failure> {
    let eta = eta.or(ctx.doc.eta.map(|n| n.0)).ok_or_else(|| missing("refractive index eta"))?;
    let l = thickness.or(ctx.doc.thickness.map(|n| n.0)).unwrap_or(1.0);
    let samples = ctx.theta_samples(181)?;
    if samples < 2 {
        return Err(Failure::Input("theta_samples must be at least 2".into()));
    }
    let last = (samples - 1) as f64;
    let rows = par::map_indexed(samples, |i| {
        let deg = -90.0 + 180.0 * i as f64 / last;
        threshold_gain_deg(eta, deg, l).map(|g| (deg, g * l))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let (min_at, min) = rows.iter().copied().fold((f64::NAN, f64::INFINITY), |a, r| if r.1 < a.1 { r } else { a });
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let meta = json!({
        "command": "threshold-gain",
        "eta": eta,
        "thickness": l,
        "theta_samples": samples,
        "g_times_L_max": max,
        "g_times_L_min": min,
        "theta_deg_at_min": min_at,
    });
    let prefix = ctx.prefix("threshold-gain");
    announce(&[write(&prefix, ".csv", &io::gain_csv(&rows))?, write(&prefix, ".meta.json", &to_pretty(&meta))?]);
    Ok(())
}

pub fn scatter(ctx: &Context, tolerance: Option<f64>) -> Result<(), Failure> {
    let pot = ctx.potential().ok_or_else(|| missing("[potential] table"))?;
    let k = ctx.k()?;
    let n = ctx.n(16)?;
    let steps = ctx.steps(400)?;
    let tol = tolerance.or(ctx.doc.numerics.tolerance.map(|t| t.0)).unwrap_or(DEFAULT_HALVING_TOLERANCE);
    let grid = build_grid(k, n)?;
    let cfg = EvolutionConfig::auto(pot, steps)?;
    let (m, warning) = evolve_transfer_checked(pot, &grid, &cfg, tol)?;
    if let Some(w) = &warning {
        eprintln!("{w}");
    }
    let result = operator::scatter(&m, &default_angles(ctx.theta_samples(360)?))?;
    singular(&result.singularity, "scatter")?;
    let extra = json!({
        "command": "scatter",
        "steps": steps,
        "window": [cfg.x_min, cfg.x_max],
        "accuracy_warning": warning.as_ref().map(|w| json!({"op": w.op, "steps": w.steps, "delta": w.delta})),
    });
    let prefix = ctx.prefix("scatter");
    announce(&[
        write(&prefix, ".csv", &io::amplitude_csv(&result.f_samples))?,
        write(&prefix, "_t.csv", &io::t_table_csv(grid.nodes(), &result.t_plus, &result.t_minus))?,
        write(&prefix, ".meta.json", &io::scatter_metadata(k, n, &result, extra))?,
    ]);
    Ok(())
}

pub struct SingularityArgs {
    pub epsilon: Option<String>,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
    pub thickness: Option<f64>,
    pub unknown: Option<UnknownArg>,
    pub guess: Option<String>,
}

pub fn singularity(ctx: &Context, args: SingularityArgs) -> Result<(), Failure> {
    let eta = args.eta.or(ctx.doc.eta.map(|n| n.0));
    let kappa = args.kappa.or(ctx.doc.kappa.map(|n| n.0));
    let eps = match (complex_flag("epsilon", args.epsilon.as_deref())?, eta) {
        (Some(e), _) => e,
        (None, Some(eta)) => Complex64::new(eta, kappa.unwrap_or(0.0)).powi(2),
        (None, None) => slab_inputs(ctx, None, Some(1.0), None)?.0,
    };
    let l = match args.thickness {
        Some(l) => l,
        None => slab_inputs(ctx, Some("1"), None, None)
            .map(|s| s.1)
            .or_else(|_| ctx.doc.thickness.map(|n| n.0).ok_or_else(|| missing("slab thickness")))?,
    };
    let unknown = match (args.unknown, ctx.doc.unknown.as_deref()) {
        (Some(UnknownArg::K), _) | (None, None | Some("k")) => Unknown::K,
        (Some(UnknownArg::Omega), _) | (None, Some("omega")) => Unknown::Omega,
        (None, Some(other)) => return Err(Failure::Input(format!("unknown must be k or omega, got {other:?}"))),
    };
    let k_given = ctx.common.k.or(ctx.doc.k.map(|n| n.0));
    let guess = match (complex_flag("guess", args.guess.as_deref())?, ctx.doc.guess, k_given) {
        (Some(g), _, _) => g,
        (None, Some(g), _) => g.0,
        (None, None, Some(k)) => Complex64::new(k, 0.0),
        _ => return Err(missing("root guess (or k)")),
    };
    let k = match unknown {
        Unknown::Omega => k_given.ok_or_else(|| missing("wavenumber k"))?,
        Unknown::K => k_given.unwrap_or(guess.re.abs().max(f64::MIN_POSITIVE)),
    };
    let sp = SlabParams::new(eps, l, k)?;
    let report = spectral_singularity(&sp, unknown, guess)?;
    let mut record = io::singularity_record(&report);
    merge(
        &mut record,
        json!({
            "command": "singularity",
            "unknown": match unknown { Unknown::K => "k", Unknown::Omega => "omega" },
            "epsilon": complex_json(eps),
            "thickness": l,
            "k": k,
            "guess": complex_json(guess),
        }),
    );
    let text = to_pretty(&record);
    print!("{text}");
    announce(&[write(&ctx.prefix("singularity"), ".json", &text)?]);
    Ok(())
}

pub fn selftest(ctx: &Context) -> Result<(), Failure> {
    let outcomes = tmscat::acceptance::run_all();
    for o in &outcomes {
        println!("{}", o.line());
    }
    if ctx.common.output.is_some() || ctx.doc.output.is_some() {
        let v: Value = serde_json::to_value(&outcomes).unwrap_or(Value::Null);
        announce(&[write(&ctx.prefix("selftest"), ".json", &to_pretty(&v))?]);
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::SelfTest(failed))
    }
}
