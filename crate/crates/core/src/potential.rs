//! Potential descriptions v(x, y) (and v(x, y, z) for the 3D variants) with
//! closed-form Fourier transforms along the transverse directions.
//!
//! Slabs are optical layers: inside a slab of relative permittivity ε the
//! potential is k²(1 − ε), so evaluating them needs the wavenumber.
//!
//! Documents use a `kind` discriminator, numbers as decimal strings and
//! complex numbers as `{ re, im }` tables:
//!
//! ```toml
//! kind = "slab_with_defect"
//! epsilon = { re = "2", im = "0.01" }
//! thickness = "1"
//! strength = { re = "1", im = "0" }
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gaussian tails are cut this many standard deviations from the center.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// 𝔷 δ(x) δ(y).
    Delta2d {
        #[serde(with = "complex_doc")]
        strength: Complex64,
    },
    /// y-independent layer of permittivity ε on `start ≤ x ≤ start + thickness`.
    Slab {
        #[serde(with = "complex_doc")]
        epsilon: Complex64,
        #[serde(with = "decimal")]
        thickness: f64,
        #[serde(with = "decimal", default)]
        start: f64,
    },
    /// Slab on 0 ≤ x ≤ L with a line defect 𝔷 δ(x) δ(y) on its left face.
    SlabWithDefect {
        #[serde(with = "complex_doc")]
        epsilon: Complex64,
        #[serde(with = "decimal")]
        thickness: f64,
        #[serde(with = "complex_doc")]
        strength: Complex64,
    },
    /// amplitude · exp(−(x−x₀)²/2σx² − (y−y₀)²/2σy²).
    GaussianBump {
        #[serde(with = "complex_doc")]
        amplitude: Complex64,
        #[serde(with = "decimal_array")]
        center: [f64; 2],
        #[serde(with = "decimal_array")]
        widths: [f64; 2],
    },
    /// amplitude · exp(−Σ (r_i − c_i)²/2σ_i²) in 3D, with z the scattering axis.
    Gaussian3d {
        #[serde(with = "complex_doc")]
        amplitude: Complex64,
        #[serde(with = "decimal_array")]
        center: [f64; 3],
        #[serde(with = "decimal_array")]
        widths: [f64; 3],
    },
    /// Members with declared supports along the scattering axis that overlap at
    /// most at endpoints.
    Sum { members: Vec<SumMember> },
    /// 𝔷 δ(x) δ(y) δ(z).
    Delta3d {
        #[serde(with = "complex_doc")]
        strength: Complex64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumMember {
    #[serde(with = "decimal_array")]
    pub support: [f64; 2],
    pub potential: PotentialSpec,
}

/// The y-Fourier transform ṽ(x, q) = ∫ dy e^{−iqy} v(x, y), split by kind.
///
/// The full transform is `smooth + uniform · 2πδ(q) + δ(x) · x_singular`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YTransform {
    pub smooth: Complex64,
    /// Value of the y-independent part at x (coefficient of 2πδ(q)).
    pub uniform: Complex64,
    /// Weight of a δ(x) factor (only nonzero at x = 0).
    pub x_singular: Complex64,
}

impl YTransform {
    const NONE: Self = Self { smooth: ZERO, uniform: ZERO, x_singular: ZERO };

    /// The sampled value; fails when a symbolic δ factor is present.
    pub fn sampled(&self) -> Result<Complex64> {
        if self.uniform != ZERO {
            return Err(Error::UnsupportedEvaluation("y-independent term carries 2πδ(q) and cannot be sampled".into()));
        }
        if self.x_singular != ZERO {
            return Err(Error::UnsupportedEvaluation("δ(x) factor cannot be sampled".into()));
        }
        Ok(self.smooth)
    }

    fn add(self, o: Self) -> Self {
        Self {
            smooth: self.smooth + o.smooth,
            uniform: self.uniform + o.uniform,
            x_singular: self.x_singular + o.x_singular,
        }
    }
}

/// ṽ(x, q) for the 2D variants; `k` is needed for the optical mapping of slabs.
pub fn fourier_y(pot: &PotentialSpec, x: f64, q: f64, k: f64) -> Result<YTransform> {
    use PotentialSpec::*;
    Ok(match pot {
        Delta2d { strength } => YTransform { x_singular: if x == 0.0 { *strength } else { ZERO }, ..YTransform::NONE },
        Slab { epsilon, thickness, start } => YTransform {
            uniform: if x >= *start && x <= start + thickness { optical(*epsilon, k) } else { ZERO },
            ..YTransform::NONE
        },
        SlabWithDefect { epsilon, thickness, strength } => fourier_y(&Delta2d { strength: *strength }, x, q, k)?
            .add(fourier_y(&Slab { epsilon: *epsilon, thickness: *thickness, start: 0.0 }, x, q, k)?),
        GaussianBump { amplitude, center, widths } => YTransform {
            smooth: amplitude * gaussian_profile(x, center[0], widths[0]) * gaussian_ft(q, center[1], widths[1]),
            ..YTransform::NONE
        },
        Sum { members } => {
            let mut acc = YTransform::NONE;
            for m in members {
                acc = acc.add(fourier_y(&m.potential, x, q, k)?);
            }
            acc
        }
        Gaussian3d { .. } | Delta3d { .. } => {
            return Err(Error::invalid("fourier_y: three-dimensional potential"));
        }
    })
}

/// k²(1 − ε).
pub fn optical(epsilon: Complex64, k: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - epsilon) * (k * k)
}

/// exp(−(x − c)²/2σ²).
pub fn gaussian_profile(x: f64, center: f64, sigma: f64) -> f64 {
    let d = (x - center) / sigma;
    (-0.5 * d * d).exp()
}

/// ∫ dy e^{−iqy} exp(−(y − c)²/2σ²) = √(2π) σ exp(−σ²q²/2 − iqc).
pub fn gaussian_ft(q: f64, center: f64, sigma: f64) -> Complex64 {
    let mag = (2.0 * PI).sqrt() * sigma * (-0.5 * sigma * sigma * q * q).exp();
    Complex64::from_polar(mag, -q * center)
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        use PotentialSpec::*;
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be finite")))
            }
        };
        match self {
            Delta2d { strength } | Delta3d { strength } => finite(strength.norm(), "strength"),
            Slab { epsilon, thickness, start } => {
                finite(epsilon.norm(), "epsilon")?;
                finite(*start, "start")?;
                positive(*thickness, "thickness")
            }
            SlabWithDefect { epsilon, thickness, strength } => {
                finite(epsilon.norm(), "epsilon")?;
                finite(strength.norm(), "strength")?;
                positive(*thickness, "thickness")
            }
            GaussianBump { amplitude, center, widths } => {
                finite(amplitude.norm(), "amplitude")?;
                center.iter().try_for_each(|c| finite(*c, "center"))?;
                widths.iter().try_for_each(|w| positive(*w, "width"))
            }
            Gaussian3d { amplitude, center, widths } => {
                finite(amplitude.norm(), "amplitude")?;
                center.iter().try_for_each(|c| finite(*c, "center"))?;
                widths.iter().try_for_each(|w| positive(*w, "width"))
            }
            Sum { members } => {
                if members.is_empty() {
                    return Err(Error::invalid("sum without members"));
                }
                for m in members {
                    m.potential.validate()?;
                    if !(m.support[0] <= m.support[1]) {
                        return Err(Error::invalid(format!("bad support interval {:?}", m.support)));
                    }
                    if let Some((lo, hi)) = m.potential.support_window() {
                        if lo < m.support[0] - 1e-12 || hi > m.support[1] + 1e-12 {
                            return Err(Error::invalid(format!(
                                "member support [{lo}, {hi}] exceeds declared {:?}",
                                m.support
                            )));
                        }
                    }
                }
                let mut spans: Vec<[f64; 2]> = members.iter().map(|m| m.support).collect();
                spans.sort_by(|a, b| a[0].total_cmp(&b[0]));
                for w in spans.windows(2) {
                    if w[1][0] < w[0][1] {
                        return Err(Error::invalid(format!("member supports {:?} and {:?} overlap", w[0], w[1])));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_three_dimensional(&self) -> bool {
        match self {
            PotentialSpec::Gaussian3d { .. } | PotentialSpec::Delta3d { .. } => true,
            PotentialSpec::Sum { members } => members.iter().any(|m| m.potential.is_three_dimensional()),
            _ => false,
        }
    }

    /// Contains a δ factor along the scattering axis.
    pub fn is_axis_singular(&self) -> bool {
        match self {
            PotentialSpec::Delta2d { .. } | PotentialSpec::Delta3d { .. } | PotentialSpec::SlabWithDefect { .. } => {
                true
            }
            PotentialSpec::Sum { members } => members.iter().any(|m| m.potential.is_axis_singular()),
            _ => false,
        }
    }

    /// Independent of the transverse coordinates (a stack of slabs).
    pub fn is_transverse_uniform(&self) -> bool {
        match self {
            PotentialSpec::Slab { .. } => true,
            PotentialSpec::Sum { members } => members.iter().all(|m| m.potential.is_transverse_uniform()),
            _ => false,
        }
    }

    /// Interval along the scattering axis outside which the potential is
    /// (numerically) zero. Gaussians are cut at ±8σ.
    pub fn support_window(&self) -> Option<(f64, f64)> {
        use PotentialSpec::*;
        match self {
            Delta2d { .. } | Delta3d { .. } => Some((0.0, 0.0)),
            Slab { thickness, start, .. } => Some((*start, start + thickness)),
            SlabWithDefect { thickness, .. } => Some((0.0, *thickness)),
            GaussianBump { center, widths, .. } => {
                let r = GAUSSIAN_SUPPORT_SIGMAS * widths[0];
                Some((center[0] - r, center[0] + r))
            }
            Gaussian3d { center, widths, .. } => {
                let r = GAUSSIAN_SUPPORT_SIGMAS * widths[2];
                Some((center[2] - r, center[2] + r))
            }
            Sum { members } => members.iter().filter_map(|m| m.potential.support_window()).fold(None, |acc, (a, b)| {
                Some(match acc {
                    None => (a, b),
                    Some((lo, hi)) => (f64::min(lo, a), f64::max(hi, b)),
                })
            }),
        }
    }

    /// Points along the scattering axis where the potential jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_layers(&mut |start, end, _| {
            out.push(start);
            out.push(end);
        });
        out
    }

    /// Visits every slab as (start, end, ε).
    pub fn collect_layers(&self, f: &mut dyn FnMut(f64, f64, Complex64)) {
        match self {
            PotentialSpec::Slab { epsilon, thickness, start } => f(*start, start + thickness, *epsilon),
            PotentialSpec::SlabWithDefect { epsilon, thickness, .. } => f(0.0, *thickness, *epsilon),
            PotentialSpec::Sum { members } => members.iter().for_each(|m| m.potential.collect_layers(f)),
            _ => {}
        }
    }

    /// Multiplies the potential by `c`. For slabs this scales k²(1 − ε).
    pub fn scaled(&self, c: Complex64) -> Self {
        use PotentialSpec::*;
        let one = Complex64::new(1.0, 0.0);
        match self {
            Delta2d { strength } => Delta2d { strength: strength * c },
            Delta3d { strength } => Delta3d { strength: strength * c },
            Slab { epsilon, thickness, start } => {
                Slab { epsilon: one - (one - epsilon) * c, thickness: *thickness, start: *start }
            }
            SlabWithDefect { epsilon, thickness, strength } => {
                SlabWithDefect { epsilon: one - (one - epsilon) * c, thickness: *thickness, strength: strength * c }
            }
            GaussianBump { amplitude, center, widths } => {
                GaussianBump { amplitude: amplitude * c, center: *center, widths: *widths }
            }
            Gaussian3d { amplitude, center, widths } => {
                Gaussian3d { amplitude: amplitude * c, center: *center, widths: *widths }
            }
            Sum { members } => Sum {
                members: members
                    .iter()
                    .map(|m| SumMember { support: m.support, potential: m.potential.scaled(c) })
                    .collect(),
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be positive, got {v}")))
    }
}

/// Floats as decimal strings; plain numbers are accepted on input.
pub mod decimal {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Text(String),
        Float(f64),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Text(t) => t.trim().parse::<f64>().map_err(|e| de::Error::custom(format!("bad decimal {t:?}: {e}"))),
            Repr::Float(f) => Ok(f),
            Repr::Int(i) => Ok(i as f64),
        }
    }

    pub(crate) fn parse_value<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        deserialize(d)
    }
}

pub mod decimal_array {
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    struct Wrapped(#[serde(deserialize_with = "super::decimal::parse_value")] f64);

    pub fn serialize<S: Serializer, const N: usize>(v: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(N))?;
        for x in v {
            seq.serialize_element(&format!("{x}"))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[f64; N], D::Error> {
        let v: Vec<Wrapped> = Vec::deserialize(d)?;
        let len = v.len();
        let arr: Vec<f64> = v.into_iter().map(|w| w.0).collect();
        arr.try_into().map_err(|_| de::Error::custom(format!("expected {N} numbers, got {len}")))
    }
}

/// Complex numbers as `{ re = "…", im = "…" }`.
pub mod complex_doc {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Doc {
        #[serde(with = "super::decimal")]
        re: f64,
        #[serde(with = "super::decimal", default)]
        im: f64,
    }

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Doc { re: v.re, im: v.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let doc = Doc::deserialize(d)?;
        Ok(Complex64::new(doc.re, doc.im))
    }
}
