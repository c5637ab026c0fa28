//! The run configuration document and its merge with command-line flags.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;
use tmscat::potential::PotentialSpec;

/// A real number written as a decimal string or a plain TOML number.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
pub struct Num(#[serde(with = "tmscat::potential::decimal")] pub f64);

/// A complex number written as `{ re = "..", im = ".." }`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
pub struct Cx(#[serde(with = "tmscat::potential::complex_doc")] pub Complex64);

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub n: Option<usize>,
    pub steps: Option<usize>,
    pub quad_points: Option<usize>,
    pub theta_samples: Option<usize>,
    pub phi_samples: Option<usize>,
    pub azimuthal: Option<usize>,
    pub tolerance: Option<Num>,
}

/// Everything a config document may hold. Keys a command does not use are ignored by it.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub k: Option<Num>,
    pub output: Option<PathBuf>,
    pub eta: Option<Num>,
    pub kappa: Option<Num>,
    pub thickness: Option<Num>,
    pub unknown: Option<String>,
    pub guess: Option<Cx>,
    pub method: Option<String>,
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub numerics: Numerics,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        if let Some(p) = &doc.potential {
            p.validate().map_err(|e| e.to_string())?;
        }
        Ok(doc)
    }
}

/// Parses `2`, `-0.5`, `4i`, `2-3i` or `2,-3`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim();
    if let Some((re, im)) = t.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|e| format!("bad real part {re:?}: {e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part {im:?}: {e}"))?;
        return Ok(Complex64::new(re, im));
    }
    t.parse::<Complex64>().map_err(|_| format!("bad complex number {s:?}"))
}

pub fn positive(name: &str, v: usize) -> Result<usize, String> {
    if v == 0 {
        Err(format!("{name} must be positive"))
    } else {
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("4i").unwrap(), Complex64::new(0.0, 4.0));
        assert_eq!(parse_complex("2-3i").unwrap(), Complex64::new(2.0, -3.0));
        assert_eq!(parse_complex("2, -3").unwrap(), Complex64::new(2.0, -3.0));
        assert_eq!(parse_complex("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert!(parse_complex("two").is_err());
    }

    #[test]
    fn documents() {
        let doc = ConfigDoc::parse(
            r#"
k = "2.0"
eta = 1.5
[potential]
kind = "slab"
epsilon = { re = "2", im = "0.01" }
thickness = "1"
[numerics]
n = 16
steps = 4000
"#,
        )
        .unwrap();
        assert_eq!(doc.k, Some(Num(2.0)));
        assert_eq!(doc.eta, Some(Num(1.5)));
        assert_eq!(doc.numerics.n, Some(16));
        assert!(matches!(doc.potential, Some(PotentialSpec::Slab { .. })));
        assert!(ConfigDoc::parse("k = \"abc\"").is_err());
        assert!(ConfigDoc::parse("nonsense = 1").is_err());
        assert!(ConfigDoc::parse("[potential]\nkind = \"slab\"\nepsilon = { re = \"2\" }\nthickness = \"-1\"").is_err());
    }
}
