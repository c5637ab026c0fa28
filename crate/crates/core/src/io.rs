//! Output formats. Numbers are written with 17 significant digits in
//! scientific notation, rows end in '\n', and nothing depends on locale or
//! scheduling, so equal inputs give byte-identical files.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::closed_forms::SingularityReport;
use crate::linalg::Mat2;
use crate::operator::{ScatteringResult, SingularityFlag};
use crate::spectral::SpectralAmplitude;

/// A float with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(cells: &[f64]) -> String {
    let mut s = cells.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// `theta_deg,re_f,im_f,abs_f_sq`; angles are given in radians.
pub fn amplitude_csv(samples: &[(f64, Complex64)]) -> String {
    let mut out = String::from("theta_deg,re_f,im_f,abs_f_sq\n");
    for (t, f) in samples {
        out += &row(&[t.to_degrees(), f.re, f.im, f.norm_sqr()]);
    }
    out
}

/// `theta_deg,phi_deg,re_f,im_f,abs_f_sq`; angles are given in radians.
pub fn amplitude3d_csv(samples: &[(f64, f64, Complex64)]) -> String {
    let mut out = String::from("theta_deg,phi_deg,re_f,im_f,abs_f_sq\n");
    for (t, p, f) in samples {
        out += &row(&[t.to_degrees(), p.to_degrees(), f.re, f.im, f.norm_sqr()]);
    }
    out
}

/// `theta_deg,g_times_L`; angles already in degrees.
pub fn gain_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("theta_deg,g_times_L\n");
    for (t, g) in samples {
        out += &row(&[*t, *g]);
    }
    out
}

/// `p,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22`.
pub fn transfer_csv(samples: &[(f64, Mat2)]) -> String {
    let mut out = String::from("p,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22\n");
    for (p, m) in samples {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        out += &row(&[*p, a.re, a.im, b.re, b.im, c.re, c.im, d.re, d.im]);
    }
    out
}

/// Smooth parts of T± at the grid nodes: `p,re_t_plus,im_t_plus,re_t_minus,im_t_minus`.
pub fn t_table_csv(nodes: &[f64], t_plus: &SpectralAmplitude, t_minus: &SpectralAmplitude) -> String {
    let mut out = String::from("p,re_t_plus,im_t_plus,re_t_minus,im_t_minus\n");
    for ((p, a), b) in nodes.iter().zip(&t_plus.smooth).zip(&t_minus.smooth) {
        out += &row(&[*p, a.re, a.im, b.re, b.im]);
    }
    out
}

pub fn complex_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

/// Metadata of a 2D extraction; `extra` fields are merged in.
pub fn scatter_metadata(k: f64, n: usize, result: &ScatteringResult, extra: Value) -> String {
    let mut v = json!({
        "k": k,
        "N": n,
        "t_plus_delta": complex_json(result.t_plus.delta_coeff),
        "t_minus_delta": complex_json(result.t_minus.delta_coeff),
        "singularity_flag": flag_json(&result.singularity),
    });
    merge(&mut v, extra);
    to_pretty(&v)
}

pub fn flag_json(flag: &SingularityFlag) -> Value {
    serde_json::to_value(flag).unwrap_or(Value::Null)
}

/// `{root_re, root_im, residual, m22_abs, iterations}`.
pub fn singularity_record(r: &SingularityReport) -> Value {
    json!({
        "root_re": r.root.re,
        "root_im": r.root.im,
        "residual": r.residual,
        "m22_abs": r.m22_abs,
        "iterations": r.iterations,
    })
}

pub fn merge(base: &mut Value, extra: Value) {
    if let (Value::Object(b), Value::Object(e)) = (base, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}
