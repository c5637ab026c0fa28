use num_complex::Complex64;
use proptest::prelude::*;
use tmscat::closed_forms::{delta2d_f, SlabParams};
use tmscat::oracle::*;
use tmscat::potential::{optical, PotentialSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn barrier_matches_closed_form_at_normal_incidence() {
    let (eps, l, k) = (c(3.0, -0.2), 1.3, 1.1);
    let o = transfer_1d(|_| optical(eps, k), (0.0, l), k, 4000).unwrap();
    let m = SlabParams::new(eps, l, k).unwrap().matrix(k);
    for (a, b) in o.m.iter().zip(m.iter()) {
        assert!((a - b).norm() < 1e-8 * b.norm().max(1.0));
    }
}

#[test]
fn disjoint_barriers_compose() {
    let k = 1.4;
    let (z1, z2) = (optical(c(2.0, 0.1), k), optical(c(0.5, -0.1), k));
    let v = |x: f64| {
        if (0.0..=0.5).contains(&x) {
            z1
        } else if (1.0..=1.8).contains(&x) {
            z2
        } else {
            c(0.0, 0.0)
        }
    };
    let joint = transfer_1d_piecewise(v, &[0.0, 0.5, 1.0, 1.8], k, 9000).unwrap();
    let m1 = transfer_1d(|_| z1, (0.0, 0.5), k, 4000).unwrap();
    let m2 = transfer_1d(|_| z2, (1.0, 1.8), k, 4000).unwrap();
    let product = m2.m * m1.m;
    for (a, b) in joint.m.iter().zip(product.iter()) {
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn born_delta_matches_closed_form_at_small_coupling() {
    // f = −(ik|cosθ|/√2π)T; at θ = 0 the Born T = −i𝔷/2k gives −𝔷/(2√2π)
    let z = c(1e-5, 0.0);
    let k = 1.0;
    let b = born1_t(&PotentialSpec::Delta2d { strength: z }, k, 0.0).unwrap();
    let f = -Complex64::i() * k / (2.0 * std::f64::consts::PI).sqrt() * b.smooth_plus;
    // the exact amplitude differs at second order, by √(2/π)|𝔷|²/16
    let d = (f - delta2d_f(z).unwrap()).norm();
    assert!((d / z.norm_sqr() - (2.0 / std::f64::consts::PI).sqrt() / 16.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn one_d_matrices_are_unimodular(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.2f64..1.0, k in 0.3f64..3.0) {
        let v = |x: f64| c(a, b) * (-x * x / (2.0 * s * s)).exp();
        let t = transfer_1d(v, (-8.0 * s, 8.0 * s), k, 3000).unwrap();
        let scale = t.m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((t.det() - 1.0).norm() < 1e-8 * scale * scale);
    }

    #[test]
    fn born_is_exactly_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, p in -0.9f64..0.9) {
        let pot = |s: Complex64| PotentialSpec::GaussianBump { amplitude: s, center: [0.2, -0.4], widths: [0.8, 0.5] };
        let one = born1_t(&pot(c(1.0, 0.0)), 1.0, p).unwrap();
        let many = born1_t(&pot(c(a, b)), 1.0, p).unwrap();
        prop_assert!((many.smooth_plus - one.smooth_plus * c(a, b)).norm() < 1e-14 * (1.0 + a.abs() + b.abs()));
        prop_assert!((many.smooth_minus - one.smooth_minus * c(a, b)).norm() < 1e-14 * (1.0 + a.abs() + b.abs()));
    }
}

#[test]
fn synthetic_fourth_order_sequence() {
    let r = convergence_report(|n| c(2.0 + 5.0 / (n as f64).powi(4), 0.0), &[5, 10, 20, 40]).unwrap();
    assert!((r.order.unwrap() - 4.0).abs() < 0.3);
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["deltas"].as_array().unwrap().len(), 3);
}
