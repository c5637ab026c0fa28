use std::f64::consts::PI;

use num_complex::Complex64;
use tmscat::closed_forms::{slab_operator, SlabParams};
use tmscat::evolution::{EvolutionConfig, DEFAULT_HALVING_TOLERANCE};
use tmscat::operator::{compose, solve_outgoing, solve_outgoing_with_incident};
use tmscat::potential::PotentialSpec;
use tmscat::spectral::ChannelGrid;
use tmscat::three_d::*;
use tmscat::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn disc_integrals() {
    let k = 2.2;
    let g = DiscGrid::new(k, 5, 7).unwrap();
    let ones = vec![c(1.0, 0.0); g.len()];
    assert!((g.disc_integral(&ones).unwrap().re - PI * k * k).abs() < 1e-12);
    assert!((disc_quadrature(&g, &ones).unwrap().re - k * k / (4.0 * PI)).abs() < 1e-14);
    let odd: Vec<Complex64> = g.nodes().iter().map(|p| c(p[0], 0.0)).collect();
    assert!(disc_quadrature(&g, &odd).unwrap().norm() < 1e-14);
}

#[test]
fn point_interaction_self_consistency() {
    for (z, k) in [(c(1.0, 0.0), 1.0), (c(-3.0, 0.5), 0.4), (c(0.2, -2.0), 2.5)] {
        let g = DiscGrid::new(k, 4, 6).unwrap();
        let out = solve_outgoing_3d(&delta3d_operator(z, &g));
        let b1 = delta3d_b_plus_one(z, k);
        assert!((b1 - 4.0 * PI / (4.0 * PI + Complex64::i() * z * k)).norm() < 1e-15);
        for (j, w) in g.omegas().iter().enumerate() {
            let exact = -Complex64::i() * z * b1 / (2.0 * w);
            assert!((out.t_plus.smooth[j] - exact).norm() < 1e-10);
            assert!((out.t_minus.smooth[j] - exact).norm() < 1e-10);
        }
        let scaled = solve_outgoing_with_incident(&delta3d_operator(z, &g), c(0.5, 2.0));
        assert!(scaled.t_plus.max_abs_diff(&out.t_plus.scaled(c(0.5, 2.0))) < 1e-12);
    }
    assert!(delta3d_operator(c(0.0, 0.0), &DiscGrid::new(1.0, 2, 3).unwrap()).is_identity());
}

#[test]
fn scattering_length_and_mu() {
    let z = c(3.0, 0.0);
    assert!((scattering_length(z) - z / (4.0 * PI)).norm() < 1e-16);
    assert!((mu(z) - 4.0 * PI / 3.0).abs() < 1e-15);
    let f0 = delta3d_f(z, 1e-14).unwrap();
    assert!((-f0 - scattering_length(z)).norm() < 1e-12);
    let sing = c(0.0, 4.0 * PI / 2.0);
    assert!(matches!(delta3d_f(sing, 2.0), Err(Error::SpectralSingularity(_))));
}

#[test]
fn slab_along_z_matches_closed_form() {
    let (eps, k) = (c(2.0, 0.02), 1.5);
    let g = DiscGrid::new(k, 4, 5).unwrap();
    let pot = PotentialSpec::Slab { epsilon: eps, thickness: 0.8, start: 0.0 };
    let m = evolve_transfer_3d(&pot, &g, &EvolutionConfig::new(0.0, 0.8, 1500).unwrap()).unwrap();
    let closed = slab_operator(&SlabParams::new(eps, 0.8, k).unwrap(), &g);
    assert!(m.max_abs_diff(&closed) < 1e-9);
}

#[test]
fn gaussian_3d_is_linear_at_first_order_and_bounded() {
    let g = DiscGrid::new(1.5, 3, 5).unwrap();
    let bump =
        |a: f64| PotentialSpec::Gaussian3d { amplitude: c(a, 0.0), center: [0.0, 0.1, 0.0], widths: [0.7, 0.6, 0.5] };
    let t = |a: f64| {
        let pot = bump(a);
        let cfg = EvolutionConfig::auto(&pot, 400).unwrap();
        let (m, w) = evolve_transfer_3d_checked(&pot, &g, &cfg, DEFAULT_HALVING_TOLERANCE).unwrap();
        assert!(w.is_none());
        solve_outgoing(&m).t_plus.smooth[3]
    };
    let (t1, t2) = (t(1e-3), t(2e-3));
    assert!((t2 - 2.0 * t1).norm() < 1e-2 * t1.norm());
    let big = DiscGrid::new(1.0, 10, 8).unwrap();
    assert!(matches!(
        evolve_transfer_3d(&bump(1.0), &big, &EvolutionConfig::new(-4.0, 4.0, 10).unwrap()),
        Err(Error::ResourceLimit { .. })
    ));
}

#[test]
fn stacked_layers_compose() {
    let (k, g) = (2.0, DiscGrid::new(2.0, 3, 4).unwrap());
    let a = SlabParams::with_start(c(1.5, 0.0), 0.4, k, 0.0).unwrap();
    let b = SlabParams::with_start(c(3.0, 0.1), 0.3, k, 0.9).unwrap();
    let two = PotentialSpec::Sum {
        members: vec![
            tmscat::potential::SumMember {
                support: [0.0, 0.4],
                potential: PotentialSpec::Slab { epsilon: a.epsilon, thickness: 0.4, start: 0.0 },
            },
            tmscat::potential::SumMember {
                support: [0.9, 1.2],
                potential: PotentialSpec::Slab { epsilon: b.epsilon, thickness: 0.3, start: 0.9 },
            },
        ],
    };
    let numeric = evolve_transfer_3d(&two, &g, &EvolutionConfig::new(0.0, 1.2, 2000).unwrap()).unwrap();
    let closed = compose(&slab_operator(&b, &g), &slab_operator(&a, &g)).unwrap();
    assert!(numeric.max_abs_diff(&closed) < 1e-8);
}
