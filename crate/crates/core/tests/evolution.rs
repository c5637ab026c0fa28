use num_complex::Complex64;
use tmscat::closed_forms::{slab_operator, SlabParams};
use tmscat::evolution::*;
use tmscat::operator::{compose, solve_outgoing};
use tmscat::oracle::{born1_t, convergence_report};
use tmscat::potential::{optical, PotentialSpec, SumMember};
use tmscat::quadrature::gauss_legendre;
use tmscat::spectral::{build_grid, ChannelGrid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bump(a: Complex64, center: [f64; 2], widths: [f64; 2]) -> PotentialSpec {
    PotentialSpec::GaussianBump { amplitude: a, center, widths }
}

#[test]
fn zero_potential_gives_identity() {
    let grid = build_grid(2.0, 8).unwrap();
    let zero = bump(c(0.0, 0.0), [0.0, 0.0], [1.0, 1.0]);
    let m = evolve_transfer(&zero, &grid, &EvolutionConfig::new(-3.0, 3.0, 100).unwrap()).unwrap();
    assert!(m.is_identity());
    let h = effective_hamiltonian(&zero, 0.3, &grid).unwrap();
    assert!(h.is_zero());
}

#[test]
fn slab_kernel_is_a_multiple_of_identity() {
    let (eps, k) = (c(2.0, 0.3), 1.5);
    let grid = build_grid(k, 6).unwrap();
    let pot = PotentialSpec::Slab { epsilon: eps, thickness: 1.0, start: 0.0 };
    let v = potential_kernel(&pot, 0.4, &grid).unwrap();
    for j in 0..6 {
        for l in 0..6 {
            let expect = if j == l { optical(eps, k) } else { c(0.0, 0.0) };
            assert_eq!(v[(j, l)], expect);
        }
    }
    assert!(potential_kernel(&pot, 1.2, &grid).unwrap().iter().all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn gaussian_kernel_diagonal_matches_direct_integration() {
    let grid = build_grid(2.0, 10).unwrap();
    let (a, center, widths) = (c(0.8, -0.1), [0.2, 0.5], [0.7, 0.4]);
    let pot = bump(a, center, widths);
    let x = 0.6;
    let v = potential_kernel(&pot, x, &grid).unwrap();
    let (ys, ws) = gauss_legendre(120, center[1] - 12.0 * widths[1], center[1] + 12.0 * widths[1]).unwrap();
    let profile = |x: f64, y: f64| {
        a * (-(x - center[0]).powi(2) / (2.0 * widths[0].powi(2)) - (y - center[1]).powi(2) / (2.0 * widths[1].powi(2)))
            .exp()
    };
    let direct: Complex64 = ys.iter().zip(&ws).map(|(y, w)| profile(x, *y) * *w).sum();
    for j in 0..grid.len() {
        let entry = v[(j, j)] / grid.averaging_weights()[j];
        assert!((entry - direct).norm() < 1e-8);
    }
}

#[test]
fn hamiltonian_structure_at_origin_and_parity() {
    let grid = build_grid(2.0, 9).unwrap();
    let pot = bump(c(0.5, 0.2), [0.0, 0.0], [0.6, 0.9]);
    let h = effective_hamiltonian(&pot, 0.0, &grid).unwrap();
    assert!(tmscat::linalg::max_abs_diff(&h.h11, &h.h12) < 1e-15);
    assert!(tmscat::linalg::max_abs_diff(&h.h21, &h.h22) < 1e-15);
    assert!(tmscat::linalg::max_abs_diff(&h.h21, &(-h.h11.clone())) < 1e-15);
    assert!(tmscat::linalg::max_abs(&(h.h11.clone() + &h.h22)) < 1e-15);
    // a y-even potential gives a kernel invariant under p → −p on mirrored nodes
    let x = 0.37;
    let v = potential_kernel(&pot, x, &grid).unwrap();
    let n = grid.len();
    for j in 0..n {
        for l in 0..n {
            assert!((v[(j, l)] - v[(n - 1 - j, n - 1 - l)]).norm() < 1e-15);
        }
    }
}

#[test]
fn evolution_is_a_group_in_x() {
    let grid = build_grid(2.0, 10).unwrap();
    let pot = bump(c(0.6, 0.1), [0.3, -0.2], [0.5, 0.8]);
    let whole = evolve_transfer(&pot, &grid, &EvolutionConfig::new(-4.0, 4.0, 1600).unwrap()).unwrap();
    let left = evolve_transfer(&pot, &grid, &EvolutionConfig::new(-4.0, 0.7, 940).unwrap()).unwrap();
    let right = evolve_transfer(&pot, &grid, &EvolutionConfig::new(0.7, 4.0, 660).unwrap()).unwrap();
    let joined = compose(&right, &left).unwrap();
    assert!(joined.max_abs_diff(&whole) < 1e-6);
}

#[test]
fn first_order_matches_born_at_small_amplitude() {
    let k = 2.0;
    let grid = build_grid(k, 12).unwrap();
    let discrepancy = |a: f64| {
        let pot = bump(c(a, 0.3 * a), [0.1, 0.2], [0.6, 0.5]);
        let cfg = EvolutionConfig::auto(&pot, 800).unwrap();
        let out = solve_outgoing(&evolve_transfer(&pot, &grid, &cfg).unwrap());
        let mut d = 0.0f64;
        for (j, p) in grid.nodes().iter().enumerate() {
            let b = born1_t(&pot, k, *p).unwrap();
            d = d.max((out.t_plus.smooth[j] - b.smooth_plus).norm());
            d = d.max((out.t_minus.smooth[j] - b.smooth_minus).norm());
        }
        d
    };
    let a = 2e-3;
    let (d1, d2) = (discrepancy(a), discrepancy(a / 2.0));
    let (r1, r2) = (d1 / (a * a), d2 / (a * a / 4.0));
    assert!(d1 < 1e-3 * a, "Born discrepancy {d1:e} is not second order");
    assert!((r1 / r2 - 1.0).abs() < 0.05, "ratios {r1:e} {r2:e}");
}

#[test]
fn thin_weak_slab_matches_born_delta_terms() {
    let k = 1.5;
    let grid = build_grid(k, 4).unwrap();
    let eps = c(1.0 + 1e-4, 2e-5);
    let pot = PotentialSpec::Slab { epsilon: eps, thickness: 0.7, start: 0.2 };
    let out = solve_outgoing(&evolve_transfer(&pot, &grid, &EvolutionConfig::new(0.2, 0.9, 200).unwrap()).unwrap());
    let b = born1_t(&pot, k, 0.0).unwrap();
    // the remainder is second order in z̃L/k
    let second = (optical(eps, k).norm() * 0.7 / k).powi(2);
    assert!((out.t_plus.delta_coeff - b.delta_plus).norm() < second);
    assert!((out.t_minus.delta_coeff - b.delta_minus).norm() < second);
    assert!(b.delta_plus.norm() > 1e3 * second);
    assert!(out.t_plus.smooth.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn slab_entry_converges_at_fourth_order() {
    let grid = build_grid(2.0, 4).unwrap();
    let pot = PotentialSpec::Slab { epsilon: c(4.0, 0.1), thickness: 2.0, start: 0.0 };
    let r = convergence_report(
        |steps| {
            evolve_transfer(&pot, &grid, &EvolutionConfig::new(0.0, 2.0, steps).unwrap()).unwrap().mult_at_node(1)
                [(0, 0)]
        },
        &[8, 16, 32, 64],
    )
    .unwrap();
    assert!(r.order.unwrap() >= 3.5, "{}", r.to_table());
}

#[test]
fn layers_and_bumps_combine() {
    let k = 2.0;
    let grid = build_grid(k, 8).unwrap();
    let slab = PotentialSpec::Slab { epsilon: c(1.8, 0.02), thickness: 0.5, start: 2.0 };
    let b = bump(c(0.3, 0.0), [0.0, 0.0], [0.2, 0.5]);
    let sum = PotentialSpec::Sum {
        members: vec![
            SumMember { support: [-1.6, 1.6], potential: b.clone() },
            SumMember { support: [2.0, 2.5], potential: slab.clone() },
        ],
    };
    let whole = evolve_transfer(&sum, &grid, &EvolutionConfig::new(-1.6, 2.5, 3000).unwrap()).unwrap();
    let first = evolve_transfer(&b, &grid, &EvolutionConfig::new(-1.6, 1.6, 2000).unwrap()).unwrap();
    let second = slab_operator(&SlabParams::with_start(c(1.8, 0.02), 0.5, k, 2.0).unwrap(), &grid);
    assert!(compose(&second, &first).unwrap().max_abs_diff(&whole) < 1e-6);
}

#[test]
fn step_doubling_flags_coarse_runs() {
    let grid = build_grid(2.0, 8).unwrap();
    let pot = bump(c(3.0, 0.0), [0.0, 0.0], [0.4, 0.4]);
    let cfg = EvolutionConfig::auto(&pot, 4).unwrap();
    let (_, warning) = evolve_transfer_checked(&pot, &grid, &cfg, DEFAULT_HALVING_TOLERANCE).unwrap();
    let w = warning.expect("4 steps over 6.4 widths is too coarse");
    assert_eq!(w.steps, 4);
    assert!(w.delta > DEFAULT_HALVING_TOLERANCE);
    let cfg = EvolutionConfig::auto(&pot, 2000).unwrap();
    let (_, warning) = evolve_transfer_checked(&pot, &grid, &cfg, DEFAULT_HALVING_TOLERANCE).unwrap();
    assert!(warning.is_none());
}

#[test]
fn delta_potentials_are_rejected_by_the_engine() {
    let grid = build_grid(2.0, 8).unwrap();
    let d = PotentialSpec::Delta2d { strength: c(1.0, 0.0) };
    assert!(evolve_transfer(&d, &grid, &EvolutionConfig::new(-1.0, 1.0, 10).unwrap()).is_err());
}
