use num_complex::Complex64;
use proptest::prelude::*;
use tmscat::closed_forms::{delta2d_operator, slab_defect_t, slab_operator, SlabParams};
use tmscat::evolution::{evolve_transfer, EvolutionConfig};
use tmscat::operator::*;
use tmscat::potential::PotentialSpec;
use tmscat::spectral::{build_grid, MomentumGrid, NodeFamily, SpectralAmplitude};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
}

fn operators(grid: &MomentumGrid, z1: Complex64, z2: Complex64, eps: Complex64) -> [TransferOperator<MomentumGrid>; 3] {
    let k = grid.k();
    [
        delta2d_operator(z1, grid),
        slab_operator(&SlabParams::with_start(eps, 0.6, k, 1.0).unwrap(), grid),
        delta2d_operator(z2, grid),
    ]
}

#[test]
fn identity_laws() {
    let grid = build_grid(2.0, 6).unwrap();
    let id = TransferOperator::identity(&grid);
    for m in operators(&grid, c(1.0, 0.5), c(-0.3, 0.2), c(2.0, 0.1)) {
        assert_eq!(compose(&m, &id).unwrap(), m);
        assert_eq!(compose(&id, &m).unwrap(), m);
    }
    let out = solve_outgoing(&id);
    assert!(out.t_plus.is_zero() && out.t_minus.is_zero());
    assert_eq!(out.flag, SingularityFlag::None);
}

#[test]
fn zero_amplitudes_give_zero_f() {
    let grid = build_grid(1.0, 5).unwrap();
    let zero = SpectralAmplitude::zero(5);
    let f = amplitude(&zero, &zero, &grid, &default_angles(12)).unwrap();
    assert!(f.iter().all(|(_, v)| *v == c(0.0, 0.0)));
}

#[test]
fn slab_then_defect_reproduces_the_direct_solution() {
    let (eps, k, z) = (c(2.0, 0.01), 2.0, c(1.0, 0.0));
    let sp = SlabParams::new(eps, 1.0, k).unwrap();
    let grid = MomentumGrid::new(k, 32, NodeFamily::AngularGaussLegendre).unwrap();
    let out = solve_outgoing(&compose(&slab_operator(&sp, &grid), &delta2d_operator(z, &grid)).unwrap());
    for (j, p) in grid.nodes().iter().enumerate() {
        let t = slab_defect_t(&sp, z, *p, 200).unwrap();
        assert!((out.t_plus.smooth[j] - t.smooth_plus).norm() < 1e-8);
        assert!((out.t_minus.smooth[j] - t.smooth_minus).norm() < 1e-8);
    }
    // the same check on Chebyshev nodes converges only algebraically
    let cheb = build_grid(k, 32).unwrap();
    let out = solve_outgoing(&compose(&slab_operator(&sp, &cheb), &delta2d_operator(z, &cheb)).unwrap());
    let t = slab_defect_t(&sp, z, cheb.nodes()[10], 200).unwrap();
    assert!((out.t_plus.smooth[10] - t.smooth_plus).norm() < 1e-2);
}

#[test]
fn singular_coupling_is_flagged() {
    let grid = build_grid(2.0, 6).unwrap();
    assert!(solve_outgoing(&delta2d_operator(c(0.0, 4.0), &grid)).flag.is_singular());
    let near = solve_outgoing(&delta2d_operator(c(1e-10, 4.0), &grid)).flag;
    assert!(near != SingularityFlag::None, "{near:?}");
    assert_eq!(solve_outgoing(&delta2d_operator(c(0.0, 3.0), &grid)).flag, SingularityFlag::None);
}

#[test]
fn grazing_angles_are_skipped_or_rejected() {
    let grid = build_grid(2.0, 6).unwrap();
    let out = solve_outgoing(&delta2d_operator(c(1.0, 0.0), &grid));
    assert!(amplitude(&out.t_plus, &out.t_minus, &grid, &[std::f64::consts::FRAC_PI_2]).is_err());
    let r = scatter(&delta2d_operator(c(1.0, 0.0), &grid), &[0.0, std::f64::consts::FRAC_PI_2, 1.0]).unwrap();
    assert_eq!(r.f_samples.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(z1 in complex(), z2 in complex(), er in 1.0f64..4.0, ei in -0.2f64..0.2, n in 2usize..12) {
        let grid = build_grid(1.7, n).unwrap();
        let [a, b, cc] = operators(&grid, z1, z2, c(er, ei));
        let left = compose(&compose(&a, &b).unwrap(), &cc).unwrap();
        let right = compose(&a, &compose(&b, &cc).unwrap()).unwrap();
        let scale = 1.0 + left.max_abs_diff(&TransferOperator::identity(&grid));
        prop_assert!(left.max_abs_diff(&right) < 1e-12 * scale);
    }

    #[test]
    fn extraction_is_linear_in_the_incident_wave(z1 in complex(), z2 in complex(), inc in complex()) {
        let grid = build_grid(2.0, 8).unwrap();
        let [a, b, cc] = operators(&grid, z1, z2, c(2.0, 0.05));
        let m = compose(&compose(&a, &b).unwrap(), &cc).unwrap();
        let base = solve_outgoing(&m);
        prop_assume!(!base.flag.is_singular());
        let scaled = solve_outgoing_with_incident(&m, inc);
        let scale = 1.0 + base.t_plus.smooth.iter().chain(&base.t_minus.smooth).map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(scaled.t_plus.max_abs_diff(&base.t_plus.scaled(inc)) < 1e-12 * scale);
        prop_assert!(scaled.t_minus.max_abs_diff(&base.t_minus.scaled(inc)) < 1e-12 * scale);
    }

    #[test]
    fn delta_amplitude_is_isotropic(z in complex(), n in 2usize..20, theta in 0.0f64..std::f64::consts::TAU) {
        prop_assume!((z - c(0.0, 4.0)).norm() > 0.1);
        prop_assume!(theta.cos().abs() > 1e-6);
        let grid = build_grid(1.3, n).unwrap();
        let r = scatter(&delta2d_operator(z, &grid), &[theta]).unwrap();
        let exact = tmscat::closed_forms::delta2d_f(z).unwrap();
        prop_assert!((r.f_samples[0].1 - exact).norm() < 1e-10 * exact.norm().max(1.0));
    }
}

#[test]
fn centered_gaussian_scatters_symmetrically() {
    let grid = build_grid(2.0, 16).unwrap();
    let pot = PotentialSpec::GaussianBump { amplitude: c(0.7, 0.1), center: [0.4, 0.0], widths: [0.5, 0.6] };
    let m = evolve_transfer(&pot, &grid, &EvolutionConfig::auto(&pot, 600).unwrap()).unwrap();
    let thetas: Vec<f64> = (1..12).map(|i| 0.27 * i as f64).flat_map(|t| [t, -t]).collect();
    let r = scatter(&m, &thetas).unwrap();
    for pair in r.f_samples.chunks(2) {
        assert!((pair[0].1 - pair[1].1).norm() < 1e-6);
    }
    // an off-center bump breaks the symmetry
    let off = PotentialSpec::GaussianBump { amplitude: c(0.7, 0.1), center: [0.4, 0.5], widths: [0.5, 0.6] };
    let m = evolve_transfer(&off, &grid, &EvolutionConfig::auto(&off, 600).unwrap()).unwrap();
    let r = scatter(&m, &[0.8, -0.8]).unwrap();
    assert!((r.f_samples[0].1 - r.f_samples[1].1).norm() > 1e-3);
}
