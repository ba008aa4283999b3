use fdnls_core::flow::*;
use fdnls_core::kernels::Kernel;
use fdnls_core::lattice::{BoundaryCondition, LatticeState};
use num_complex::Complex64;

fn gaussian() -> LatticeState {
    LatticeState::from_fn(BoundaryCondition::Dirichlet, 64, |n| Complex64::new((-(n * n) as f64 / 8.0).exp(), 0.0)).unwrap()
}

#[test]
fn discrepancy_respects_the_gronwall_bound() {
    let f = gaussian();
    let mut at_end = Vec::new();
    for &alpha in &[4.0, 8.0, 16.0] {
        let cmp = evolve_pair(&f, alpha, 1.0, 5.0, 1e-3, 100).unwrap();
        assert_eq!(cmp.times[0], 0.0);
        assert_eq!(cmp.discrepancy[0], 0.0);
        assert!(cmp.within_bound(), "alpha={alpha}");
        assert!(cmp.lipschitz.iter().all(|&c| c >= 3.0 - 1e-12));
        at_end.push(*cmp.discrepancy.last().unwrap());
    }
    assert!(at_end[0] > at_end[1] && at_end[1] > at_end[2], "{at_end:?}");
}

#[test]
fn kernel_starts_at_identity() {
    let k = Kernel::power_law(4.0).unwrap();
    let z = dispersive_kernel(0, 1e-6, &k).unwrap();
    assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-5);
    assert!(dispersive_kernel(3, 1e-6, &k).unwrap().norm() < 1e-5);
}

#[test]
fn kernel_is_unitary() {
    assert!((kernel_parseval(4.0, 1.0, 512).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn large_alpha_kernel_approaches_nearest_neighbour() {
    let k = Kernel::power_law(50.0).unwrap();
    let t = 20.0;
    let reach = kernel_reach(50.0, t) as i64;
    let sites: Vec<i64> = (-reach..=reach).collect();
    let vals = dispersive_kernel_batch(&sites, t, &k).unwrap();
    let worst = sites
        .iter()
        .zip(&vals)
        .map(|(&n, z)| (z - nearest_neighbor_kernel(n, t)).norm())
        .fold(0.0, f64::max);
    assert!(worst < 2e-3, "sup difference {worst}");
}

#[test]
fn bessel_reference_values() {
    // J_0(2) = 0.2238907791, J_1(2) = 0.5767248078.
    let k0 = nearest_neighbor_kernel(0, 1.0) * Complex64::from_polar(1.0, 2.0);
    assert!((k0.re - 0.223_890_779_1).abs() < 1e-9 && k0.im.abs() < 1e-12);
    let k1 = nearest_neighbor_kernel(1, 1.0) * Complex64::from_polar(1.0, 2.0);
    assert!((k1.im - 0.576_724_807_8).abs() < 1e-9 && k1.re.abs() < 1e-12);
}

#[test]
fn gap_vanishes_at_time_zero() {
    let probe = GapProbe::new(6.0, 1.0).unwrap().at_time(0.0);
    assert_eq!(unitary_gap(&probe).unwrap(), 0.0);
    assert!(GapProbe::new(6.0, 2.0).is_err());
    let p = GapProbe::new(3.0, 1.0).unwrap();
    assert!(p.t_alpha > 2f64.powf(3.0));
}

#[test]
fn gap_ignores_global_phase() {
    let probe = GapProbe::new(4.0, 1.0).unwrap();
    let data = [(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 0.5)), (-2, Complex64::new(0.3, -0.2))];
    let rot = Complex64::from_polar(1.0, 0.9);
    let turned: Vec<(i64, Complex64)> = data.iter().map(|&(n, z)| (n, z * rot)).collect();
    let a = unitary_gap_for(&probe, &data).unwrap();
    let b = unitary_gap_for(&probe, &turned).unwrap();
    assert!((a - b).abs() < 1e-9 * a.max(1.0));
    assert!(a > 0.05);
}

#[test]
fn csv_headers() {
    assert_eq!(FlowComparison::CSV_HEADER, "t,discrepancy,bound");
    assert_eq!(KernelDecay::CSV_HEADER, "t,sup_kernel");
}
