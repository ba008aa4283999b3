use fdnls_core::dynamics::energy;
use fdnls_core::energetics::*;
use fdnls_core::kernels::Kernel;
use fdnls_core::lattice::build_dirichlet;
use fdnls_core::modes::{dnls_offsite, dnls_onsite, fdnls_offsite, fdnls_onsite};

#[test]
fn dnls_closed_forms_match_lattice_energy() {
    for &(eps, w) in &[(1.0, 100.0), (1.0, 2.0), (0.5, 0.3)] {
        let (e_a, e_b) = dnls_energies(eps, w).unwrap();
        let op = build_dirichlet(200, eps, &Kernel::nearest_neighbor()).unwrap();
        let a = energy(&dnls_onsite(w, eps, 200).unwrap().boost(0.0), &op).unwrap();
        let b = energy(&dnls_offsite(w, eps, 200).unwrap().boost(0.0), &op).unwrap();
        assert!((a - e_a).abs() < 1e-8 * e_a.abs().max(1.0), "eps={eps} w={w}: {a} vs {e_a}");
        assert!((b - e_b).abs() < 1e-8 * e_b.abs().max(1.0), "eps={eps} w={w}: {b} vs {e_b}");
    }
}

#[test]
fn dnls_barrier_is_negative() {
    for &eps in &[0.1, 1.0, 10.0] {
        for &w in &[0.1, 1.0, 10.0] {
            let r = dnls_pnb(eps, w).unwrap();
            assert!(r.delta_e < 0.0);
            assert_eq!(r.delta_e, r.e_a - r.e_b);
            assert_eq!(r.truncation_error_bound, 0.0);
        }
    }
    let big = dnls_pnb(1.0, 1e6).unwrap();
    assert!((big.delta_e / 1e12 + 0.125).abs() < 1e-5);
    assert!(dnls_pnb(1e-6, 1e-6).unwrap().delta_e.abs() < 1e-10);
}

#[test]
fn gamma_is_positive_and_tends_to_one_eighth() {
    let grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(-4.0 + 6.0 * i as f64 / 60.0)).collect();
    assert!(grid.iter().all(|&k| gamma_of_k(k).unwrap() > 0.0));
    assert!((gamma_of_k(1e-4).unwrap() - 0.125).abs() < 1e-3);
    for &k in &[1e-3, 1e-1, 1.0, 10.0] {
        let r = dnls_pnb(k * 100.0, 100.0).unwrap();
        assert!((gamma_of_k(k).unwrap() + r.delta_e / 1e4).abs() < 1e-10);
    }
}

#[test]
fn fdnls_large_frequency_laws() {
    let k = Kernel::power_law(1.0).unwrap();
    let mut prev = f64::INFINITY;
    for &w in &[1e2, 1e3, 1e4] {
        let on = fdnls_onsite(w, 1.0, &k, 256).unwrap();
        let on_half = fdnls_onsite(0.5 * w, 1.0, &k, 256).unwrap();
        let off_half = fdnls_offsite(0.5 * w, 1.0, &k, 256).unwrap();
        let ea = fdnls_energies(&on, &off_half, 128).unwrap().e_a;
        let eb = fdnls_energies(&on_half, &off_half, 128).unwrap().e_b;
        let dev = (ea / (w * w) + 0.25).abs() + (ea / eb - 2.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 1e-3);
    let r = fdnls_pnb(1e4, 1.0, &k, 256, 128).unwrap();
    assert!((r.delta_e / 1e8 + 0.125).abs() < 1e-3);
    assert_eq!(r.alpha, Some(1.0));
}

#[test]
fn truncation_bound_covers_longer_sums() {
    let k = Kernel::power_law(1.0).unwrap();
    let rho = 0.9 * fdnls_core::modes::rho_star(&k, BRACKET_EPS1).unwrap();
    let on = fdnls_onsite(1.0 / rho, 1.0, &k, 256).unwrap();
    let off = fdnls_offsite(1.0 / rho, 1.0, &k, 256).unwrap();
    let runs: Vec<FdnlsEnergies> = [16, 32, 64, 128].iter().map(|&n| fdnls_energies(&on, &off, n).unwrap()).collect();
    for w in runs.windows(2) {
        // Longer pair sums only add nonnegative coupling terms.
        assert!(w[1].e_a >= w[0].e_a && w[1].e_b >= w[0].e_b);
        assert!(w[1].e_a - w[0].e_a <= w[0].truncation_bound);
        assert!(w[1].e_b - w[0].e_b <= w[0].truncation_bound);
        assert!(w[1].truncation_bound <= w[0].truncation_bound);
    }
    assert!(fdnls_energies(&on, &off, 257).is_err());
}

#[test]
fn small_eps_coefficient_value() {
    let k = Kernel::power_law(1.0).unwrap();
    // Series evaluation of the same expression by brute force.
    let z2 = std::f64::consts::PI.powi(2) / 6.0;
    let z4 = std::f64::consts::PI.powi(4) / 90.0;
    let t: f64 = (2..2_000_000).rev().map(|n| {
        let a = (n as f64).powi(-2) + ((n - 1) as f64).powi(-2);
        a * a
    }).sum();
    let brute = 2.0 * t - (z2 - 1.0).powi(2) - 2.0 * z4 + 0.5;
    assert!((small_eps_coefficient(&k) - brute).abs() < 1e-9);
    assert!((brute - 1.40818).abs() < 1e-4);
}

#[test]
fn small_eps_ladder_approaches_coefficient() {
    let k = Kernel::power_law(1.0).unwrap();
    let target = small_eps_coefficient(&k);
    let dev: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| (small_eps_measured(1.0, e, &k, 256, 128).unwrap() - target).abs())
        .collect();
    assert!(dev[2] < dev[0], "{dev:?}");
    assert!(dev[2] / target < 0.02, "{dev:?}");
}

#[test]
fn barrier_sign_scan() {
    // Report-only: the scan must produce finite barriers, and any positive
    // entries are printed for inspection.
    let eps: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
    for &alpha in &[0.5, 1.0, 2.0] {
        let k = Kernel::power_law(alpha).unwrap();
        let scan = pnb_eps_scan(1.0, &k, &eps, 128, 64).unwrap();
        assert_eq!(scan.len(), eps.len());
        assert!(scan.iter().all(|r| r.delta_e.is_finite() && r.truncation_error_bound >= 0.0));
        let positive: Vec<f64> = scan.iter().filter(|r| r.delta_e > 0.0).map(|r| r.eps).collect();
        println!("alpha={alpha}: positive barrier at eps {positive:?}");
    }
}

#[test]
fn small_alpha_masses() {
    let ladder: Vec<SmallAlphaMass> = [1e-1, 3e-2, 1e-2]
        .iter()
        .map(|&a| small_alpha_mass(1.0, 1e-2, a, 256).unwrap())
        .collect();
    let dist: Vec<f64> = ladder.iter().map(|m| (m.ratio - 2.0).abs()).collect();
    assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    let last = ladder[2];
    assert!(last.scaled_a >= 0.8 && last.scaled_a <= 1.25, "{last:?}");
    // Outside the regime the numbers are reported, nothing more.
    let outside = small_alpha_mass(1.0, 1e-2, 1.0, 64).unwrap();
    assert!(outside.n_a > 0.0 && outside.n_b > 0.0);
}
