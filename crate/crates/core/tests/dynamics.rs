use fdnls_core::dynamics::*;
use fdnls_core::error::Error;
use fdnls_core::kernels::Kernel;
use fdnls_core::lattice::*;
use fdnls_core::modes::dnls_onsite;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn sech_packet(bc: BoundaryCondition, n: usize) -> LatticeState {
    LatticeState::from_fn(bc, n, |s| {
        let x = s as f64;
        Complex64::from_polar(1.0 / (x / 3.0).cosh(), 0.5 * x)
    })
    .unwrap()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn mass_examples() {
    assert_eq!(mass(&LatticeState::zeros(BoundaryCondition::Dirichlet, 4)), 0.0);
    let imp = LatticeState::from_fn(BoundaryCondition::Dirichlet, 4, |n| if n == 0 { ONE } else { ONE * 0.0 }).unwrap();
    assert_eq!(mass(&imp), 1.0);

    let (w, eps) = (100.0, 1.0);
    let seq = dnls_onsite(w, eps, 50).unwrap();
    let rho = eps / w;
    let r2 = (rho / (1.0 + 2.0 * rho)).powi(2);
    let expected: f64 = (-50i64..=50).map(|n| r2.powi(n.unsigned_abs() as i32) * (w + 2.0 * eps)).sum();
    assert!((mass(&seq.boost(0.0)) - expected).abs() < 1e-12 * expected);
}

#[test]
fn energy_examples() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_periodic(16, 1.0, &k).unwrap();
    assert_eq!(energy(&LatticeState::zeros(BoundaryCondition::Periodic, 16), &op).unwrap(), 0.0);
    let a = 0.8;
    let cw = LatticeState::from_fn(BoundaryCondition::Periodic, 16, |_| ONE * a).unwrap();
    let expected = -(32.0) * a.powi(4) / 4.0;
    assert!((energy(&cw, &op).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn kinetic_energy_is_the_pair_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 12usize;
    let eps = 0.9;
    let k = Kernel::power_law(0.8).unwrap();
    let u = LatticeState::new(
        BoundaryCondition::Dirichlet,
        n,
        (0..2 * n + 1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
    )
    .unwrap();
    let len = u.len();
    let mut pairs = 0.0;
    for a in 0..len {
        for b in 0..len {
            if a != b {
                pairs += k.j(a.abs_diff(b)) * (u.amplitudes[a] - u.amplitudes[b]).norm_sqr();
            }
        }
    }
    let window = build_dirichlet_with(n, eps, &k, DirichletConvention::WindowOnly).unwrap();
    let kin = energy_with(&u, &window, &Nonlinearity::none()).unwrap();
    assert!((kin - 0.25 * eps * pairs).abs() < 1e-10);

    // The full diagonal adds the coupling to the (zero) exterior.
    let full = build_dirichlet(n, eps, &k).unwrap();
    let exterior: f64 = (0..len)
        .map(|a| {
            let inside: f64 = (0..len).filter(|&b| b != a).map(|b| k.j(a.abs_diff(b))).sum();
            (2.0 * k.total() - inside) * u.amplitudes[a].norm_sqr()
        })
        .sum();
    let kin_full = energy_with(&u, &full, &Nonlinearity::none()).unwrap();
    assert!((kin_full - 0.25 * eps * pairs - 0.5 * eps * exterior).abs() < 1e-10);
}

#[test]
fn cw_step_matches_exact_phase() {
    let k = Kernel::power_law(1.0).unwrap();
    let a = 1.3;
    let cw = LatticeState::from_fn(BoundaryCondition::Periodic, 8, |_| ONE * a).unwrap();
    let err = |dt: f64| {
        // Constants are annihilated, so a weak coupling keeps the guard happy at large dt.
        let op = build_periodic(8, 0.1, &k).unwrap();
        let next = step_rk4(&cw, &SimConfig::new(op, dt, dt)).unwrap();
        let exact = Complex64::from_polar(a, a * a * dt);
        next.amplitudes.iter().map(|z| (z - exact).norm()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(4e-2), err(2e-2));
    // Local error O(dt^5): halving dt divides it by about 32.
    assert!(e1 < (a * a * 4e-2_f64).powi(5) * a);
    assert!((e1 / e2 - 32.0).abs() < 3.0, "ratio {}", e1 / e2);

    let op = build_periodic(8, 1.0, &k).unwrap();
    let zero = LatticeState::zeros(BoundaryCondition::Periodic, 8);
    let next = step_rk4(&zero, &SimConfig::new(op, 1e-3, 1e-3)).unwrap();
    assert!(next.amplitudes.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn linear_run_matches_matrix_exponential() {
    let n = 16;
    for &alpha in &[0.5, 1.0, 3.0] {
        let k = Kernel::power_law(alpha).unwrap();
        let op = build_dirichlet(n, 1.0, &k).unwrap();
        let len = op.len();
        let m = DMatrix::from_row_slice(len, len, &op.dense_matrix());
        let eig = m.symmetric_eigen();
        let mut u0 = DVector::<f64>::zeros(len);
        u0[n] = 1.0;
        let proj = eig.eigenvectors.transpose() * &u0;
        let t = 1.0;
        let exact: Vec<Complex64> = (0..len)
            .map(|i| {
                (0..len)
                    .map(|j| eig.eigenvectors[(i, j)] * proj[j] * Complex64::from_polar(1.0, -eig.eigenvalues[j] * t))
                    .sum()
            })
            .collect();

        let mut cfg = SimConfig::new(op, 1e-3, t);
        cfg.nonlinearity = Nonlinearity::none();
        let init = LatticeState::from_fn(BoundaryCondition::Dirichlet, n, |s| ONE * (s == 0) as u8 as f64).unwrap();
        let (fin, _) = integrate(&init, &cfg).unwrap();
        assert!(max_diff(&fin.amplitudes, &exact) < 1e-8, "alpha={alpha}");
    }
}

#[test]
fn linear_run_matches_circulant_propagator() {
    let n = 128;
    let k = Kernel::power_law(1.2).unwrap();
    let op = build_periodic(n, 1.0, &k).unwrap();
    let init = sech_packet(BoundaryCondition::Periodic, n);
    let mut exact = init.amplitudes.clone();
    op.propagate_linear(&mut exact, 1.0).unwrap();
    let mut cfg = SimConfig::new(op, 1e-3, 1.0);
    cfg.nonlinearity = Nonlinearity::none();
    let (fin, _) = integrate(&init, &cfg).unwrap();
    assert!(max_diff(&fin.amplitudes, &exact) < 1e-8);
}

#[test]
fn conservation_across_alpha_and_boundaries() {
    let n = 32;
    for &alpha in &[0.5, 1.0, 2.0, 20.0] {
        let k = Kernel::power_law(alpha).unwrap();
        for op in [build_dirichlet(n, 1.0, &k).unwrap(), build_periodic(n, 1.0, &k).unwrap()] {
            let init = sech_packet(op.bc(), n);
            let mut cfg = SimConfig::new(op, 1e-3, 10.0);
            cfg.record_every = 100;
            let (_, diag) = integrate(&init, &cfg).unwrap();
            assert!(diag.mass_drift() < 1e-9, "alpha={alpha} mass {}", diag.mass_drift());
            assert!(diag.energy_drift() < 1e-7, "alpha={alpha} energy {}", diag.energy_drift());
        }
    }
}

#[test]
fn cw_mass_is_conserved() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_periodic(128, 1.0, &k).unwrap();
    let cw = LatticeState::from_fn(BoundaryCondition::Periodic, 128, |_| ONE).unwrap();
    let mut cfg = SimConfig::new(op, 1e-3, 10.0);
    cfg.record_every = 1000;
    let (_, diag) = integrate(&cw, &cfg).unwrap();
    assert!(diag.mass_drift() < 1e-10);
    assert_eq!(diag.times.first(), Some(&0.0));
    assert_eq!(diag.times.last(), Some(&10.0));
    assert!(diag.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn time_reversal_by_conjugation() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_dirichlet(24, 1.0, &k).unwrap();
    let init = sech_packet(BoundaryCondition::Dirichlet, 24);
    let cfg = SimConfig::new(op, 1e-3, 2.0);
    let (mid, _) = integrate(&init, &cfg).unwrap();
    let mut back = mid.clone();
    back.time = 0.0;
    back.amplitudes.iter_mut().for_each(|z| *z = z.conj());
    let (fin, _) = integrate(&back, &cfg).unwrap();
    let returned: Vec<Complex64> = fin.amplitudes.iter().map(|z| z.conj()).collect();
    assert!(max_diff(&returned, &init.amplitudes) < 1e-6);
}

#[test]
fn gauge_covariance() {
    let k = Kernel::power_law(1.5).unwrap();
    let op = build_periodic(16, 1.0, &k).unwrap();
    let init = sech_packet(BoundaryCondition::Periodic, 16);
    let cfg = SimConfig::new(op, 1e-3, 1.0);
    let (base, _) = integrate(&init, &cfg).unwrap();
    // Multiplication by ±1 and ±i is exact in floating point.
    for phase in [Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)] {
        let mut rotated = init.clone();
        rotated.amplitudes.iter_mut().for_each(|z| *z *= phase);
        let (fin, _) = integrate(&rotated, &cfg).unwrap();
        for (a, b) in fin.amplitudes.iter().zip(&base.amplitudes) {
            assert_eq!(a.norm_sqr(), b.norm_sqr());
            assert_eq!(*a, b * phase);
        }
    }
    let phase = Complex64::from_polar(1.0, 0.37);
    let mut rotated = init.clone();
    rotated.amplitudes.iter_mut().for_each(|z| *z *= phase);
    let (fin, _) = integrate(&rotated, &cfg).unwrap();
    let expected: Vec<Complex64> = base.amplitudes.iter().map(|z| z * phase).collect();
    assert!(max_diff(&fin.amplitudes, &expected) < 1e-12);
}

#[test]
fn strang_agrees_with_rk4() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_periodic(32, 1.0, &k).unwrap();
    let init = sech_packet(BoundaryCondition::Periodic, 32);
    let rk = SimConfig::new(op, 1e-3, 2.0);
    let mut st = rk.clone();
    st.scheme = Scheme::Strang;
    let (a, _) = integrate(&init, &rk).unwrap();
    let (b, db) = integrate(&init, &st).unwrap();
    assert!(max_diff(&a.amplitudes, &b.amplitudes) < 1e-5);
    // Splitting is unitary step by step.
    assert!(db.mass_drift() < 1e-12);
}

#[test]
fn blow_up_aborts_with_diagnostic() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_dirichlet(4, 1.0, &k).unwrap();
    let init = LatticeState::from_fn(BoundaryCondition::Dirichlet, 4, |n| ONE * if n == 1 { 1e3 } else { 0.0 }).unwrap();
    let cfg = SimConfig::new(op, 1e-3, 1.0);
    match integrate(&init, &cfg) {
        Err(Error::NonFinite { site, time }) => {
            assert!(time > 0.0 && (-4..=4).contains(&site));
        }
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn step_count_lands_on_t_end() {
    let k = Kernel::power_law(1.0).unwrap();
    let op = build_dirichlet(4, 1.0, &k).unwrap();
    let cfg = SimConfig::new(op, 0.003, 0.01);
    let (n, dt) = cfg.steps();
    assert_eq!(n, 4);
    assert!((n as f64 * dt - 0.01).abs() < 1e-15);
}

#[test]
fn peak_trace_of_stationary_mode() {
    let seq = dnls_onsite(4.0, 1.0, 16).unwrap();
    let init = seq.boost(0.0);
    let op = build_dirichlet(16, 1.0, &Kernel::nearest_neighbor()).unwrap();
    let mut cfg = SimConfig::new(op, 1e-3, 2.0);
    cfg.record_every = 50;
    let (_, diag) = integrate(&init, &cfg).unwrap();
    let (times, peaks) = peak_trace(&diag);
    assert_eq!(times.len(), peaks.len());
    assert!(peaks.iter().all(|&p| p == 0));
    let tie = LatticeState::from_fn(BoundaryCondition::Dirichlet, 3, |n| ONE * if n.abs() == 2 { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(peak_index(&tie), -2);
}

#[test]
fn diagnostics_csv_header() {
    let diag = DiagnosticsSeries::default();
    let mut buf = Vec::new();
    diag.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), "t,mass,energy,peak_index,sup_norm");
}
