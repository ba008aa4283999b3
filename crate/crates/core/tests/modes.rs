use fdnls_core::dynamics::mass;
use fdnls_core::kernels::Kernel;
use fdnls_core::modes::*;
use proptest::prelude::*;

fn pl(alpha: f64) -> Kernel {
    Kernel::power_law(alpha).unwrap()
}

#[test]
fn dnls_residual_matches_closed_form_everywhere() {
    for &rho in &[0.3, 1e-2, 1e-3] {
        let (eps, w) = (1.0, 1.0 / rho);
        let seq = dnls_onsite(w, eps, 40).unwrap();
        let r = eps / (w + 2.0 * eps);
        let q0 = (w + 2.0 * eps).sqrt();
        let mut expected: f64 = (1.0 / (1.0 + 2.0 * rho * rho / (1.0 + 2.0 * rho)) - 1.0).abs();
        for n in 1..=10 {
            let q = q0 * r.powi(n);
            let lq = eps * q * (2.0 - r - 1.0 / r);
            expected = expected.max((-w * q / (lq - q * q * q) - 1.0).abs());
        }
        let rep = residual_sup(&seq, 10).unwrap();
        assert!((rep.sup - expected).abs() < 1e-12, "rho={rho}: {} vs {expected}", rep.sup);
    }
}

#[test]
fn residual_shrinks_along_rho_ladder() {
    let k = pl(1.0);
    let res: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&rho| residual_sup(&fdnls_onsite(1.0 / rho, 1.0, &k, 128).unwrap(), 32).unwrap().sup)
        .collect();
    assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
    // O(ρ): the scaled residual stays bounded.
    let scaled: Vec<f64> = res.iter().zip([1e-2, 1e-3, 1e-4]).map(|(r, rho)| r / rho).collect();
    assert!(scaled.iter().all(|&s| s < 10.0), "{scaled:?}");
}

#[test]
fn leading_coefficients_converge() {
    let k = pl(1.0);
    for kind in [ModeKind::Onsite, ModeKind::Offsite] {
        let dev: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&rho| {
                let seq = match kind {
                    ModeKind::Onsite => fdnls_onsite(1.0 / rho, 1.0, &k, 32),
                    ModeKind::Offsite => fdnls_offsite(1.0 / rho, 1.0, &k, 32),
                }
                .unwrap();
                leading_order_ratios(&seq).iter().map(|(_, r)| (r - 1.0).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(dev[0] > dev[1] && dev[1] > dev[2], "{kind:?} {dev:?}");
        assert!(dev[2] < 1e-2);
    }
}

#[test]
fn tail_bracket_below_rho_star() {
    let eps1 = 0.1;
    for &alpha in &[0.5, 1.0, 2.0, 4.0] {
        let k = pl(alpha);
        let rho = 0.9 * rho_star(&k, eps1).unwrap();
        for seq in [fdnls_onsite(1.0 / rho, 1.0, &k, 128).unwrap(), fdnls_offsite(1.0 / rho, 1.0, &k, 128).unwrap()] {
            for (n, r) in leading_order_ratios(&seq) {
                assert!(r >= 1.0 / (1.0 + eps1) && r <= 1.0 + eps1, "alpha={alpha} {:?} n={n} r={r}", seq.kind);
            }
        }
    }
}

#[test]
fn fdnls_tail_decay() {
    let seq = fdnls_onsite(1e3, 1.0, &pl(1.5), 256).unwrap();
    let rep = tail_diagnostics(&seq).unwrap();
    let q = &seq.values;
    assert!((q[64] / q[32] / 2f64.powf(-2.5) - 1.0).abs() < 0.05);
    assert!((rep.algebraic_exponent - 2.5).abs() < 0.05);
    assert!(rep.algebraic_r2 > rep.log_linear_r2);
    assert!(tail_diagnostics(&fdnls_onsite(1e3, 1.0, &pl(1.5), 32).unwrap()).is_err());
}

#[test]
fn dnls_tail_is_exponential() {
    let rho: f64 = 0.2;
    let seq = dnls_onsite(1.0 / rho, 1.0, 64).unwrap();
    let rep = tail_diagnostics(&seq).unwrap();
    assert!((rep.log_linear_slope - (rho / (1.0 + 2.0 * rho)).ln()).abs() < 1e-10);
    assert!(rep.log_linear_r2 > 1.0 - 1e-12);
    assert!(rep.log_linear_r2 > rep.algebraic_r2);
}

#[test]
fn offsite_reflection_is_exact() {
    let seq = fdnls_offsite(3.0, 1.0, &pl(0.8), 20).unwrap();
    for n in -30i64..=30 {
        assert_eq!(seq.value(n), seq.value(1 - n));
    }
    let on = fdnls_onsite(3.0, 1.0, &pl(0.8), 20).unwrap();
    let refl = on.reflected();
    assert_eq!(refl.len(), 41);
    assert!(refl.iter().zip(refl.iter().rev()).all(|(a, b)| a == b));
}

#[test]
fn boost_properties() {
    let seq = fdnls_onsite(2.0, 1.0, &pl(1.0), 16).unwrap();
    let still = seq.boost(0.0);
    assert!(still.amplitudes.iter().all(|z| z.im == 0.0));
    let moving = seq.boost(1.0);
    for (i, z) in moving.amplitudes.iter().enumerate() {
        assert!((z.norm() - seq.value(moving.site(i))).abs() < 1e-14);
    }
    assert!((mass(&moving) - mass(&still)).abs() < 1e-12 * mass(&still));
}

#[test]
fn dnls_offsite_examples() {
    let (w, eps) = (100.0, 1.0);
    let g = dnls_offsite(w, eps, 8).unwrap();
    let q = dnls_onsite(w, eps, 8).unwrap();
    assert!((g.value(1) - 101f64.sqrt()).abs() < 1e-12);
    assert!((g.value(2) / g.value(1) - 0.01 / 1.02).abs() < 1e-15);
    assert!(g.value(1) < q.value(0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recurrences_stay_positive(w in 0.05f64..100.0, eps in 0.05f64..5.0, alpha in 0.2f64..8.0) {
        let k = pl(alpha);
        let on = fdnls_onsite(w, eps, &k, 48).unwrap();
        let off = fdnls_offsite(w, eps, &k, 48).unwrap();
        prop_assert!(on.values.iter().all(|&v| v > 0.0));
        prop_assert!(off.values.iter().all(|&v| v > 0.0));
    }
}
