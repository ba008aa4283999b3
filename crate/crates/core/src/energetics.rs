//! Energies of stationary sequences and the Peierls–Nabarro barrier.

use crate::error::{invalid, require_positive, Result};
use crate::kernels::{Compensated, Kernel};
use crate::modes::{fdnls_offsite, fdnls_onsite, ModeKind, ModeSequence, Model};
use rayon::prelude::*;
use serde::Serialize;

/// Relative slack of the tail bracket used by the truncation bounds.
pub const BRACKET_EPS1: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PnbReport {
    pub w_a: f64,
    pub eps: f64,
    /// `None` for the nearest-neighbour model.
    pub alpha: Option<f64>,
    pub e_a: f64,
    pub e_b: f64,
    /// `E_A(w_A) − E_B(w_A/2)`.
    pub delta_e: f64,
    pub truncation_error_bound: f64,
}

/// Closed-form energies `(E_A, E_B)` of the nearest-neighbour onsite and
/// offsite sequences at frequency `w`.
pub fn dnls_energies(eps: f64, w: f64) -> Result<(f64, f64)> {
    require_positive("eps", eps)?;
    require_positive("w", w)?;
    let big = w + 2.0 * eps;
    let big4 = big.powi(4);
    let e4 = eps.powi(4);
    let e_a = eps * (w + eps) * big / (w + 3.0 * eps) - big * big * (big4 + e4) / (4.0 * (big4 - e4));
    let e_b = eps * (w + eps).powi(2) / (w + 3.0 * eps) - (w + eps).powi(2) / (2.0 * (1.0 - e4 / big4));
    Ok((e_a, e_b))
}

pub fn dnls_pnb(eps: f64, w_a: f64) -> Result<PnbReport> {
    let (e_a, _) = dnls_energies(eps, w_a)?;
    let (_, e_b) = dnls_energies(eps, 0.5 * w_a)?;
    Ok(PnbReport {
        w_a,
        eps,
        alpha: None,
        e_a,
        e_b,
        delta_e: e_a - e_b,
        truncation_error_bound: 0.0,
    })
}

/// `γ(k) = −ΔE_AB / w_A²` at `ε = k w_A`, evaluated at `w_A = 1`.
pub fn gamma_of_k(k: f64) -> Result<f64> {
    require_positive("k", k)?;
    Ok(-dnls_pnb(k, 1.0)?.delta_e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdnlsEnergies {
    pub e_a: f64,
    pub e_b: f64,
    pub truncation_bound: f64,
}

/// Energy of one long-range sequence and a bound on what truncation dropped.
///
/// The row through the centre runs to `N` and is closed beyond it with the
/// first-order tail model; the remaining pair sum runs over `1..=n_e`
/// (offsite: `2..=n_e`).
fn sequence_energy(seq: &ModeSequence, n_e: usize) -> Result<(f64, f64)> {
    let n = seq.n();
    if n_e > n {
        return Err(invalid("N_E", format!("must be <= N = {n}")));
    }
    let k = &seq.kernel;
    let v = &seq.values;
    let eps = seq.eps;
    let rho = seq.rho();
    let c0 = v[0];
    let total = k.total();
    let offsite = seq.kind == ModeKind::Offsite;
    let first = if offsite { 2 } else { 1 };
    let coupling = |a: usize, b: usize| {
        if offsite {
            k.j(a.abs_diff(b)) + k.j(a + b - 1)
        } else {
            k.j(a.abs_diff(b)) + k.j(a + b)
        }
    };
    // Weight of the row term and its far-field profile.
    let row_weight = |m: usize| if offsite { k.j(m) + k.j(m - 1) } else { k.j(m) };

    let mut row = Compensated::default();
    for m in (first..=n).rev() {
        row.add(row_weight(m) * (v[m] - c0).powi(2));
    }
    // Σ_{m>N} c_m (c0 − ρ c_m c0)²
    let (t1, t2, t3) = if offsite {
        let mut t2 = Compensated::default();
        let mut t3 = Compensated::default();
        for m in (n + 1..=64 * n).rev() {
            let c = row_weight(m);
            t2.add(c * c);
            t3.add(c * c * c);
        }
        (k.tail_sum(n) + k.tail_sum(n - 1), t2.value(), t3.value())
    } else {
        (k.tail_sum(n), k.tail_power_sum(n, 2.0), k.tail_power_sum(n, 3.0))
    };
    row.add(c0 * c0 * (t1 - 2.0 * rho * t2 + rho * rho * t3));

    let pair_rows = |lo: usize, hi: usize, upper: bool| -> f64 {
        let rows: Vec<f64> = (lo..=hi)
            .into_par_iter()
            .map(|a| {
                let mut acc = Compensated::default();
                let end = if upper { a - 1 } else { hi };
                for b in first..=end {
                    if b != a {
                        acc.add(coupling(a, b) * (v[a] - v[b]).powi(2));
                    }
                }
                acc.value()
            })
            .collect();
        let mut acc = Compensated::default();
        for r in rows {
            acc.add(r);
        }
        acc.value()
    };

    let pairs = if n_e >= first { pair_rows(first, n_e, false) } else { 0.0 };

    let mut quartic = Compensated::default();
    for m in (1..=n).rev() {
        quartic.add(v[m].powi(4));
    }
    let potential = if offsite {
        0.5 * quartic.value()
    } else {
        0.25 * c0.powi(4) + 0.5 * quartic.value()
    };
    let energy = eps * row.value() + 0.5 * eps * pairs - potential;

    // Dropped pairs with both sites computed.
    let computed = if n > n_e { pair_rows((n_e + 1).max(first), n, true) } else { 0.0 };
    // Dropped pairs reaching beyond N, under the tail bracket.
    let amp = (1.0 + BRACKET_EPS1) * rho * c0;
    let s2 = amp * amp * t2;
    let mut beyond = Compensated::default();
    for (a, &va) in v.iter().enumerate().take(n + 1).skip(first) {
        let far = if offsite {
            k.tail_sum(n - a) + k.tail_sum(n + a - 1)
        } else {
            k.tail_sum(n - a) + k.tail_sum(n + a)
        };
        beyond.add(va * va * far);
    }
    let t4 = if offsite { 16.0 * k.tail_power_sum(n - 1, 4.0) } else { k.tail_power_sum(n, 4.0) };
    let bound = eps * computed
        + eps * (8.0 * total * s2 + beyond.value())
        + eps * 2.0 * BRACKET_EPS1 * rho * c0 * c0 * t2
        + 0.5 * amp.powi(4) * t4;
    Ok((energy, bound))
}

/// Energies of an onsite and an offsite long-range sequence, truncated at `n_e`.
pub fn fdnls_energies(onsite: &ModeSequence, offsite: &ModeSequence, n_e: usize) -> Result<FdnlsEnergies> {
    if onsite.kind != ModeKind::Onsite || offsite.kind != ModeKind::Offsite {
        return Err(invalid("sequences", "need one onsite and one offsite sequence"));
    }
    if onsite.model != Model::Fdnls || offsite.model != Model::Fdnls {
        return Err(invalid("sequences", "long-range energies need long-range sequences"));
    }
    let (e_a, b_a) = sequence_energy(onsite, n_e)?;
    let (e_b, b_b) = sequence_energy(offsite, n_e)?;
    Ok(FdnlsEnergies { e_a, e_b, truncation_bound: b_a + b_b })
}

/// Barrier between the onsite mode at `w_A` and the offsite mode at `w_A/2`.
pub fn fdnls_pnb(w_a: f64, eps: f64, kernel: &Kernel, n: usize, n_e: usize) -> Result<PnbReport> {
    let a = fdnls_onsite(w_a, eps, kernel, n)?;
    let b = fdnls_offsite(0.5 * w_a, eps, kernel, n)?;
    let e = fdnls_energies(&a, &b, n_e)?;
    Ok(PnbReport {
        w_a,
        eps,
        alpha: Some(kernel.alpha()),
        e_a: e.e_a,
        e_b: e.e_b,
        delta_e: e.e_a - e.e_b,
        truncation_error_bound: e.truncation_bound,
    })
}

/// `ε²` coefficient of `ΔE_AB + w_A²/8` as `ε → 0`:
/// `J² − (2J − j(1))²/2 − 2Σ j(n)² + 2Σ_{n≥2}(j(n) + j(n−1))²`.
///
/// For the power law this is
/// `2Σ_{n≥2}(n^{−(1+α)} + (n−1)^{−(1+α)})² − (ζ(1+α) − 1)² − 2ζ(2+2α) + 1/2`.
pub fn small_eps_coefficient(kernel: &Kernel) -> f64 {
    let total = kernel.total();
    let sq = kernel.tail_power_sum(0, 2.0);
    // Σ_{n≥2} j(n) j(n−1), explicit up to m, then bracketed by Hurwitz sums.
    let m = 100_000usize;
    let mut cross = Compensated::default();
    for n in (2..=m).rev() {
        cross.add(kernel.j(n) * kernel.j(n - 1));
    }
    let s = 2.0 * (1.0 + kernel.alpha());
    let a2 = kernel.tail_constant().powi(2);
    if a2 > 0.0 {
        let lo = crate::kernels::hurwitz_unchecked(s, m as f64 + 1.0);
        let hi = crate::kernels::hurwitz_unchecked(s, m as f64);
        cross.add(0.5 * a2 * (lo + hi));
    }
    let t = kernel.tail_power_sum(1, 2.0) + sq + 2.0 * cross.value();
    total * total - (2.0 * total - kernel.j(1)).powi(2) / 2.0 - 2.0 * sq + 2.0 * t
}

/// `(ΔE_AB + w_A²/8) / ε²` from the computed sequences.
pub fn small_eps_measured(w_a: f64, eps: f64, kernel: &Kernel, n: usize, n_e: usize) -> Result<f64> {
    let r = fdnls_pnb(w_a, eps, kernel, n, n_e)?;
    Ok((r.delta_e + w_a * w_a / 8.0) / (eps * eps))
}

/// Barrier along a sweep of couplings; returns reports in input order.
pub fn pnb_eps_scan(w_a: f64, kernel: &Kernel, eps: &[f64], n: usize, n_e: usize) -> Result<Vec<PnbReport>> {
    eps.par_iter().map(|&e| fdnls_pnb(w_a, e, kernel, n, n_e)).collect()
}

/// Masses of the reflected onsite and offsite sequences at equal `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallAlphaMass {
    pub n_a: f64,
    pub n_b: f64,
    /// `N_B / N_A`.
    pub ratio: f64,
    /// `N_A α / (2ε)`.
    pub scaled_a: f64,
}

/// Mass of the reflected sequence, with the tail beyond `N` continued by the
/// kernel profile.
pub fn sequence_mass(seq: &ModeSequence) -> f64 {
    let n = seq.n();
    let v = &seq.values;
    let mut acc = Compensated::default();
    let j_n = seq.kernel.j(n);
    if j_n > 0.0 {
        acc.add(2.0 * (v[n] / j_n).powi(2) * seq.kernel.tail_power_sum(n, 2.0));
    }
    for m in (1..=n).rev() {
        acc.add(2.0 * v[m] * v[m]);
    }
    if seq.kind == ModeKind::Onsite {
        acc.add(v[0] * v[0]);
    }
    acc.value()
}

pub fn small_alpha_mass(eps: f64, w: f64, alpha: f64, n: usize) -> Result<SmallAlphaMass> {
    let kernel = Kernel::power_law(alpha)?;
    let a = fdnls_onsite(w, eps, &kernel, n)?;
    let b = fdnls_offsite(w, eps, &kernel, n)?;
    let n_a = sequence_mass(&a);
    let n_b = sequence_mass(&b);
    Ok(SmallAlphaMass { n_a, n_b, ratio: n_b / n_a, scaled_a: n_a * alpha / (2.0 * eps) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_limits() {
        let (a, b) = dnls_energies(1e-9, 2.0).unwrap();
        assert!((a + 1.0).abs() < 1e-8);
        assert!((b + 2.0).abs() < 1e-8);
    }

    #[test]
    fn gamma_is_homogeneous() {
        let k = 0.37;
        let g1 = gamma_of_k(k).unwrap();
        let r = dnls_pnb(k * 100.0, 100.0).unwrap();
        assert!((g1 + r.delta_e / 1e4).abs() < 1e-10);
    }

    #[test]
    fn coefficient_alpha_one() {
        let c = small_eps_coefficient(&Kernel::power_law(1.0).unwrap());
        assert!((c - 1.408_18).abs() < 1e-4, "{c}");
    }

    #[test]
    fn coefficient_forms_agree() {
        let k = Kernel::power_law(2.0).unwrap();
        let z = k.total();
        let z6 = crate::kernels::riemann_zeta(6.0).unwrap();
        let t: f64 = (2..2_000_000).map(|n| (k.j(n) + k.j(n - 1)).powi(2)).sum();
        let printed = 2.0 * t - (z - 1.0).powi(2) - 2.0 * z6 + 0.5;
        assert!((small_eps_coefficient(&k) - printed).abs() < 1e-10);
    }

    #[test]
    fn refuses_long_truncation() {
        let k = Kernel::power_law(1.0).unwrap();
        let a = fdnls_onsite(1.0, 0.1, &k, 16).unwrap();
        let b = fdnls_offsite(0.5, 0.1, &k, 16).unwrap();
        assert!(fdnls_energies(&a, &b, 17).is_err());
        assert!(fdnls_energies(&b, &a, 8).is_err());
    }
}
