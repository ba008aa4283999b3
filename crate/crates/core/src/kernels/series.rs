//! Cosine series `Σ_{n ≥ first} j(n) (1 − cos nk)` over an α-kernel.
//!
//! The head of the kernel is summed explicitly. Beyond it `j(n) = A n^{-s}`
//! and the tail splits into a non-oscillatory piece `A ζ(s, M + 1)`, which is
//! exact, and an oscillatory piece `A Σ_{n>M} n^{-s} cos nk`. The latter is
//! either small enough to drop (direct route) or is evaluated with
//! Euler–Boole summation, which converges fast once `M |k|` exceeds the
//! number of derivative terms used.

use super::zeta::hurwitz_unchecked;
use super::Kernel;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest number of explicit terms any single evaluation may sum.
pub const MAX_TERMS: usize = 20_000_000;

const BOOLE_ORDER: usize = 40;

/// A series value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub error: f64,
    pub terms: usize,
}

/// Reduces `k` to `(−π, π]`.
pub fn reduce_wavenumber(k: f64) -> f64 {
    let r = k - 2.0 * PI * (k / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Neumaier compensated accumulator.
#[derive(Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[inline]
fn one_minus_cos(x: f64) -> f64 {
    let h = (0.5 * x).sin();
    2.0 * h * h
}

pub(crate) fn cosine_sum(kernel: &Kernel, k: f64, first: usize, tol: f64) -> Result<SeriesValue> {
    let first = first.max(1);
    let k = reduce_wavenumber(k);
    if k == 0.0 {
        return Ok(SeriesValue { value: 0.0, error: 0.0, terms: 0 });
    }
    let head_len = kernel.head.len();
    let mut acc = Compensated::default();
    for n in first..=head_len {
        acc.add(kernel.head[n - 1] * one_minus_cos(n as f64 * k));
    }
    let amp = kernel.tail_amplitude;
    if amp == 0.0 {
        return Ok(SeriesValue {
            value: acc.value(),
            error: 0.0,
            terms: head_len.saturating_sub(first - 1),
        });
    }

    let s = 1.0 + kernel.alpha;
    let start = head_len.max(first - 1);
    let kk = k.abs();

    // Direct route: the dropped oscillatory tail is bounded by A ζ(s, M+1).
    let direct_m = {
        let m = (amp / (kernel.alpha * tol)).powf(1.0 / kernel.alpha).ceil();
        if m.is_finite() { m.max(start as f64) } else { f64::INFINITY }
    };
    // Boole route: needs M |k| well above the derivative order.
    let boole_m = (2.0 * (s + BOOLE_ORDER as f64) / kk).ceil().max(start as f64);

    let use_direct = direct_m <= boole_m;
    let m = if use_direct { direct_m } else { boole_m };
    if m - start as f64 > MAX_TERMS as f64 {
        return Err(Error::ToleranceUnreachable { tol, max_terms: MAX_TERMS });
    }
    let m = m as usize;

    for n in (start + 1..=m).rev() {
        let x = n as f64;
        acc.add(amp * x.powf(-s) * one_minus_cos(x * k));
    }
    let a = (m + 1) as f64;
    let flat_tail = amp * hurwitz_unchecked(s, a);

    if use_direct {
        // Σ_{n>M} j(n)(1 − cos nk) lies in [0, 2 A ζ(s, M+1)]; report the midpoint.
        acc.add(flat_tail);
        return Ok(SeriesValue {
            value: acc.value(),
            error: flat_tail.min(amp * (a - 1.0).powf(-kernel.alpha) / kernel.alpha),
            terms: m + 1 - first,
        });
    }

    let (osc, err) = boole_tail(s, a, k, tol / (4.0 * amp))?;
    acc.add(flat_tail);
    acc.add(-amp * osc);
    Ok(SeriesValue {
        value: acc.value(),
        error: amp * err,
        terms: m + 1 - first,
    })
}

/// `Re Σ_{n≥0} e^{ik(a+n)} (a+n)^{-s}` with its error estimate.
fn boole_tail(s: f64, a: f64, k: f64, tol: f64) -> Result<(f64, f64)> {
    let z = Complex64::from_polar(1.0, k);
    let one_minus_z = Complex64::new(1.0, 0.0) - z;
    let c = z / one_minus_z;

    let mut h = Vec::with_capacity(BOOLE_ORDER + 1);
    h.push(one_minus_z.inv());
    let mut inv_fact = vec![1.0; BOOLE_ORDER + 1];
    for r in 1..=BOOLE_ORDER {
        inv_fact[r] = inv_fact[r - 1] / r as f64;
    }

    // f^{(j)}(a) = (−1)^j (s)_j a^{−s−j}
    let mut deriv = a.powf(-s);
    let mut total = h[0] * deriv;
    let mut last = (h[0] * deriv).norm();
    for j in 1..=BOOLE_ORDER {
        let mut hj = Complex64::new(0.0, 0.0);
        for r in 1..=j {
            hj += h[j - r] * inv_fact[r];
        }
        hj *= c;
        h.push(hj);
        deriv *= -(s + (j - 1) as f64) / a;
        let term = hj * deriv;
        total += term;
        // Odd or even coefficients vanish at k = π, so require two small terms in a row.
        let size = term.norm();
        if size + last < tol {
            let phase = Complex64::from_polar(1.0, k * a);
            return Ok(((phase * total).re, 2.0 * (size + last)));
        }
        last = size;
    }
    Err(Error::ToleranceUnreachable { tol, max_terms: BOOLE_ORDER })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(alpha: f64, k: f64, first: usize, terms: usize) -> f64 {
        let s = 1.0 + alpha;
        let mut acc = Compensated::default();
        for n in (first..=terms).rev() {
            let x = n as f64;
            acc.add(x.powf(-s) * one_minus_cos(x * k));
        }
        acc.value()
    }

    #[test]
    fn closed_form_alpha_one() {
        let kern = Kernel::power_law(1.0).unwrap();
        for &k in &[1e-3, 0.1, 0.7, 1.0, 2.5, PI] {
            let v = cosine_sum(&kern, k, 1, 1e-13).unwrap();
            let exact = PI * k / 2.0 - k * k / 4.0;
            assert!((v.value - exact).abs() < 1e-12, "k={k}: {} vs {exact}", v.value);
        }
    }

    #[test]
    fn closed_form_alpha_three() {
        let kern = Kernel::power_law(3.0).unwrap();
        for &k in &[1e-2, 0.3, 1.0, 2.0, 3.0] {
            let v = cosine_sum(&kern, k, 1, 1e-14).unwrap();
            let exact = PI * PI * k * k / 12.0 - PI * k.powi(3) / 12.0 + k.powi(4) / 48.0;
            assert!((v.value - exact).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn matches_brute_force_for_steep_kernel() {
        let kern = Kernel::power_law(2.5).unwrap();
        let v = cosine_sum(&kern, 1.3, 1, 1e-13).unwrap();
        // Tail beyond 1e5 terms is below 2e-13.
        let b = brute(2.5, 1.3, 1, 100_000);
        assert!((v.value - b).abs() < 1e-12);
    }

    #[test]
    fn partial_sum_from_two() {
        let kern = Kernel::power_law(1.0).unwrap();
        let k = 0.9;
        let full = cosine_sum(&kern, k, 1, 1e-13).unwrap().value;
        let from2 = cosine_sum(&kern, k, 2, 1e-13).unwrap().value;
        assert!((full - from2 - one_minus_cos(k)).abs() < 1e-13);
    }

    #[test]
    fn small_alpha_is_feasible() {
        let kern = Kernel::power_law(0.1).unwrap();
        let v = cosine_sum(&kern, 0.5, 1, 1e-10).unwrap();
        assert!(v.value.is_finite() && v.value > 0.0);
        assert!(v.error <= 1e-10);
    }

    #[test]
    fn reduction_is_periodic() {
        assert!((reduce_wavenumber(3.0 * PI) - PI).abs() < 1e-15);
        assert!((reduce_wavenumber(-PI) - PI).abs() < 1e-15);
        assert_eq!(reduce_wavenumber(0.5), 0.5);
    }
}
