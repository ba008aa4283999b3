//! Modulational instability of the plane wave `u_n = A e^{iA²t}`.

use crate::error::{invalid, require_positive, Result};
use crate::kernels::{reduce_wavenumber, Kernel};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Default series tolerance for the MI quantities.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Perturbation wavenumber `k` of a plane wave of amplitude `A`.
#[derive(Debug, Clone, Copy)]
pub struct MiQuery<'a> {
    pub k: f64,
    pub amplitude: f64,
    pub eps: f64,
    pub kernel: &'a Kernel,
    pub tol: f64,
}

impl<'a> MiQuery<'a> {
    pub fn new(k: f64, amplitude: f64, eps: f64, kernel: &'a Kernel) -> Self {
        Self { k, amplitude, eps, kernel, tol: DEFAULT_TOL }
    }

    fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k.abs() <= PI) {
            return Err(invalid("k", format!("must lie in [-π, π], got {}", self.k)));
        }
        require_positive("A", self.amplitude)?;
        require_positive("eps", self.eps)?;
        require_positive("tol", self.tol)
    }

    fn eps_w(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.eps * w_tilde(self.k, self.kernel, self.tol / self.eps)?)
    }
}

/// `w̃(k) = Σ_{m≥1} j(m)(1 − cos km)`.
pub fn w_tilde(k: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    Ok(kernel.cosine_sum(k, tol)?.value)
}

/// `Φ = ε w̃(k) − A²`.
pub fn phi(q: &MiQuery) -> Result<f64> {
    Ok(q.eps_w()? - q.amplitude * q.amplitude)
}

/// `Ω² = 4 ε w̃ (ε w̃ − A²)`.
pub fn omega_squared(q: &MiQuery) -> Result<f64> {
    let ew = q.eps_w()?;
    Ok(4.0 * ew * (ew - q.amplitude * q.amplitude))
}

/// True iff `Φ < 0`.
pub fn is_unstable(q: &MiQuery) -> Result<bool> {
    Ok(phi(q)? < 0.0)
}

/// Amplitude on the neutral curve `Φ = 0`: `sqrt(ε w̃(k))`.
pub fn threshold_amplitude(k: f64, eps: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    require_positive("eps", eps)?;
    if reduce_wavenumber(k) == 0.0 {
        return Err(invalid("k", "threshold curve excludes k = 0"));
    }
    Ok((eps * w_tilde(k, kernel, tol / eps)?).sqrt())
}

/// `A₀ = sqrt(4ε(1 − 2^{−(1+α)}) ζ(1+α))` for the power law.
pub fn amplitude_a0(eps: f64, alpha: f64) -> Result<f64> {
    require_positive("eps", eps)?;
    if alpha == f64::INFINITY {
        return Ok(2.0 * eps.sqrt());
    }
    let kernel = Kernel::power_law(alpha)?;
    let s = 1.0 + alpha;
    Ok((4.0 * eps * (1.0 - 2f64.powf(-s)) * kernel.total()).sqrt())
}

/// `A₀ = sqrt(2ε w̃(π))` for any kernel.
pub fn amplitude_a0_for(eps: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    require_positive("eps", eps)?;
    Ok((2.0 * eps * w_tilde(PI, kernel, tol)?).sqrt())
}

/// Most unstable wavenumber in `(0, π]`.
///
/// Below `A₀` this is the root of `w̃(k) = A²/(2ε)`, found by bisection to
/// `|Δk| ≤ 1e-13`; at or above `A₀` it is `π`.
pub fn k_max(amplitude: f64, eps: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    require_positive("A", amplitude)?;
    require_positive("eps", eps)?;
    let target = amplitude * amplitude / (2.0 * eps);
    // A few ulps of slack so A = A₀ from the closed form lands on the saturated branch.
    if w_tilde(PI, kernel, tol)? <= target * (1.0 + 4.0 * f64::EPSILON) {
        return Ok(PI);
    }
    let (mut lo, mut hi) = (0.0, PI);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if w_tilde(mid, kernel, tol)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum of `Ω²` over `k ∈ [0, π]` predicted by the two branches:
/// `−A⁴` below `A₀`, `−A₀²(2A² − A₀²)` above.
pub fn omega_squared_min(amplitude: f64, eps: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    let a0 = amplitude_a0_for(eps, kernel, tol)?;
    let a2 = amplitude * amplitude;
    if amplitude < a0 {
        Ok(-a2 * a2)
    } else {
        Ok(-a0 * a0 * (2.0 * a2 - a0 * a0))
    }
}

/// Smallest `Ω²` on an even grid of `points + 1` nodes over `[0, π]`, as `(k, Ω²)`.
pub fn omega_squared_grid_min(
    amplitude: f64,
    eps: f64,
    kernel: &Kernel,
    tol: f64,
    points: usize,
) -> Result<(f64, f64)> {
    if points < 1 {
        return Err(invalid("points", "must be >= 1"));
    }
    let vals: Vec<(f64, f64)> = (0..=points)
        .into_par_iter()
        .map(|i| {
            let k = PI * i as f64 / points as f64;
            let q = MiQuery { k, amplitude, eps, kernel, tol };
            omega_squared(&q).map(|v| (k, v))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b }))
}

/// Small-`k` behaviour `w̃(k) ≈ C |k|^α`, sampled on `k = π 2^{−j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallKFit {
    pub ks: Vec<f64>,
    /// `w̃(k) / k^α` at each `k`.
    pub ratios: Vec<f64>,
    /// Ratio at the smallest `k`.
    pub c: f64,
    /// Change of the ratio over the last dyadic step.
    pub spread: f64,
}

/// Fits `C` for `α ∈ (0, 2)` from `levels` dyadic wavenumbers starting at `π/2`.
pub fn small_k_constant(kernel: &Kernel, levels: usize, tol: f64) -> Result<SmallKFit> {
    let alpha = kernel.alpha();
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid("alpha", "small-k power law holds for 0 < alpha < 2"));
    }
    if levels < 2 {
        return Err(invalid("levels", "need at least 2 levels"));
    }
    let ks: Vec<f64> = (1..=levels).map(|j| PI * 0.5f64.powi(j as i32)).collect();
    let ratios = ks
        .iter()
        .map(|&k| w_tilde(k, kernel, tol).map(|w| w / k.powf(alpha)))
        .collect::<Result<Vec<_>>>()?;
    let c = ratios[levels - 1];
    let spread = (ratios[levels - 1] - ratios[levels - 2]).abs();
    Ok(SmallKFit { ks, ratios, c, spread })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(a: f64) -> Kernel {
        Kernel::power_law(a).unwrap()
    }

    #[test]
    fn w_tilde_at_pi() {
        let w = w_tilde(PI, &pl(1.0), 1e-13).unwrap();
        assert!((w - PI * PI / 4.0).abs() < 1e-12);
        assert_eq!(w_tilde(0.0, &pl(1.0), 1e-13).unwrap(), 0.0);
    }

    #[test]
    fn phi_and_threshold_examples() {
        let k = pl(1.0);
        let q = MiQuery::new(PI, 1.0, 1.0, &k);
        assert!((phi(&q).unwrap() - (PI * PI / 4.0 - 1.0)).abs() < 1e-12);
        let q0 = MiQuery::new(0.0, 0.7, 1.0, &k);
        assert!((phi(&q0).unwrap() + 0.49).abs() < 1e-15);
        assert!(is_unstable(&q0).unwrap());
        assert!(is_unstable(&MiQuery::new(PI, 10.0, 1.0, &k)).unwrap());
        let a = threshold_amplitude(PI, 1.0, &k, 1e-13).unwrap();
        assert!((a - PI / 2.0).abs() < 1e-12);
        assert!(threshold_amplitude(0.0, 1.0, &k, 1e-13).is_err());
    }

    #[test]
    fn a0_values() {
        assert!((amplitude_a0(1.0, 1.0).unwrap() - 2.221_441_469).abs() < 1e-8);
        let a = amplitude_a0(1.0, 1.0).unwrap();
        assert!((amplitude_a0(4.0, 1.0).unwrap() - 2.0 * a).abs() < 1e-13);
        assert!((amplitude_a0(1.0, 60.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((amplitude_a0_for(1.0, &pl(1.0), 1e-13).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn kmax_saturates_above_a0() {
        let k = pl(1.0);
        let a0 = amplitude_a0(1.0, 1.0).unwrap();
        assert_eq!(k_max(a0 * 1.01, 1.0, &k, 1e-13).unwrap(), PI);
    }

    #[test]
    fn small_k_constant_alpha_one() {
        let fit = small_k_constant(&pl(1.0), 16, 1e-14).unwrap();
        assert!((fit.c - PI / 2.0).abs() < 2e-5);
        assert!(small_k_constant(&pl(2.5), 10, 1e-12).is_err());
    }

    #[test]
    fn query_rejects_bad_input() {
        let k = pl(1.0);
        assert!(phi(&MiQuery::new(4.0, 1.0, 1.0, &k)).is_err());
        assert!(phi(&MiQuery::new(1.0, 0.0, 1.0, &k)).is_err());
    }
}
