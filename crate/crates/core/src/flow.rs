//! Long-range versus nearest-neighbour flows: discrepancy, dispersive
//! kernel and the unitary gap.

use crate::dynamics::{integrate_with, SimConfig, Stepper};
use crate::error::{invalid, require_positive, Result};
use crate::kernels::Kernel;
use crate::lattice::{build_dirichlet, build_periodic, symbol_sup_gap, BoundaryCondition, LatticeState, SUP_GAP_POINTS};
use crate::modes::linear_fit;
use crate::quadrature::adaptive;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Quadrature changes below this stop the refinement.
pub const QUADRATURE_TOL: f64 = 1e-9;

/// Recorded discrepancy between the two flows and its Gronwall bound.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FlowComparison {
    pub times: Vec<f64>,
    /// `‖u^{(α)}(t) − v(t)‖`.
    pub discrepancy: Vec<f64>,
    /// `t e^{Ct} gap ‖f‖`.
    pub bound: Vec<f64>,
    /// `C = 3 max(sup ‖u‖²_∞, sup ‖v‖²_∞)` over `[0, t]`.
    pub lipschitz: Vec<f64>,
    /// Sup of the symbol difference.
    pub gap: f64,
}

impl FlowComparison {
    pub const CSV_HEADER: &'static str = "t,discrepancy,bound";

    pub fn within_bound(&self) -> bool {
        self.discrepancy.iter().zip(&self.bound).all(|(d, b)| d <= b)
    }
}

fn l2(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sup_sq(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
}

/// Evolves `f` under the power-law and the nearest-neighbour operators with
/// the focusing cubic and compares them every `record_every` steps.
pub fn evolve_pair(
    f: &LatticeState,
    alpha: f64,
    eps: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<FlowComparison> {
    require_positive("eps", eps)?;
    let long = Kernel::power_law(alpha)?;
    let near = Kernel::nearest_neighbor();
    let n = f.half_width();
    let (op_a, op_nn) = match f.bc {
        BoundaryCondition::Dirichlet => (build_dirichlet(n, eps, &long)?, build_dirichlet(n, eps, &near)?),
        BoundaryCondition::Periodic => (build_periodic(n, eps, &long)?, build_periodic(n, eps, &near)?),
    };
    let mut cfg_a = SimConfig::new(op_a, dt, t_end);
    cfg_a.record_every = record_every;
    let mut cfg_nn = SimConfig::new(op_nn, dt, t_end);
    cfg_nn.record_every = record_every;
    cfg_nn.validate()?;
    let gap = symbol_sup_gap(alpha, eps, SUP_GAP_POINTS)?.measured;
    let norm_f = l2(&f.amplitudes);

    let mut stepper_nn = Stepper::new(&cfg_nn)?;
    let (_, dt_eff) = cfg_a.steps();
    let mut v = f.clone();
    let mut out = FlowComparison { gap, ..Default::default() };
    let mut sup = sup_sq(&f.amplitudes);
    let mut last_step = 0;

    integrate_with(f, &cfg_a, |step, u| {
        for _ in last_step..step {
            stepper_nn.step(&mut v, dt_eff)?;
            sup = sup.max(sup_sq(&v.amplitudes));
        }
        last_step = step;
        sup = sup.max(sup_sq(&u.amplitudes));
        let diff: Vec<Complex64> = u.amplitudes.iter().zip(&v.amplitudes).map(|(a, b)| a - b).collect();
        let t = u.time;
        let c = 3.0 * sup;
        out.times.push(t);
        out.discrepancy.push(l2(&diff));
        out.bound.push(t * (c * t).exp() * gap * norm_f);
        out.lipschitz.push(c);
        Ok(())
    })?;
    Ok(out)
}

/// Range of sites `|n| ≤ reach` where the kernel at time `t` is non-negligible.
pub fn kernel_reach(alpha: f64, t: f64) -> usize {
    let speed = if alpha > 1.0 && alpha.is_finite() {
        crate::kernels::hurwitz_unchecked(alpha, 1.0)
    } else if alpha.is_infinite() {
        1.0
    } else {
        2.0
    };
    (2.0 * t * speed + 4.0 * t.cbrt() + 20.0).ceil() as usize
}

/// `K_t(n) = (1/π) ∫_0^π e^{−2it w̃(k)} cos(nk) dk` for each `n` in `sites`.
///
/// `kernel` may be a power law or the nearest-neighbour kernel.
pub fn dispersive_kernel_batch(sites: &[i64], t: f64, kernel: &Kernel) -> Result<Vec<Complex64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    if t == 0.0 {
        return Ok(sites.iter().map(|&n| Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0)).collect());
    }
    let series_tol = 1e-12 / t.max(1.0);
    let max_freq = 2.0 * t + sites.iter().map(|n| n.unsigned_abs()).max().unwrap_or(0) as f64;
    let initial = ((max_freq / 8.0).ceil() as usize).max(8);
    let (vals, _) = adaptive(0.0, PI, initial, initial << 8, QUADRATURE_TOL, |x, w| {
        let phase: Vec<Complex64> = x
            .par_iter()
            .zip(w)
            .map(|(&k, &wt)| {
                kernel
                    .cosine_sum(k, series_tol)
                    .map(|s| Complex64::from_polar(wt / PI, -2.0 * t * s.value))
            })
            .collect::<Result<_>>()?;
        Ok(sites
            .par_iter()
            .map(|&n| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, p) in x.iter().zip(&phase) {
                    acc += p * (n as f64 * k).cos();
                }
                acc
            })
            .collect())
    })?;
    Ok(vals)
}

/// Single value of the dispersive kernel.
pub fn dispersive_kernel(n: i64, t: f64, kernel: &Kernel) -> Result<Complex64> {
    Ok(dispersive_kernel_batch(&[n], t, kernel)?[0])
}

/// `e^{−2it} iⁿ J_n(2t)`, the nearest-neighbour kernel, with the Bessel
/// function from its trapezoidal integral representation.
pub fn nearest_neighbor_kernel(n: i64, t: f64) -> Complex64 {
    let z = 2.0 * t;
    let m = 4 * (z.abs() as usize + n.unsigned_abs() as usize) + 64;
    // J_n(z) = (1/π) ∫_0^π cos(nθ − z sin θ) dθ; the trapezoid rule is
    // spectrally accurate for this periodic integrand.
    let h = PI / m as f64;
    let mut s = 0.5 * ((0.0f64).cos() + (n as f64 * PI).cos());
    for i in 1..m {
        let th = i as f64 * h;
        s += (n as f64 * th - z * th.sin()).cos();
    }
    let bessel = s / m as f64;
    let i_pow = match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    Complex64::from_polar(1.0, -z) * i_pow * bessel
}

/// Sup of `|K_t(n)|` over the kernel's reach, for each `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDecay {
    pub times: Vec<f64>,
    pub sup_kernel: Vec<f64>,
    /// `p` in a least-squares fit `sup ∝ t^{−p}`.
    pub exponent: f64,
}

impl KernelDecay {
    pub const CSV_HEADER: &'static str = "t,sup_kernel";
}

pub fn kernel_decay(alpha: f64, times: &[f64]) -> Result<KernelDecay> {
    if times.len() < 2 {
        return Err(invalid("times", "need at least two times"));
    }
    let kernel = Kernel::power_law(alpha)?;
    let mut sups = Vec::with_capacity(times.len());
    for &t in times {
        require_positive("t", t)?;
        let reach = kernel_reach(alpha, t) as i64;
        let sites: Vec<i64> = (0..=reach).collect();
        let vals = dispersive_kernel_batch(&sites, t, &kernel)?;
        sups.push(vals.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    let (slope, _) = linear_fit(&lx, &ly);
    Ok(KernelDecay { times: times.to_vec(), sup_kernel: sups, exponent: -slope })
}

/// `Σ_{|n| ≤ reach} |K_t(n)|²`, which is 1 for a unitary flow.
pub fn kernel_parseval(alpha: f64, t: f64, reach: usize) -> Result<f64> {
    let kernel = Kernel::power_law(alpha)?;
    let sites: Vec<i64> = (0..=reach as i64).collect();
    let vals = dispersive_kernel_batch(&sites, t, &kernel)?;
    Ok(vals[0].norm_sqr() + 2.0 * vals[1..].iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Probe time `t_α = 2^{1+α}(2π + X₀)` for the unitary gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapProbe {
    pub alpha: f64,
    pub x0: f64,
    pub t_alpha: f64,
    pub eps: f64,
}

impl GapProbe {
    pub fn new(alpha: f64, x0: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        if !(x0 > 0.0 && x0 < 0.5 * PI) {
            return Err(invalid("X0", "must lie in (0, π/2)"));
        }
        Ok(Self { alpha, x0, t_alpha: 2f64.powf(1.0 + alpha) * (2.0 * PI + x0), eps: 1.0 })
    }

    /// Same probe evaluated at another time.
    pub fn at_time(mut self, t: f64) -> Self {
        self.t_alpha = t;
        self
    }
}

/// `‖(U^{(α)}(t/4) − U(t/4)) δ‖` for unit-impulse data.
pub fn unitary_gap(probe: &GapProbe) -> Result<f64> {
    unitary_gap_for(probe, &[(0, Complex64::new(1.0, 0.0))])
}

/// Gap for finitely supported data given as `(site, value)` pairs.
///
/// Both propagators are Fourier multipliers, so
/// `gap² = (1/2π) ∫ 4 sin²(X(k)/2) |f̂(k)|² dk` with
/// `X(k) = t ε Σ_{m≥2} j(m) sin²(mk/2)`.
pub fn unitary_gap_for(probe: &GapProbe, data: &[(i64, Complex64)]) -> Result<f64> {
    if !(probe.t_alpha.is_finite() && probe.t_alpha >= 0.0) {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    if probe.t_alpha == 0.0 {
        return Ok(0.0);
    }
    let kernel = Kernel::power_law(probe.alpha)?;
    let t = probe.t_alpha;
    let tol = 1e-11 / (t * probe.eps);
    let reach = data.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0) as f64;
    let initial = ((reach / 4.0).ceil() as usize).max(8);
    let (v, _) = adaptive(-PI, PI, initial, initial << 12, QUADRATURE_TOL, |x, w| {
        let parts: Vec<f64> = x
            .par_iter()
            .zip(w)
            .map(|(&k, &wt)| {
                let s = kernel.cosine_sum_from(k, 2, tol)?.value;
                let big_x = 0.5 * t * probe.eps * s;
                let fh: Complex64 = data.iter().map(|(n, f)| f * Complex64::from_polar(1.0, -(*n as f64) * k)).sum();
                let h = (0.5 * big_x).sin();
                Ok(wt * 4.0 * h * h * fh.norm_sqr())
            })
            .collect::<Result<_>>()?;
        Ok(vec![Complex64::new(parts.iter().sum::<f64>() / (2.0 * PI), 0.0)])
    })?;
    Ok(v[0].re.max(0.0).sqrt())
}
