//! Desk-scale experiments: modulational-instability patterns and the
//! mobility of boosted onsite modes.

use crate::dynamics::{integrate_with, peak_index, DiagnosticsSeries, SimConfig};
use crate::error::{invalid, require_positive, Result};
use crate::kernels::Kernel;
use crate::lattice::{build_dirichlet_with, build_periodic, BoundaryCondition, DirichletConvention, LatticeState};
use crate::mi::{k_max, omega_squared, MiQuery, DEFAULT_TOL};
use crate::modes::{fdnls_onsite, linear_fit};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct MiPatternConfig {
    pub amplitude: f64,
    pub alpha: f64,
    pub eps: f64,
    /// The periodic cell has `2N` sites.
    pub half_width: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Radius of the disk the complex noise is drawn from.
    pub noise: f64,
    pub seed: u64,
    pub record_every: usize,
}

impl Default for MiPatternConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            alpha: 0.5,
            eps: 1.0,
            half_width: 128,
            t_end: 50.0,
            dt: 1e-3,
            noise: 1e-6,
            seed: 42,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MiPatternResult {
    pub times: Vec<f64>,
    /// `|u_n|²` per recorded time, sites `−N..N−1`.
    pub intensity: Vec<Vec<f64>>,
    /// Wavenumber of the strongest intensity modulation per recorded time.
    pub dominant_k: Vec<f64>,
    /// Most unstable wavenumber of the plane wave.
    pub k_max: f64,
    /// Cell wavenumber `πj/N` closest to `k_max`.
    pub k_grid: f64,
    /// `sqrt(−Ω²)` at `k_grid` (0 if stable there).
    pub predicted_rate_grid: f64,
    /// `sqrt(|û_j|² + |û_{−j}|²) / 2N` at `k_grid`.
    pub mode_amplitude: Vec<f64>,
    /// Fitted exponential growth rate of `mode_amplitude` in its linear phase.
    pub growth_rate: Option<f64>,
    /// First time `max_n ||u_n| − A|` exceeds ten times the noise radius.
    pub onset_time: Option<f64>,
    pub diagnostics: DiagnosticsSeries,
}

impl MiPatternResult {
    pub const INTENSITY_HEADER: &'static str = "t,n,intensity";
    pub const DOMINANT_HEADER: &'static str = "t,dominant_k";
}

/// Evolves `A + noise` on a periodic cell and tracks the unstable mode.
pub fn run_mi_pattern(cfg: &MiPatternConfig) -> Result<MiPatternResult> {
    require_positive("A", cfg.amplitude)?;
    require_positive("eps", cfg.eps)?;
    if !(cfg.noise.is_finite() && cfg.noise >= 0.0) {
        return Err(invalid("noise", "must be finite and >= 0"));
    }
    let kernel = Kernel::power_law(cfg.alpha)?;
    let n = cfg.half_width;
    let op = build_periodic(n, cfg.eps, &kernel)?;
    let cells = 2 * n;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let amps: Vec<Complex64> = (0..cells)
        .map(|_| {
            let r = cfg.noise * rng.gen::<f64>().sqrt();
            let th = 2.0 * PI * rng.gen::<f64>();
            Complex64::new(cfg.amplitude, 0.0) + Complex64::from_polar(r, th)
        })
        .collect();
    let initial = LatticeState::new(BoundaryCondition::Periodic, n, amps)?;

    let km = k_max(cfg.amplitude, cfg.eps, &kernel, DEFAULT_TOL)?;
    let j = ((km * n as f64 / PI).round() as usize).clamp(1, n);
    let k_grid = PI * j as f64 / n as f64;
    let om = omega_squared(&MiQuery::new(k_grid, cfg.amplitude, cfg.eps, &kernel))?;
    let predicted_rate_grid = (-om).max(0.0).sqrt();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(cells);
    let mut sim = SimConfig::new(op, cfg.dt, cfg.t_end);
    sim.record_every = cfg.record_every;

    let mut times = Vec::new();
    let mut intensity = Vec::new();
    let mut dominant_k = Vec::new();
    let mut mode_amplitude = Vec::new();
    let mut onset_time = None;
    let threshold = 10.0 * cfg.noise;

    let (_, diagnostics) = integrate_with(&initial, &sim, |_, s| {
        let mut buf = s.amplitudes.clone();
        fft.process(&mut buf);
        let a = (buf[j].norm_sqr() + buf[(cells - j) % cells].norm_sqr()).sqrt() / cells as f64;
        let inten: Vec<f64> = s.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        let mean = inten.iter().sum::<f64>() / cells as f64;
        let mut ib: Vec<Complex64> = inten.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
        fft.process(&mut ib);
        let (best, _) = (1..=n).fold((0usize, 0.0), |b, m| {
            let v = ib[m].norm_sqr();
            if v > b.1 {
                (m, v)
            } else {
                b
            }
        });
        if onset_time.is_none() {
            let dev = s.amplitudes.iter().map(|z| (z.norm() - cfg.amplitude).abs()).fold(0.0, f64::max);
            if dev > threshold && cfg.noise > 0.0 {
                onset_time = Some(s.time);
            }
        }
        times.push(s.time);
        mode_amplitude.push(a);
        dominant_k.push(PI * best as f64 / n as f64);
        intensity.push(inten);
        Ok(())
    })?;

    let growth_rate = fit_growth(&times, &mode_amplitude, 1e-3 * cfg.amplitude);
    Ok(MiPatternResult {
        times,
        intensity,
        dominant_k,
        k_max: km,
        k_grid,
        predicted_rate_grid,
        mode_amplitude,
        growth_rate,
        onset_time,
        diagnostics,
    })
}

/// Log-linear fit over the stretch where the amplitude first exceeds ten
/// times its initial value until it first reaches `ceiling`.
pub fn fit_growth(times: &[f64], amp: &[f64], ceiling: f64) -> Option<f64> {
    let a0 = *amp.first()?;
    let start = amp.iter().position(|&a| a > 10.0 * a0)?;
    let end = amp[start..].iter().position(|&a| a >= ceiling).map(|e| e + start)?;
    if end < start + 3 {
        return None;
    }
    let t = &times[start..=end];
    let y: Vec<f64> = amp[start..=end].iter().map(|a| a.ln()).collect();
    Some(linear_fit(t, &y).0)
}

#[derive(Debug, Clone, Serialize)]
pub struct MobilityConfig {
    pub alpha: f64,
    pub eps: f64,
    pub w: f64,
    pub v: f64,
    /// Dirichlet window `−N..=N`.
    pub half_width: usize,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
    #[serde(skip)]
    pub convention: DirichletConvention,
    /// Keep `|u_n|²` at every record.
    pub keep_intensity: bool,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            eps: 1.0,
            w: 1.0,
            v: 1.0,
            half_width: 256,
            t_end: 100.0,
            dt: 1e-3,
            record_every: 100,
            convention: DirichletConvention::default(),
            keep_intensity: false,
        }
    }
}

/// A trace is erratic when its final constant stretch is shorter than this
/// fraction of the run.
pub const ERRATIC_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct MobilityResult {
    pub times: Vec<f64>,
    pub peak: Vec<i64>,
    /// First recorded time after which the peak site never changes.
    pub pinning_time: f64,
    pub final_site: i64,
    /// No pinning within the run.
    pub erratic: bool,
    pub intensity: Vec<Vec<f64>>,
    pub diagnostics: DiagnosticsSeries,
}

impl MobilityResult {
    pub const TRACE_HEADER: &'static str = "t,peak_index";
}

/// Pinning time and final site of a peak trace.
pub fn pinning_time(times: &[f64], peak: &[i64]) -> (f64, i64) {
    let last = *peak.last().unwrap_or(&0);
    let mut idx = peak.len();
    while idx > 0 && peak[idx - 1] == last {
        idx -= 1;
    }
    (times.get(idx).copied().unwrap_or(0.0), last)
}

/// Boosts the onsite mode `e^{ivn} q_n` and follows its peak.
pub fn run_mobility(cfg: &MobilityConfig) -> Result<MobilityResult> {
    let kernel = Kernel::power_law(cfg.alpha)?;
    let seq = fdnls_onsite(cfg.w, cfg.eps, &kernel, cfg.half_width)?;
    if !cfg.v.is_finite() {
        return Err(invalid("v", "must be finite"));
    }
    let initial = seq.boost(cfg.v);
    let op = build_dirichlet_with(cfg.half_width, cfg.eps, &kernel, cfg.convention)?;
    let mut sim = SimConfig::new(op, cfg.dt, cfg.t_end);
    sim.record_every = cfg.record_every;

    let mut times = Vec::new();
    let mut peak = Vec::new();
    let mut intensity = Vec::new();
    let (_, diagnostics) = integrate_with(&initial, &sim, |_, s| {
        times.push(s.time);
        peak.push(peak_index(s));
        if cfg.keep_intensity {
            intensity.push(s.amplitudes.iter().map(|z| z.norm_sqr()).collect());
        }
        Ok(())
    })?;
    let (pin, final_site) = pinning_time(&times, &peak);
    let erratic = cfg.t_end - pin < ERRATIC_FRACTION * cfg.t_end;
    Ok(MobilityResult { times, peak, pinning_time: pin, final_site, erratic, intensity, diagnostics })
}
