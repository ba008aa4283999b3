//! Time integration of `i u̇ = εℒu + μ|u|^{p−1}u`.

use crate::error::{invalid, Error, Result};
use crate::lattice::{BoundaryCondition, DiscreteOperator, LatticeState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Upper limit on `dt · |εℒ|`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Power nonlinearity `μ |u|^{p−1} u`. The default is the focusing cubic
/// (`μ = −1`, `p = 3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub mu: f64,
    pub power: u32,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Self { mu: -1.0, power: 3 }
    }
}

impl Nonlinearity {
    pub fn new(mu: f64, power: u32) -> Result<Self> {
        if mu != 1.0 && mu != -1.0 {
            return Err(invalid("mu", format!("must be +1 or -1, got {mu}")));
        }
        if power < 3 {
            return Err(invalid("p", format!("must be >= 3, got {power}")));
        }
        Ok(Self { mu, power })
    }

    /// Switches the nonlinearity off.
    pub fn none() -> Self {
        Self { mu: 0.0, power: 3 }
    }

    #[inline]
    fn coefficient(&self, modulus_sq: f64) -> f64 {
        match self.power {
            3 => self.mu * modulus_sq,
            p => self.mu * modulus_sq.powf(0.5 * (p - 1) as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    /// Second-order splitting with an exact linear substep; periodic only.
    Strang,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub operator: DiscreteOperator,
    pub nonlinearity: Nonlinearity,
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every this many steps.
    pub record_every: usize,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(operator: DiscreteOperator, dt: f64, t_end: f64) -> Self {
        Self {
            operator,
            nonlinearity: Nonlinearity::default(),
            dt,
            t_end,
            record_every: 1,
            scheme: Scheme::Rk4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::require_positive("dt", self.dt)?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(invalid("t_end", "must be finite and >= 0"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be >= 1"));
        }
        let product = self.dt * self.operator.spectral_bound();
        if product > STABILITY_LIMIT {
            return Err(Error::StabilityGuard { product, limit: STABILITY_LIMIT });
        }
        if self.scheme == Scheme::Strang && self.operator.bc() != BoundaryCondition::Periodic {
            return Err(Error::Unsupported("Strang splitting needs a periodic window".into()));
        }
        Ok(())
    }

    /// Number of steps and the step size that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// `Σ |u_n|²`.
pub fn mass(state: &LatticeState) -> f64 {
    state.amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

/// Hamiltonian with the focusing cubic nonlinearity.
pub fn energy(state: &LatticeState, op: &DiscreteOperator) -> Result<f64> {
    energy_with(state, op, &Nonlinearity::default())
}

/// `(1/2)⟨εℒu, u⟩ + μ/(p+1) Σ|u|^{p+1}`.
pub fn energy_with(state: &LatticeState, op: &DiscreteOperator, nl: &Nonlinearity) -> Result<f64> {
    let lu = op.apply(state)?;
    Ok(energy_parts(&state.amplitudes, &lu, nl))
}

fn energy_parts(u: &[Complex64], lu: &[Complex64], nl: &Nonlinearity) -> f64 {
    let kinetic: f64 = u.iter().zip(lu).map(|(a, b)| (a.conj() * b).re).sum();
    let q = nl.power as f64 + 1.0;
    let potential: f64 = u.iter().map(|z| z.norm_sqr().powf(0.5 * q)).sum();
    0.5 * kinetic + nl.mu / q * potential
}

/// Site label of the largest `|u_n|`, lowest label on ties; 0 for the zero state.
pub fn peak_index(state: &LatticeState) -> i64 {
    let mut best = 0usize;
    let mut best_val = 0.0;
    for (i, z) in state.amplitudes.iter().enumerate() {
        let v = z.norm_sqr();
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best_val == 0.0 {
        0
    } else {
        state.site(best)
    }
}

pub fn sup_norm(state: &LatticeState) -> f64 {
    state.amplitudes.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
}

/// Time-indexed diagnostics of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub peak_index: Vec<i64>,
    pub sup_norm: Vec<f64>,
}

impl DiagnosticsSeries {
    pub const CSV_HEADER: &'static str = "t,mass,energy,peak_index,sup_norm";

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, state: &LatticeState, energy: f64) {
        self.times.push(state.time);
        self.mass.push(mass(state));
        self.energy.push(energy);
        self.peak_index.push(peak_index(state));
        self.sup_norm.push(sup_norm(state));
    }

    /// Largest `|N(t) − N(0)| / N(0)` over the record.
    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.mass)
    }

    /// Largest `|E(t) − E(0)| / |E(0)|` over the record.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{:e},{:e},{},{:e}",
                self.times[i], self.mass[i], self.energy[i], self.peak_index[i], self.sup_norm[i]
            )?;
        }
        Ok(())
    }
}

fn relative_drift(v: &[f64]) -> f64 {
    let Some(&v0) = v.first() else { return 0.0 };
    let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };
    v.iter().map(|x| (x - v0).abs() / scale).fold(0.0, f64::max)
}

/// `(times, peak sites)` of a run.
pub fn peak_trace(diag: &DiagnosticsSeries) -> (Vec<f64>, Vec<i64>) {
    (diag.times.clone(), diag.peak_index.clone())
}

/// Reusable buffers for stepping one window.
pub struct Stepper<'a> {
    config: &'a SimConfig,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(config: &'a SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.operator.len();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Ok(Self {
            config,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            stage: zero,
        })
    }

    fn rhs(&self, u: &[Complex64], out: &mut [Complex64]) {
        self.config.operator.apply_into(u, out);
        let nl = &self.config.nonlinearity;
        for (o, z) in out.iter_mut().zip(u) {
            let f = *o + z * nl.coefficient(z.norm_sqr());
            // −i f
            *o = Complex64::new(f.im, -f.re);
        }
    }

    /// Advances `state` by `dt` in place.
    pub fn step(&mut self, state: &mut LatticeState, dt: f64) -> Result<()> {
        match self.config.scheme {
            Scheme::Rk4 => self.step_rk4(&mut state.amplitudes, dt),
            Scheme::Strang => self.step_strang(&mut state.amplitudes, dt)?,
        }
        state.time += dt;
        if let Some(i) = state.amplitudes.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { time: state.time, site: state.site(i) });
        }
        Ok(())
    }

    fn step_rk4(&mut self, u: &mut [Complex64], dt: f64) {
        let n = u.len();
        let mut k = std::mem::take(&mut self.k);
        let mut stage = std::mem::take(&mut self.stage);

        self.rhs(u, &mut k[0]);
        for i in 0..n {
            stage[i] = u[i] + k[0][i] * (0.5 * dt);
        }
        self.rhs(&stage, &mut k[1]);
        for i in 0..n {
            stage[i] = u[i] + k[1][i] * (0.5 * dt);
        }
        self.rhs(&stage, &mut k[2]);
        for i in 0..n {
            stage[i] = u[i] + k[2][i] * dt;
        }
        self.rhs(&stage, &mut k[3]);
        let w = dt / 6.0;
        for i in 0..n {
            u[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * w;
        }

        self.k = k;
        self.stage = stage;
    }

    fn step_strang(&mut self, u: &mut [Complex64], dt: f64) -> Result<()> {
        let op = &self.config.operator;
        let nl = &self.config.nonlinearity;
        op.propagate_linear(u, 0.5 * dt)?;
        for z in u.iter_mut() {
            *z *= Complex64::from_polar(1.0, -nl.coefficient(z.norm_sqr()) * dt);
        }
        op.propagate_linear(u, 0.5 * dt)
    }
}

/// One step of the configured scheme.
pub fn step_rk4(state: &LatticeState, config: &SimConfig) -> Result<LatticeState> {
    let mut rk = config.clone();
    rk.scheme = Scheme::Rk4;
    let mut stepper = Stepper::new(&rk)?;
    let mut next = state.clone();
    stepper.step(&mut next, config.dt)?;
    Ok(next)
}

/// Integrates to `t_end`, recording diagnostics at `t = 0`, every
/// `record_every` steps, and at the final time.
pub fn integrate(initial: &LatticeState, config: &SimConfig) -> Result<(LatticeState, DiagnosticsSeries)> {
    integrate_with(initial, config, |_, _| Ok(()))
}

/// As [`integrate`], calling `observe(step, state)` at every recorded time.
pub fn integrate_with(
    initial: &LatticeState,
    config: &SimConfig,
    mut observe: impl FnMut(usize, &LatticeState) -> Result<()>,
) -> Result<(LatticeState, DiagnosticsSeries)> {
    if initial.len() != config.operator.len() {
        return Err(Error::DimensionMismatch { expected: config.operator.len(), got: initial.len() });
    }
    let mut stepper = Stepper::new(config)?;
    let (steps, dt) = config.steps();
    let mut state = initial.clone();
    let t0 = state.time;
    let mut diag = DiagnosticsSeries::default();
    let record = |s: &LatticeState, d: &mut DiagnosticsSeries| -> Result<()> {
        let e = energy_with(s, &config.operator, &config.nonlinearity)?;
        d.push(s, e);
        Ok(())
    };
    record(&state, &mut diag)?;
    observe(0, &state)?;
    for step in 1..=steps {
        stepper.step(&mut state, dt)?;
        // Avoid drift in the clock from repeated addition.
        state.time = t0 + step as f64 * dt;
        if step % config.record_every == 0 || step == steps {
            record(&state, &mut diag)?;
            observe(step, &state)?;
        }
    }
    Ok((state, diag))
}
