//! Asymptotic onsite and offsite stationary sequences.

use crate::error::{invalid, require_positive, Error, Result};
use crate::kernels::{Compensated, Kernel, KernelKind};
use crate::lattice::{BoundaryCondition, LatticeState};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    /// Centred on a site: `q_{−n} = q_n`.
    Onsite,
    /// Centred between sites 0 and 1: `g_{−n} = g_{n+1}`.
    Offsite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Dnls,
    Fdnls,
}

/// One-sided profile `values[0..=N]` of a stationary candidate with frequency `w`.
///
/// For offsite sequences `values[0] = g_0` and `values[1] = g_1 = g_0`.
#[derive(Debug, Clone)]
pub struct ModeSequence {
    pub kind: ModeKind,
    pub model: Model,
    pub w: f64,
    pub eps: f64,
    pub kernel: Kernel,
    pub values: Vec<f64>,
}

fn check(w: f64, eps: f64, n: usize) -> Result<()> {
    require_positive("w", w)?;
    require_positive("eps", eps)?;
    if n == 0 {
        return Err(invalid("N", "must be >= 1"));
    }
    Ok(())
}

/// `q_n = (ρ/(1+2ρ))^{|n|} √(w+2ε)`.
pub fn dnls_onsite(w: f64, eps: f64, n: usize) -> Result<ModeSequence> {
    check(w, eps, n)?;
    let r = eps / (w + 2.0 * eps);
    let q0 = (w + 2.0 * eps).sqrt();
    let values = (0..=n).map(|i| q0 * r.powi(i as i32)).collect();
    Ok(ModeSequence {
        kind: ModeKind::Onsite,
        model: Model::Dnls,
        w,
        eps,
        kernel: Kernel::nearest_neighbor(),
        values,
    })
}

/// `g_n = (ρ/(1+2ρ))^{n−1} √(w+ε)` for `n ≥ 1`, `g_0 = g_1`.
pub fn dnls_offsite(w: f64, eps: f64, n: usize) -> Result<ModeSequence> {
    check(w, eps, n)?;
    let r = eps / (w + 2.0 * eps);
    let g1 = (w + eps).sqrt();
    let values = (0..=n).map(|i| if i == 0 { g1 } else { g1 * r.powi(i as i32 - 1) }).collect();
    Ok(ModeSequence {
        kind: ModeKind::Offsite,
        model: Model::Dnls,
        w,
        eps,
        kernel: Kernel::nearest_neighbor(),
        values,
    })
}

/// Onsite recurrence: every new term is fed by all earlier ones.
pub fn fdnls_onsite(w: f64, eps: f64, kernel: &Kernel, n: usize) -> Result<ModeSequence> {
    check(w, eps, n)?;
    let total = kernel.total();
    let mut q = Vec::with_capacity(n + 1);
    q.push((w + 2.0 * eps * total).sqrt());
    for i in 1..=n {
        let mut acc = Compensated::default();
        acc.add(kernel.j(i) * q[0]);
        for (m, &qm) in q.iter().enumerate().skip(1) {
            acc.add((kernel.j(i - m) + kernel.j(i + m)) * qm);
        }
        q.push(eps * acc.value() / (eps * (2.0 * total - kernel.j(2 * i)) + w));
    }
    Ok(ModeSequence {
        kind: ModeKind::Onsite,
        model: Model::Fdnls,
        w,
        eps,
        kernel: kernel.clone(),
        values: q,
    })
}

/// Offsite recurrence with `g_1 = g_0`.
pub fn fdnls_offsite(w: f64, eps: f64, kernel: &Kernel, n: usize) -> Result<ModeSequence> {
    check(w, eps, n)?;
    let total = kernel.total();
    let mut g = Vec::with_capacity(n + 1);
    let g0 = (w + eps * (2.0 * total - kernel.j(1))).sqrt();
    g.push(g0);
    g.push(g0);
    for i in 2..=n {
        let mut acc = Compensated::default();
        for (m, &gm) in g.iter().enumerate().take(i).skip(1) {
            acc.add((kernel.j(i - m) + kernel.j(i + m - 1)) * gm);
        }
        g.push(eps * acc.value() / (eps * (2.0 * total - kernel.j(2 * i - 1)) + w));
    }
    Ok(ModeSequence {
        kind: ModeKind::Offsite,
        model: Model::Fdnls,
        w,
        eps,
        kernel: kernel.clone(),
        values: g,
    })
}

impl ModeSequence {
    /// `ρ = ε / w`.
    pub fn rho(&self) -> f64 {
        self.eps / self.w
    }

    /// Number of computed terms beyond the centre.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Leading term `q_0` or `g_0`.
    pub fn peak(&self) -> f64 {
        self.values[0]
    }

    /// One-sided index holding site `n`.
    fn one_sided(&self, n: i64) -> usize {
        match self.kind {
            ModeKind::Onsite => n.unsigned_abs() as usize,
            ModeKind::Offsite => (if n >= 1 { n } else { 1 - n }) as usize,
        }
    }

    /// First-order continuation for one-sided indices beyond `N`.
    fn tail_model(&self, i: usize) -> f64 {
        let r = self.eps / (self.w + 2.0 * self.eps);
        match (self.model, self.kind) {
            (Model::Dnls, ModeKind::Onsite) => self.values[0] * r.powi(i as i32),
            (Model::Dnls, ModeKind::Offsite) => self.values[0] * r.powi(i as i32 - 1),
            (Model::Fdnls, ModeKind::Onsite) => self.rho() * self.kernel.j(i) * self.values[0],
            (Model::Fdnls, ModeKind::Offsite) => {
                self.rho() * (self.kernel.j(i) + self.kernel.j(i - 1)) * self.values[0]
            }
        }
    }

    /// Amplitude at site `n` of the reflected sequence, continued by the
    /// first-order tail model beyond the computed range.
    pub fn value(&self, n: i64) -> f64 {
        let i = self.one_sided(n);
        if i <= self.n() {
            self.values[i]
        } else {
            self.tail_model(i)
        }
    }

    /// Reflected values on sites `−N..=N`.
    pub fn reflected(&self) -> Vec<f64> {
        let n = self.n() as i64;
        (-n..=n).map(|s| self.value(s)).collect()
    }

    /// `u_n = e^{ivn} q_n` on the Dirichlet window `−N..=N`.
    pub fn boost(&self, v: f64) -> LatticeState {
        let n = self.n();
        let amps = (-(n as i64)..=n as i64)
            .map(|s| Complex64::from_polar(self.value(s), v * s as f64))
            .collect();
        LatticeState::new(BoundaryCondition::Dirichlet, n, amps).expect("finite amplitudes")
    }
}

/// Largest mismatch between the sequence and the stationary equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `sup_n |−w q_n / (εℒq_n − q_n³) − 1|` over the window.
    pub sup: f64,
    /// Site where the sup is attained.
    pub site: i64,
    /// Largest change of the residual caused by the tail model.
    pub tail_contribution: f64,
}

/// Residual over `|n| ≤ window` (offsite: `1−window ≤ n ≤ window`).
///
/// `ℒ` acts on the reflected sequence: computed values up to `N`, the
/// first-order tail model out to `9N`, and nothing beyond.
pub fn residual_sup(seq: &ModeSequence, window: usize) -> Result<ResidualReport> {
    if window == 0 || window > seq.n() {
        return Err(invalid("window", format!("must be in 1..={}", seq.n())));
    }
    let n_comp = seq.n() as i64;
    let reach = match seq.kernel.kind() {
        KernelKind::NearestNeighbor => n_comp + 1,
        _ => 9 * n_comp,
    };
    let two_j = 2.0 * seq.kernel.total();
    let sites: Vec<i64> = match seq.kind {
        ModeKind::Onsite => (0..=window as i64).collect(),
        ModeKind::Offsite => (1..=window as i64).collect(),
    };
    let mut report = ResidualReport { sup: 0.0, site: 0, tail_contribution: 0.0 };
    for n in sites {
        let qn = seq.value(n);
        let mut inner = Compensated::default();
        let mut outer = Compensated::default();
        for m in -reach..=reach {
            if m == n {
                continue;
            }
            let c = seq.kernel.j(n.abs_diff(m) as usize);
            if c == 0.0 {
                continue;
            }
            let term = c * seq.value(m);
            if seq.one_sided(m) <= seq.n() {
                inner.add(term);
            } else {
                outer.add(term);
            }
        }
        let eval = |coupled: f64| -> Result<f64> {
            let denom = seq.eps * (two_j * qn - coupled) - qn * qn * qn;
            if denom.abs() < 1e-300 {
                return Err(Error::DivisionGuard { site: n, value: denom });
            }
            Ok((-seq.w * qn / denom - 1.0).abs())
        };
        let with_tail = eval(inner.value() + outer.value())?;
        let without = eval(inner.value())?;
        if with_tail > report.sup {
            report.sup = with_tail;
            report.site = n;
        }
        report.tail_contribution = report.tail_contribution.max((with_tail - without).abs());
    }
    Ok(report)
}

/// Decay of a sequence away from its centre.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    /// `(n, q_{2n}/q_n)` for `n ∈ {8, 16, 32}`.
    pub doubling_ratios: Vec<(usize, f64)>,
    /// `2^{−(1+α)}`.
    pub expected_ratio: f64,
    /// `−d log q / d log n` fitted over `n ∈ [N/4, N]`.
    pub algebraic_exponent: f64,
    /// `d log q / dn` fitted over the same range.
    pub log_linear_slope: f64,
    /// Coefficient of determination of the log-log fit.
    pub algebraic_r2: f64,
    /// Coefficient of determination of the log-linear fit.
    pub log_linear_r2: f64,
}

/// Least-squares slope and `R²` of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

pub fn tail_diagnostics(seq: &ModeSequence) -> Result<TailReport> {
    let n = seq.n();
    if n < 64 {
        return Err(invalid("N", "tail diagnostics need N >= 64"));
    }
    let doubling_ratios = [8usize, 16, 32]
        .iter()
        .map(|&i| (i, seq.values[2 * i] / seq.values[i]))
        .collect();
    let range: Vec<usize> = (n / 4..=n).filter(|&i| seq.values[i] > 0.0).collect();
    let logs: Vec<f64> = range.iter().map(|&i| seq.values[i].ln()).collect();
    let lin: Vec<f64> = range.iter().map(|&i| i as f64).collect();
    let lnn: Vec<f64> = lin.iter().map(|x| x.ln()).collect();
    let (alg, alg_r2) = linear_fit(&lnn, &logs);
    let (ll, ll_r2) = linear_fit(&lin, &logs);
    Ok(TailReport {
        doubling_ratios,
        expected_ratio: 2f64.powf(-(1.0 + seq.kernel.alpha())),
        algebraic_exponent: -alg,
        log_linear_slope: ll,
        algebraic_r2: alg_r2,
        log_linear_r2: ll_r2,
    })
}

/// First site from which `|j(n) − A n^{−(1+α)}| < A/(2 n^{1+α})` holds for
/// every tabulated coefficient; 1 for the power law.
pub fn tail_onset(kernel: &Kernel) -> usize {
    let a = kernel.tail_constant();
    let s = 1.0 + kernel.alpha();
    let mut onset = 1;
    for n in 1..=kernel.head_len() {
        let model = a * (n as f64).powf(-s);
        if (kernel.j(n) - model).abs() >= 0.5 * model {
            onset = n + 1;
        }
    }
    onset
}

/// Threshold `ρ*` below which the tail bracket with tolerance `ε₁` holds.
pub fn rho_star(kernel: &Kernel, eps1: f64) -> Result<f64> {
    require_positive("eps1", eps1)?;
    if kernel.kind() == KernelKind::NearestNeighbor {
        return Err(Error::Unsupported("the bracket needs a long-range kernel".into()));
    }
    let total = kernel.total();
    let big_n = tail_onset(kernel);
    let mut r = eps1 / (2.0 * total);
    for n in 2..=2 * big_n {
        let c = eps1 * kernel.j(n) / (2.0 * (1.0 + eps1) * (n - 1) as f64 * total * total);
        r = r.min(c);
    }
    let alpha = kernel.alpha();
    Ok(r.min(eps1 / (3.0 * (1.0 + 2f64.powf(2.0 + alpha)) * (1.0 + eps1) * total)))
}

/// Ratios `q_n / (q_0 ρ c_n)` for `n = 1..=N`, with `c_n = j(n)` (onsite)
/// or `j(n) + j(n−1)` for `n ≥ 2` (offsite).
pub fn leading_order_ratios(seq: &ModeSequence) -> Vec<(usize, f64)> {
    let rho = seq.rho();
    let first = match seq.kind {
        ModeKind::Onsite => 1,
        ModeKind::Offsite => 2,
    };
    (first..=seq.n())
        .map(|i| {
            let c = match seq.kind {
                ModeKind::Onsite => seq.kernel.j(i),
                ModeKind::Offsite => seq.kernel.j(i) + seq.kernel.j(i - 1),
            };
            (i, seq.values[i] / (seq.values[0] * rho * c))
        })
        .collect()
}
