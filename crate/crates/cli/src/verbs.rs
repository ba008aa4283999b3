//! One function per verb: build the inputs, call the core, collect artifacts.

use crate::config::{ConfigError, ExperimentConfig, Verb};
use crate::error::CliError;
use crate::output::{intensity_table, Cell, Table};
use fdnls_core::dynamics::{integrate, Nonlinearity, Scheme, SimConfig};
use fdnls_core::energetics::{dnls_pnb, fdnls_pnb, small_eps_coefficient, PnbReport};
use fdnls_core::experiments::{run_mi_pattern, run_mobility, MiPatternConfig, MobilityConfig};
use fdnls_core::flow::{evolve_pair, kernel_decay, unitary_gap, GapProbe};
use fdnls_core::kernels::Kernel;
use fdnls_core::lattice::{build_dirichlet_with, build_periodic, BoundaryCondition, DirichletConvention, LatticeState};
use fdnls_core::mi::{amplitude_a0, amplitude_a0_for, k_max, w_tilde, DEFAULT_TOL};
use fdnls_core::modes::{
    dnls_offsite, dnls_onsite, fdnls_offsite, fdnls_onsite, leading_order_ratios, residual_sup, rho_star,
    tail_diagnostics, ModeKind, ModeSequence,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Tables plus a JSON report.
pub struct Artifacts {
    pub tables: Vec<Table>,
    pub report: Value,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    match cfg.verb {
        Verb::Simulate => simulate(cfg),
        Verb::MiRegion => mi_region(cfg),
        Verb::Kmax => kmax(cfg),
        Verb::Stationary => stationary(cfg),
        Verb::Pnb => pnb(cfg),
        Verb::CompareFlows => compare_flows(cfg),
        Verb::KernelDecay => decay(cfg),
        Verb::UnitaryGap => gap(cfg),
        Verb::MiPattern => mi_pattern(cfg),
        Verb::Mobility => mobility(cfg),
    }
}

fn kernel_for(alpha: f64) -> Result<Kernel, CliError> {
    if alpha.is_infinite() {
        Ok(Kernel::nearest_neighbor())
    } else {
        Ok(Kernel::power_law(alpha)?)
    }
}

fn convention(cfg: &ExperimentConfig) -> DirichletConvention {
    match cfg.text("convention") {
        "window" => DirichletConvention::WindowOnly,
        _ => DirichletConvention::FullDiagonal,
    }
}

fn bc(cfg: &ExperimentConfig) -> BoundaryCondition {
    match cfg.text("bc") {
        "periodic" => BoundaryCondition::Periodic,
        _ => BoundaryCondition::Dirichlet,
    }
}

/// `n` points from `lo` to `hi`, evenly spaced in `log`.
fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn simulate(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let alpha = cfg.real("alpha");
    let kernel = kernel_for(alpha)?;
    let n = cfg.count("N");
    let eps = cfg.real("eps");
    let bc = bc(cfg);
    let scheme = match cfg.text("scheme") {
        "strang" => Scheme::Strang,
        _ => Scheme::Rk4,
    };
    if scheme == Scheme::Strang && bc != BoundaryCondition::Periodic {
        return Err(ConfigError::Incompatible { reason: "scheme = strang needs bc = periodic".into() }.into());
    }
    let op = match bc {
        BoundaryCondition::Dirichlet => build_dirichlet_with(n, eps, &kernel, convention(cfg))?,
        BoundaryCondition::Periodic => build_periodic(n, eps, &kernel)?,
    };

    let (a, width, v) = (cfg.real("A"), cfg.real("width"), cfg.real("v"));
    let phase = |s: i64| Complex64::from_polar(1.0, v * s as f64);
    let initial = match cfg.text("initial") {
        "onsite" => {
            let w = cfg.real("w");
            let seq = if alpha.is_infinite() { dnls_onsite(w, eps, n)? } else { fdnls_onsite(w, eps, &kernel, n)? };
            LatticeState::from_fn(bc, n, |s| phase(s) * seq.value(s))?
        }
        "gaussian" => LatticeState::from_fn(bc, n, |s| {
            let x = s as f64 / width;
            phase(s) * (a * (-0.5 * x * x).exp())
        })?,
        "cw" => LatticeState::from_fn(bc, n, |s| phase(s) * a)?,
        "impulse" => LatticeState::from_fn(bc, n, |s| Complex64::new(if s == 0 { a } else { 0.0 }, 0.0))?,
        _ => LatticeState::from_fn(bc, n, |s| phase(s) * (a / (s as f64 / width).cosh()))?,
    };

    let mut sim = SimConfig::new(op, cfg.real("dt"), cfg.real("t_end"));
    sim.record_every = cfg.count("record_every");
    sim.scheme = scheme;
    sim.nonlinearity = Nonlinearity::new(cfg.real("mu"), cfg.count("p") as u32)?;
    let (fin, diag) = integrate(&initial, &sim)?;

    let mut series = Table::new("diagnostics", "t,mass,energy,peak_index,sup_norm");
    for i in 0..diag.len() {
        series.push(vec![
            Cell::Real(diag.times[i]),
            Cell::Real(diag.mass[i]),
            Cell::Real(diag.energy[i]),
            Cell::Int(diag.peak_index[i]),
            Cell::Real(diag.sup_norm[i]),
        ]);
    }
    let mut state = Table::new("final_state", "n,re,im");
    for (i, z) in fin.amplitudes.iter().enumerate() {
        state.push(vec![Cell::Int(fin.site(i)), Cell::Real(z.re), Cell::Real(z.im)]);
    }
    let report = json!({
        "mass_drift": diag.mass_drift(),
        "energy_drift": diag.energy_drift(),
        "final_time": fin.time,
        "steps": sim.steps().0,
        "dt_used": sim.steps().1,
        "spectral_bound": sim.operator.spectral_bound(),
    });
    Ok(Artifacts { tables: vec![series, state], report })
}

fn mi_region(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let eps = cfg.real("eps");
    let (nk, np) = (cfg.count("k_points"), cfg.count("points"));
    let ks: Vec<f64> = (0..nk).map(|i| PI * i as f64 / (nk - 1) as f64).collect();
    let by_alpha = cfg.text("sweep") == "alpha";

    // Rows are (k, A or alpha); each row of the second axis shares one kernel.
    let (axis, kernels, amps): (Vec<f64>, Vec<Kernel>, Vec<f64>) = if by_alpha {
        let alphas = log_space(cfg.real("alpha_min"), cfg.real("alpha_max"), np);
        let kernels = alphas.iter().map(|&a| Kernel::power_law(a)).collect::<Result<_, _>>()?;
        (alphas, kernels, vec![cfg.real("A"); np])
    } else {
        let amps: Vec<f64> = (1..=np).map(|j| cfg.real("a_max") * j as f64 / np as f64).collect();
        (amps.clone(), vec![kernel_for(cfg.real("alpha"))?; np], amps)
    };
    let unique = if by_alpha { &kernels[..] } else { &kernels[..1] };
    let ew: Vec<Vec<f64>> = unique
        .par_iter()
        .map(|kernel| ks.iter().map(|&k| w_tilde(k, kernel, 1e-12).map(|w| eps * w)).collect())
        .collect::<Result<_, _>>()?;

    let mut region = Table::new("region", "k,A_or_alpha,phi,omega_sq,unstable");
    for (j, (&x, &a)) in axis.iter().zip(&amps).enumerate() {
        let row = &ew[if by_alpha { j } else { 0 }];
        for (&k, &e) in ks.iter().zip(row) {
            let phi = e - a * a;
            let omega_sq = 4.0 * e * phi;
            // k = 0 is neutral (Ω² = 0), so the flag follows Ω² rather than Φ.
            region.push(vec![
                Cell::Real(k),
                Cell::Real(x),
                Cell::Real(phi),
                Cell::Real(omega_sq),
                Cell::Int((omega_sq < 0.0) as i64),
            ]);
        }
    }
    let mut tables = vec![region];
    let report = if by_alpha {
        json!({ "sweep": "alpha", "A": cfg.real("A"), "eps": eps })
    } else {
        let mut threshold = Table::new("threshold", "k,A_threshold");
        for (&k, &e) in ks.iter().zip(&ew[0]).skip(1) {
            threshold.push(vec![Cell::Real(k), Cell::Real(e.sqrt())]);
        }
        tables.push(threshold);
        json!({ "sweep": "A", "eps": eps, "A0": amplitude_a0_for(eps, &kernels[0], DEFAULT_TOL)? })
    };
    Ok(Artifacts { tables, report })
}

fn kmax(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let (a, eps, tol) = (cfg.real("A"), cfg.real("eps"), cfg.real("tol"));
    let alphas = log_space(cfg.real("alpha_min"), cfg.real("alpha_max"), cfg.count("points"));
    let rows: Vec<(f64, f64, f64)> = alphas
        .par_iter()
        .map(|&alpha| -> Result<_, fdnls_core::Error> {
            let kernel = Kernel::power_law(alpha)?;
            Ok((alpha, k_max(a, eps, &kernel, tol)?, amplitude_a0(eps, alpha)?))
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new("kmax", "alpha,k_max,A0");
    for (alpha, k, a0) in &rows {
        t.push(vec![Cell::Real(*alpha), Cell::Real(*k), Cell::Real(*a0)]);
    }
    let saturated: Vec<f64> = rows.iter().filter(|r| r.1 == PI).map(|r| r.0).collect();
    Ok(Artifacts { tables: vec![t], report: json!({ "A": a, "eps": eps, "saturated_alphas": saturated }) })
}

fn stationary(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let (w, eps, n) = (cfg.real("w"), cfg.real("eps"), cfg.count("N"));
    let onsite = cfg.text("kind") == "onsite";
    let fdnls = cfg.text("model") == "fdnls";
    let seq: ModeSequence = if fdnls {
        let kernel = Kernel::power_law(cfg.real("alpha"))?;
        if onsite {
            fdnls_onsite(w, eps, &kernel, n)?
        } else {
            fdnls_offsite(w, eps, &kernel, n)?
        }
    } else if onsite {
        dnls_onsite(w, eps, n)?
    } else {
        dnls_offsite(w, eps, n)?
    };
    let window = if cfg.has("window") { cfg.count("window") } else { (n / 4).max(1) };

    let mut t = Table::new("sequence", "n,value");
    for s in -(n as i64)..=n as i64 {
        t.push(vec![Cell::Int(s), Cell::Real(seq.value(s))]);
    }
    let residual = residual_sup(&seq, window)?;
    let tail = if n >= 64 { Some(tail_diagnostics(&seq)?) } else { None };
    let mut report = json!({
        "kind": if seq.kind == ModeKind::Onsite { "onsite" } else { "offsite" },
        "rho": seq.rho(),
        "peak": seq.peak(),
        "window": window,
        "residual": residual,
        "tail": tail,
    });
    if fdnls {
        let r_star = rho_star(&seq.kernel, cfg.real("eps1"))?;
        let dev = leading_order_ratios(&seq).iter().map(|(_, r)| (r - 1.0).abs()).fold(0.0, f64::max);
        report["rho_star"] = json!(r_star);
        report["below_rho_star"] = json!(seq.rho() < r_star);
        report["leading_order_max_deviation"] = json!(dev);
    }
    Ok(Artifacts { tables: vec![t], report })
}

fn pnb(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let points = cfg.count("points");
    let ws = log_space(cfg.real("w_min"), cfg.real("w_max"), points);
    let epss = log_space(cfg.real("eps_min"), cfg.real("eps_max"), points);
    let (eps_fixed, w_fixed) = (cfg.real("eps"), cfg.real("w"));
    let kernel = if cfg.text("model") == "fdnls" { Some(Kernel::power_law(cfg.real("alpha"))?) } else { None };
    let (n, n_e) = (cfg.count("N"), cfg.count("n_e"));
    let one = |w_a: f64, eps: f64| -> Result<PnbReport, fdnls_core::Error> {
        match &kernel {
            Some(k) => fdnls_pnb(w_a, eps, k, n, n_e),
            None => dnls_pnb(eps, w_a),
        }
    };
    let by_w: Vec<PnbReport> = ws.par_iter().map(|&w| one(w, eps_fixed)).collect::<Result<_, _>>()?;
    let by_eps: Vec<PnbReport> = epss.par_iter().map(|&e| one(w_fixed, e)).collect::<Result<_, _>>()?;

    let header_row = |r: &PnbReport, x: f64| {
        vec![Cell::Real(x), Cell::Real(r.delta_e), Cell::Real(r.e_a), Cell::Real(r.e_b), Cell::Real(r.truncation_error_bound)]
    };
    let mut tw = Table::new("pnb_w", "w_a,delta_e,e_a,e_b,truncation_bound");
    by_w.iter().for_each(|r| tw.push(header_row(r, r.w_a)));
    let mut te = Table::new("pnb_eps", "eps,delta_e,e_a,e_b,truncation_bound");
    by_eps.iter().for_each(|r| te.push(header_row(r, r.eps)));

    let max_bound = by_w.iter().chain(&by_eps).map(|r| r.truncation_error_bound).fold(0.0, f64::max);
    let positive: Vec<f64> = by_eps.iter().filter(|r| r.delta_e > 0.0).map(|r| r.eps).collect();
    let report = json!({
        "model": cfg.text("model"),
        "alpha": kernel.as_ref().map(|k| k.alpha()),
        "small_eps_coefficient": kernel.as_ref().map(small_eps_coefficient),
        "max_truncation_bound": max_bound,
        "positive_barrier_eps": positive,
        "w_sweep": by_w,
        "eps_sweep": by_eps,
    });
    Ok(Artifacts { tables: vec![tw, te], report })
}

fn compare_flows(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let width = cfg.real("width");
    let f = LatticeState::from_fn(bc(cfg), cfg.count("N"), |s| {
        let x = s as f64 / width;
        Complex64::new((-0.5 * x * x).exp(), 0.0)
    })?;
    let cmp = evolve_pair(&f, cfg.real("alpha"), cfg.real("eps"), cfg.real("t_end"), cfg.real("dt"), cfg.count("record_every"))?;
    let mut t = Table::new("flows", "t,discrepancy,bound");
    for i in 0..cmp.times.len() {
        t.push(vec![Cell::Real(cmp.times[i]), Cell::Real(cmp.discrepancy[i]), Cell::Real(cmp.bound[i])]);
    }
    let report = json!({
        "symbol_gap": cmp.gap,
        "within_bound": cmp.within_bound(),
        "max_lipschitz": cmp.lipschitz.iter().copied().fold(0.0, f64::max),
    });
    Ok(Artifacts { tables: vec![t], report })
}

fn decay(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let d = kernel_decay(cfg.real("alpha"), &cfg.list("times"))?;
    let mut t = Table::new("decay", "t,sup_kernel");
    for (time, s) in d.times.iter().zip(&d.sup_kernel) {
        t.push(vec![Cell::Real(*time), Cell::Real(*s)]);
    }
    Ok(Artifacts { tables: vec![t], report: json!({ "exponent": d.exponent }) })
}

fn gap(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let x0 = cfg.real("x0");
    let mut t = Table::new("gap", "alpha,gap");
    let mut probes = Vec::new();
    let mut gaps = Vec::new();
    for alpha in cfg.list("alphas") {
        let probe = GapProbe::new(alpha, x0)?;
        let g = unitary_gap(&probe)?;
        t.push(vec![Cell::Real(alpha), Cell::Real(g)]);
        probes.push(probe);
        gaps.push(g);
    }
    let max = gaps.iter().copied().fold(0.0, f64::max);
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let report = json!({ "x0": x0, "probes": probes, "min_over_max": min / max });
    Ok(Artifacts { tables: vec![t], report })
}

fn mi_pattern(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let n = cfg.count("N");
    let mc = MiPatternConfig {
        amplitude: cfg.real("A"),
        alpha: cfg.real("alpha"),
        eps: cfg.real("eps"),
        half_width: n,
        t_end: cfg.real("t_end"),
        dt: cfg.real("dt"),
        noise: cfg.real("noise"),
        seed: cfg.seed(),
        record_every: cfg.count("record_every"),
    };
    let r = run_mi_pattern(&mc)?;
    let intensity = intensity_table(&r.times, -(n as i64), &r.intensity, "t,n,intensity");
    let mut dominant = Table::new("dominant", "t,dominant_k");
    let mut mode = Table::new("mode", "t,mode_amplitude");
    for (i, &t) in r.times.iter().enumerate() {
        dominant.push(vec![Cell::Real(t), Cell::Real(r.dominant_k[i])]);
        mode.push(vec![Cell::Real(t), Cell::Real(r.mode_amplitude[i])]);
    }
    let report = json!({
        "k_max": r.k_max,
        "k_grid": r.k_grid,
        "predicted_rate": mc.amplitude * mc.amplitude,
        "predicted_rate_grid": r.predicted_rate_grid,
        "growth_rate": r.growth_rate,
        "onset_time": r.onset_time,
        "late_dominant_k": r.dominant_k.last(),
        "mass_drift": r.diagnostics.mass_drift(),
        "energy_drift": r.diagnostics.energy_drift(),
    });
    Ok(Artifacts { tables: vec![intensity, dominant, mode], report })
}

fn mobility(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let n = cfg.count("N");
    let mc = MobilityConfig {
        alpha: cfg.real("alpha"),
        eps: cfg.real("eps"),
        w: cfg.real("w"),
        v: cfg.real("v"),
        half_width: n,
        t_end: cfg.real("t_end"),
        dt: cfg.real("dt"),
        record_every: cfg.count("record_every"),
        convention: convention(cfg),
        keep_intensity: cfg.text("intensity") == "true",
    };
    let r = run_mobility(&mc)?;
    let mut trace = Table::new("trace", "t,peak_index");
    for (t, p) in r.times.iter().zip(&r.peak) {
        trace.push(vec![Cell::Real(*t), Cell::Int(*p)]);
    }
    let mut tables = vec![trace];
    if mc.keep_intensity {
        tables.push(intensity_table(&r.times, -(n as i64), &r.intensity, "t,n,intensity"));
    }
    let report = json!({
        "pinning_time": r.pinning_time,
        "final_site": r.final_site,
        "erratic": r.erratic,
        "mass_drift": r.diagnostics.mass_drift(),
        "energy_drift": r.diagnostics.energy_drift(),
    });
    Ok(Artifacts { tables, report })
}
