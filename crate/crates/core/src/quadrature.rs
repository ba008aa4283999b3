//! Composite Gauss–Legendre quadrature with dyadic panel refinement.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights of the rule repeated over `panels` equal panels of `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut x = Vec::with_capacity(panels * self.nodes.len());
        let mut w = Vec::with_capacity(x.capacity());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (t, wt) in self.nodes.iter().zip(&self.weights) {
                x.push(lo + 0.5 * h * (t + 1.0));
                w.push(0.5 * h * wt);
            }
        }
        (x, w)
    }
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Points per panel used throughout.
pub const PANEL_ORDER: usize = 20;

/// Integrates a batch of functions over `[a, b]`, doubling the panel count
/// from `initial` until no component changes by more than `tol`.
///
/// `eval(nodes, weights)` returns the quadrature sums for every component.
pub fn adaptive<F>(a: f64, b: f64, initial: usize, max_panels: usize, tol: f64, eval: F) -> Result<(Vec<Complex64>, usize)>
where
    F: Fn(&[f64], &[f64]) -> Result<Vec<Complex64>>,
{
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut panels = initial.max(1);
    let (x, w) = rule.composite(a, b, panels);
    let mut prev = eval(&x, &w)?;
    let mut change = f64::INFINITY;
    loop {
        if panels * 2 > max_panels {
            return Err(Error::QuadratureNotConverged { change, panels });
        }
        panels *= 2;
        let (x, w) = rule.composite(a, b, panels);
        let next = eval(&x, &w)?;
        change = max_change(&prev, &next);
        prev = next;
        if change < tol {
            return Ok((prev, panels));
        }
    }
}

fn max_change(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        let r = GaussLegendre::new(PANEL_ORDER);
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m38: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(38)).sum();
        assert!((m38 - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let (v, _) = adaptive(0.0, std::f64::consts::PI, 1, 1 << 12, 1e-12, |x, w| {
            let s: f64 = x.iter().zip(w).map(|(x, w)| w * (50.0 * x).cos() * x).sum();
            Ok(vec![Complex64::new(s, 0.0)])
        })
        .unwrap();
        // ∫_0^π x cos(50x) dx = (cos(50π) − 1)/2500
        assert!(v[0].re.abs() < 1e-12);
    }
}
