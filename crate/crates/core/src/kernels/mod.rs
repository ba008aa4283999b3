//! α-kernels: nonnegative coupling sequences `j(n)` with `n^{1+α} j(n) → A`.

mod series;
mod zeta;

pub use series::{reduce_wavenumber, SeriesValue, MAX_TERMS};
pub use zeta::{hurwitz_zeta, riemann_zeta};

pub(crate) use series::Compensated;
pub(crate) use zeta::hurwitz_unchecked;

use crate::error::{invalid, Result};

/// Which family a kernel was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    PowerLaw,
    NearestNeighbor,
    Table,
}

/// A coupling kernel.
///
/// Coefficients `j(1..=L)` are stored explicitly; beyond `L` the kernel is
/// `A n^{-(1+α)}` with `A = tail_constant()`. The power law has `L = 0`,
/// `A = 1`; the nearest-neighbour kernel has `L = 1`, `A = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    alpha: f64,
    head: Vec<f64>,
    tail_amplitude: f64,
    total: f64,
}

impl Kernel {
    /// `j(n) = n^{-(1+α)}`.
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        Ok(Self {
            kind: KernelKind::PowerLaw,
            alpha,
            head: Vec::new(),
            tail_amplitude: 1.0,
            total: hurwitz_unchecked(1.0 + alpha, 1.0),
        })
    }

    /// The `α → ∞` limit: only `j(1) = 1` survives.
    pub fn nearest_neighbor() -> Self {
        Self {
            kind: KernelKind::NearestNeighbor,
            alpha: f64::INFINITY,
            head: vec![1.0],
            tail_amplitude: 0.0,
            total: 1.0,
        }
    }

    /// A tabulated kernel `j(1..=head.len())` continued by `A n^{-(1+α)}`.
    pub fn from_table(alpha: f64, head: Vec<f64>, tail_amplitude: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        if !(tail_amplitude.is_finite() && tail_amplitude >= 0.0) {
            return Err(invalid("tail_amplitude", "must be finite and >= 0"));
        }
        if head.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("head", "coefficients must be finite and >= 0"));
        }
        if tail_amplitude == 0.0 && head.iter().all(|v| *v == 0.0) {
            return Err(invalid("head", "kernel is identically zero"));
        }
        let mut acc = Compensated::default();
        for v in head.iter().rev() {
            acc.add(*v);
        }
        if tail_amplitude > 0.0 {
            acc.add(tail_amplitude * hurwitz_unchecked(1.0 + alpha, head.len() as f64 + 1.0));
        }
        Ok(Self {
            kind: KernelKind::Table,
            alpha,
            head,
            tail_amplitude,
            total: acc.value(),
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coupling at distance `n`; `j(0) = 0`.
    pub fn j(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else if n <= self.head.len() {
            self.head[n - 1]
        } else if self.tail_amplitude == 0.0 {
            0.0
        } else {
            self.tail_amplitude * (n as f64).powf(-(1.0 + self.alpha))
        }
    }

    /// `J = Σ_{n≥1} j(n)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail_amplitude
    }

    /// Number of explicitly stored coefficients.
    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    /// Exact remainder `Σ_{n>m} j(n)`.
    pub fn tail_sum(&self, m: usize) -> f64 {
        self.tail_power_sum(m, 1.0)
    }

    /// Exact `Σ_{n>m} j(n)^p` for `p ≥ 1`.
    pub fn tail_power_sum(&self, m: usize, p: f64) -> f64 {
        let mut acc = Compensated::default();
        for n in (m + 1..=self.head.len()).rev() {
            acc.add(self.head[n - 1].powf(p));
        }
        if self.tail_amplitude > 0.0 {
            let from = m.max(self.head.len()) as f64 + 1.0;
            acc.add(self.tail_amplitude.powf(p) * hurwitz_unchecked(p * (1.0 + self.alpha), from));
        }
        acc.value()
    }

    /// Upper bound on `Σ_{n>m} j(n)` by integral comparison.
    ///
    /// For the power law this is `m^{-α}/α + (m+1)^{-(1+α)}`.
    pub fn tail_bound(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(invalid("M", "must be >= 1"));
        }
        let mut bound: f64 = (m + 1..=self.head.len()).map(|n| self.head[n - 1]).sum();
        if self.tail_amplitude > 0.0 {
            let mm = m.max(self.head.len()) as f64;
            bound += self.tail_amplitude
                * (mm.powf(-self.alpha) / self.alpha + (mm + 1.0).powf(-(1.0 + self.alpha)));
        }
        Ok(bound)
    }

    /// `Σ_{n≥1} j(n)(1 − cos nk)` within `tol`.
    pub fn cosine_sum(&self, k: f64, tol: f64) -> Result<SeriesValue> {
        self.cosine_sum_from(k, 1, tol)
    }

    /// `Σ_{n≥first} j(n)(1 − cos nk)` within `tol`.
    pub fn cosine_sum_from(&self, k: f64, first: usize, tol: f64) -> Result<SeriesValue> {
        crate::error::require_positive("tol", tol)?;
        if !k.is_finite() {
            return Err(invalid("k", "must be finite"));
        }
        series::cosine_sum(self, k, first, tol)
    }
}
