//! Long-range lattice operators on finite windows.

use crate::error::{invalid, Error, Result};
use crate::kernels::{hurwitz_unchecked, Compensated, Kernel, KernelKind};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlannerScalar};
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    Periodic,
}

impl BoundaryCondition {
    /// Number of sites in a window of half-width `n`.
    pub fn window_len(self, n: usize) -> usize {
        match self {
            Self::Dirichlet => 2 * n + 1,
            Self::Periodic => 2 * n,
        }
    }
}

/// How the diagonal of the truncated Dirichlet operator is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirichletConvention {
    /// Exterior sites are zero but still couple: diagonal `2J` on every site.
    #[default]
    FullDiagonal,
    /// Only window sites couple: diagonal `Σ_{m in window, m≠n} j(|n−m|)`.
    WindowOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    ToeplitzPlusDiagonal,
    Circulant,
}

/// Complex amplitudes on a window, indexed from the leftmost site.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
    pub bc: BoundaryCondition,
    half_width: usize,
}

impl LatticeState {
    pub fn new(bc: BoundaryCondition, half_width: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = bc.window_len(half_width);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: amplitudes.len() });
        }
        if let Some(i) = amplitudes.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { time: 0.0, site: i as i64 - half_width as i64 });
        }
        Ok(Self { amplitudes, time: 0.0, bc, half_width })
    }

    pub fn zeros(bc: BoundaryCondition, half_width: usize) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); bc.window_len(half_width)],
            time: 0.0,
            bc,
            half_width,
        }
    }

    /// Builds a state from a function of the site label.
    pub fn from_fn(bc: BoundaryCondition, half_width: usize, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let n = half_width as i64;
        let amps = (0..bc.window_len(half_width) as i64).map(|i| f(i - n)).collect();
        Self::new(bc, half_width, amps)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Site label of storage index `i`.
    pub fn site(&self, i: usize) -> i64 {
        i as i64 - self.half_width as i64
    }

    /// Storage index of site label `n`, if inside the window.
    pub fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.half_width as i64;
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }
}

/// `ε ℒ` on a window, stored as a diagonal plus an even coupling profile.
#[derive(Clone)]
pub struct DiscreteOperator {
    half_width: usize,
    eps: f64,
    kernel: Kernel,
    bc: BoundaryCondition,
    convention: DirichletConvention,
    /// `ε` times the diagonal, per site.
    diagonal: Vec<f64>,
    /// `ε c(d)` for `d = 0..len`; the off-diagonal entry is `−profile[d]`.
    /// For periodic windows `d` is the circular distance `(m − n) mod 2N`.
    profile: Vec<f64>,
    /// Eigenvalues of the circulant used by the fast path.
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DiscreteOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteOperator")
            .field("half_width", &self.half_width)
            .field("eps", &self.eps)
            .field("bc", &self.bc)
            .field("convention", &self.convention)
            .field("kernel", &self.kernel)
            .finish_non_exhaustive()
    }
}

fn check_common(half_width: usize, eps: f64) -> Result<()> {
    if half_width == 0 {
        return Err(invalid("N", "must be >= 1"));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid("eps", format!("must be finite and >= 0, got {eps}")));
    }
    Ok(())
}

/// Dirichlet operator with the default full-diagonal closure.
pub fn build_dirichlet(half_width: usize, eps: f64, kernel: &Kernel) -> Result<DiscreteOperator> {
    build_dirichlet_with(half_width, eps, kernel, DirichletConvention::default())
}

pub fn build_dirichlet_with(
    half_width: usize,
    eps: f64,
    kernel: &Kernel,
    convention: DirichletConvention,
) -> Result<DiscreteOperator> {
    check_common(half_width, eps)?;
    let len = 2 * half_width + 1;
    let profile: Vec<f64> = (0..len).map(|d| eps * kernel.j(d)).collect();
    let diagonal = match convention {
        DirichletConvention::FullDiagonal => vec![eps * 2.0 * kernel.total(); len],
        DirichletConvention::WindowOnly => {
            // prefix[d] = Σ_{e=1}^{d} j(e)
            let mut prefix = vec![0.0; len];
            for d in 1..len {
                prefix[d] = prefix[d - 1] + kernel.j(d);
            }
            (0..len).map(|i| eps * (prefix[i] + prefix[len - 1 - i])).collect()
        }
    };

    // Embed the symmetric Toeplitz part in a circulant of size >= 2 len.
    let size = (2 * len).next_power_of_two();
    let mut column = vec![Complex64::new(0.0, 0.0); size];
    for d in 1..len {
        column[d] = Complex64::new(-profile[d], 0.0);
        column[size - d] = Complex64::new(-profile[d], 0.0);
    }
    finish(half_width, eps, kernel, BoundaryCondition::Dirichlet, convention, diagonal, profile, column)
}

/// Periodic operator on the cell `−N..N−1`, with all images of the lattice
/// summed in closed form through the Hurwitz zeta function.
pub fn build_periodic(half_width: usize, eps: f64, kernel: &Kernel) -> Result<DiscreteOperator> {
    check_common(half_width, eps)?;
    if half_width < 2 {
        return Err(invalid("N", "periodic cell needs N >= 2"));
    }
    let len = 2 * half_width;
    let (diag, coupling): (f64, Vec<f64>) = match kernel.kind() {
        KernelKind::PowerLaw => {
            let s = 1.0 + kernel.alpha();
            let cell = len as f64;
            let scale = cell.powf(-s);
            let zeta = kernel.total();
            // Only circular distances up to N are evaluated; the rest mirror
            // them so the matrix is symmetric bit for bit.
            let mut c = vec![0.0; len];
            for d in 1..=half_width {
                let a = d as f64 / cell;
                c[d] = (d as f64).powf(-s) + scale * (hurwitz_unchecked(s, 1.0 + a) + hurwitz_unchecked(s, 1.0 - a));
                c[len - d] = c[d];
            }
            (2.0 * zeta * (1.0 - scale), c)
        }
        KernelKind::NearestNeighbor => {
            let mut c = vec![0.0; len];
            c[1] = 1.0;
            c[len - 1] = 1.0;
            (2.0, c)
        }
        KernelKind::Table => {
            return Err(Error::Unsupported(
                "periodic closure is available for power-law and nearest-neighbour kernels only".into(),
            ))
        }
    };
    let profile: Vec<f64> = coupling.iter().map(|c| eps * c).collect();
    let column: Vec<Complex64> = (0..len)
        .map(|d| Complex64::new(if d == 0 { eps * diag } else { -profile[d] }, 0.0))
        .collect();
    finish(
        half_width,
        eps,
        kernel,
        BoundaryCondition::Periodic,
        DirichletConvention::default(),
        vec![eps * diag; len],
        profile,
        column,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    half_width: usize,
    eps: f64,
    kernel: &Kernel,
    bc: BoundaryCondition,
    convention: DirichletConvention,
    diagonal: Vec<f64>,
    profile: Vec<f64>,
    mut column: Vec<Complex64>,
) -> Result<DiscreteOperator> {
    let mut planner = FftPlannerScalar::new();
    let forward = planner.plan_fft_forward(column.len());
    let inverse = planner.plan_fft_inverse(column.len());
    forward.process(&mut column);
    Ok(DiscreteOperator {
        half_width,
        eps,
        kernel: kernel.clone(),
        bc,
        convention,
        diagonal,
        profile,
        spectrum: column,
        forward,
        inverse,
    })
}

impl DiscreteOperator {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.bc.window_len(self.half_width)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn convention(&self) -> DirichletConvention {
        self.convention
    }

    pub fn structure(&self) -> Structure {
        match self.bc {
            BoundaryCondition::Dirichlet => Structure::ToeplitzPlusDiagonal,
            BoundaryCondition::Periodic => Structure::Circulant,
        }
    }

    /// Matrix entry `(i, j)` by storage index.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        let d = match self.bc {
            BoundaryCondition::Dirichlet => i.abs_diff(j),
            BoundaryCondition::Periodic => (j + self.len() - i) % self.len(),
        };
        -self.profile[d]
    }

    /// Dense row-major matrix.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.coefficient(i, j);
            }
        }
        m
    }

    /// Upper bound on the spectral radius: the largest eigenvalue for
    /// periodic windows, the Gershgorin radius for Dirichlet windows.
    pub fn spectral_bound(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Periodic => self.spectrum.iter().map(|z| z.re).fold(0.0, f64::max),
            BoundaryCondition::Dirichlet => {
                let n = self.len();
                let off: f64 = self.profile[1..n].iter().sum::<f64>() * 2.0;
                self.diagonal.iter().fold(0.0_f64, |m, d| m.max(d.abs())) + off
            }
        }
    }

    /// Eigenvalues `λ_j` at `k_j = πj/N`, `j = 0..2N`; periodic only.
    pub fn periodic_eigenvalues(&self) -> Result<Vec<f64>> {
        match self.bc {
            BoundaryCondition::Periodic => Ok(self.spectrum.iter().map(|z| z.re).collect()),
            BoundaryCondition::Dirichlet => Err(Error::Unsupported("eigenvalues of Dirichlet windows".into())),
        }
    }

    /// `ε ℒ u` through the FFT fast path.
    pub fn apply(&self, state: &LatticeState) -> Result<Vec<Complex64>> {
        self.check_len(state.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        self.apply_into(&state.amplitudes, &mut out);
        Ok(out)
    }

    /// Reference `O(n²)` product, one row per task.
    pub fn apply_dense(&self, state: &LatticeState) -> Result<Vec<Complex64>> {
        self.check_len(state.len())?;
        let u = &state.amplitudes;
        let n = u.len();
        Ok((0..n)
            .into_par_iter()
            .map(|i| {
                let mut re = Compensated::default();
                let mut im = Compensated::default();
                for (j, uj) in u.iter().enumerate() {
                    let c = self.coefficient(i, j);
                    re.add(c * uj.re);
                    im.add(c * uj.im);
                }
                Complex64::new(re.value(), im.value())
            })
            .collect())
    }

    /// Fast product on a raw slice; `out.len() == u.len() == self.len()`.
    pub fn apply_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        assert_eq!(u.len(), n, "state length");
        assert_eq!(out.len(), n, "output length");
        let size = self.spectrum.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        buf[..n].copy_from_slice(u);
        self.forward.process(&mut buf);
        for (b, l) in buf.iter_mut().zip(&self.spectrum) {
            *b *= l;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / size as f64;
        match self.bc {
            BoundaryCondition::Periodic => {
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o = b * scale;
                }
            }
            BoundaryCondition::Dirichlet => {
                for i in 0..n {
                    out[i] = buf[i] * scale + u[i] * self.diagonal[i];
                }
            }
        }
    }

    /// Multiplies by `exp(−i τ ε ℒ)` exactly; periodic only.
    pub fn propagate_linear(&self, u: &mut [Complex64], tau: f64) -> Result<()> {
        if self.bc != BoundaryCondition::Periodic {
            return Err(Error::Unsupported("exact linear propagation needs a periodic window".into()));
        }
        self.check_len(u.len())?;
        self.forward.process(u);
        let scale = 1.0 / u.len() as f64;
        for (z, l) in u.iter_mut().zip(&self.spectrum) {
            *z *= Complex64::from_polar(scale, -tau * l.re);
        }
        self.inverse.process(u);
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.len(), got })
        }
    }

    /// Writes every entry as `row,col,value` with site labels.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,value")?;
        let n = self.len();
        let h = self.half_width as i64;
        for i in 0..n {
            for j in 0..n {
                writeln!(w, "{},{},{:e}", i as i64 - h, j as i64 - h, self.coefficient(i, j))?;
            }
        }
        Ok(())
    }
}

/// `σ_α(k) = 2ε Σ_{n≥1} j(n)(1 − cos nk)`, within `tol`.
pub fn symbol_fractional(k: f64, eps: f64, kernel: &Kernel, tol: f64) -> Result<f64> {
    if eps == 0.0 {
        return Ok(0.0);
    }
    crate::error::require_positive("eps", eps)?;
    Ok(2.0 * eps * kernel.cosine_sum(k, tol / (2.0 * eps))?.value)
}

/// Nearest-neighbour symbol `4ε sin²(k/2)`.
pub fn symbol_nn(k: f64, eps: f64) -> f64 {
    let s = (0.5 * k).sin();
    4.0 * eps * s * s
}

/// Gap between the power-law and nearest-neighbour symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolGap {
    /// Largest `|σ_α(k) − σ(k)|` seen on the grid.
    pub measured: f64,
    /// Where it was attained.
    pub argmax: f64,
    /// `2ε Σ_{|n|≥2} |n|^{-(1+α)} = 4ε(ζ(1+α) − 1)`.
    pub bound: f64,
}

/// Default grid for [`symbol_sup_gap`].
pub const SUP_GAP_POINTS: usize = 4096;

/// Sup over `k ∈ [0, π]` of the symbol gap, on an even grid of `points + 1` nodes.
pub fn symbol_sup_gap(alpha: f64, eps: f64, points: usize) -> Result<SymbolGap> {
    let kernel = Kernel::power_law(alpha)?;
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid("eps", "must be finite and >= 0"));
    }
    if points < 2 {
        return Err(invalid("points", "need at least 2 grid points"));
    }
    let bound = 4.0 * eps * (kernel.total() - 1.0);
    if eps == 0.0 {
        return Ok(SymbolGap { measured: 0.0, argmax: 0.0, bound: 0.0 });
    }
    let values: Vec<(f64, f64)> = (0..=points)
        .into_par_iter()
        .map(|i| {
            let k = std::f64::consts::PI * i as f64 / points as f64;
            // j(1) = 1 cancels against the nearest-neighbour bond.
            kernel.cosine_sum_from(k, 2, 1e-14).map(|v| (k, 2.0 * eps * v.value))
        })
        .collect::<Result<_>>()?;
    let (argmax, measured) = values
        .into_iter()
        .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(SymbolGap { measured, argmax, bound })
}
