pub mod dynamics;
pub mod energetics;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod kernels;
pub mod lattice;
pub mod mi;
pub mod modes;
pub mod quadrature;

pub use error::{Error, Result};
pub use kernels::{hurwitz_zeta, riemann_zeta, Kernel, KernelKind, SeriesValue};
pub use lattice::{
    build_dirichlet, build_dirichlet_with, build_periodic, symbol_fractional, symbol_nn, symbol_sup_gap,
    BoundaryCondition, DirichletConvention, DiscreteOperator, LatticeState, Structure, SymbolGap,
};
pub use dynamics::{
    energy, energy_with, integrate, mass, peak_index, peak_trace, step_rk4, DiagnosticsSeries, Nonlinearity, Scheme,
    SimConfig,
};
pub use mi::{amplitude_a0, is_unstable, k_max, omega_squared, phi, threshold_amplitude, w_tilde, MiQuery};
pub use modes::{
    dnls_offsite, dnls_onsite, fdnls_offsite, fdnls_onsite, residual_sup, rho_star, tail_diagnostics, ModeKind,
    ModeSequence, Model, ResidualReport, TailReport,
};
pub use energetics::{
    dnls_energies, dnls_pnb, fdnls_energies, fdnls_pnb, gamma_of_k, small_alpha_mass, small_eps_coefficient,
    FdnlsEnergies, PnbReport,
};
pub use flow::{dispersive_kernel, evolve_pair, kernel_decay, unitary_gap, FlowComparison, GapProbe, KernelDecay};
pub use experiments::{run_mi_pattern, run_mobility, MiPatternConfig, MiPatternResult, MobilityConfig, MobilityResult};
