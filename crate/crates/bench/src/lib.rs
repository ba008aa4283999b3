//! Fixtures shared by the benchmarks.

use fdnls_core::{BoundaryCondition, LatticeState};
use num_complex::Complex64;

/// A chirped Gaussian, so both real and imaginary parts are nonzero.
pub fn chirped_gaussian(bc: BoundaryCondition, half_width: usize) -> LatticeState {
    let w = (half_width as f64 / 8.0).max(1.0);
    LatticeState::from_fn(bc, half_width, |n| {
        let x = n as f64 / w;
        Complex64::from_polar((-0.5 * x * x).exp(), 0.3 * n as f64)
    })
    .expect("valid half width")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_complex() {
        let s = chirped_gaussian(BoundaryCondition::Periodic, 16);
        assert_eq!(s.len(), 32);
        assert!(s.amplitudes.iter().any(|z| z.im.abs() > 0.1));
    }
}
