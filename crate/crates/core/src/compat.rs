//! Compatibility recursion for the linear problem: the chain
//! Phi_0 = u0, Phi_l = -i d_t^{l-1} f(0,.) + (i a d_x^2 - b d_x - d_x^3) Phi_{l-1},
//! whose boundary values must match mu^{(l)}(0) for smooth solvability.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scalar::{Scalar, C};
use crate::stencil::derivative_uniform;

/// Stencil width used for the spatial derivatives in the recursion
/// (order-6 interior accuracy for the third derivative).
const CHAIN_STENCIL_WIDTH: usize = 9;

#[derive(Clone, Debug)]
pub struct CompatibilityChain<T: Scalar> {
    /// Phi_0 .. Phi_order
    pub phi: Vec<GridFunction<T>>,
    /// |mu^{(l)}(0) - Phi_l(0)| for l = 0..=order
    pub mismatches: Vec<T>,
}

/// Build the chain up to `order`. `f_time_derivs` holds d_t^l f(0, .) for
/// l = 0..; missing entries are treated as zero. `mu_derivs` holds
/// mu^{(l)}(0) for l = 0..; missing entries are treated as zero.
pub fn compatibility_chain<T: Scalar>(
    u0: &GridFunction<T>,
    f_time_derivs: &[GridFunction<T>],
    mu_derivs: &[C<T>],
    a: T,
    b: T,
    order: usize,
) -> Result<CompatibilityChain<T>> {
    let grid = u0.grid;
    let n_nodes = grid.n_nodes();
    if order > 2 {
        let needed = 3 * order + CHAIN_STENCIL_WIDTH;
        if n_nodes < needed {
            return Err(Error::Accuracy { order: 3 * order, needed, have: n_nodes });
        }
    }
    let dx = grid.dx();
    let ii = Complex::new(T::zero(), T::one());

    let mut phi: Vec<GridFunction<T>> = vec![u0.clone()];
    for l in 1..=order {
        let prev = &phi[l - 1].values;
        let d1 = derivative_uniform(prev, dx, 1, CHAIN_STENCIL_WIDTH)?;
        let d2 = derivative_uniform(prev, dx, 2, CHAIN_STENCIL_WIDTH)?;
        let d3 = derivative_uniform(prev, dx, 3, CHAIN_STENCIL_WIDTH)?;
        let mut next = vec![Complex::new(T::zero(), T::zero()); n_nodes];
        for j in 0..n_nodes {
            next[j] = ii * a * d2[j] - d1[j] * b - d3[j];
        }
        if let Some(fd) = f_time_derivs.get(l - 1) {
            for j in 0..n_nodes {
                next[j] = next[j] - ii * fd.values[j];
            }
        }
        phi.push(GridFunction { grid, values: next });
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mismatches = (0..=order)
        .map(|l| {
            let mu_l = mu_derivs.get(l).copied().unwrap_or(zero);
            (mu_l - phi[l].values[0]).norm()
        })
        .collect();
    Ok(CompatibilityChain { phi, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HalfLineGrid;
    use crate::scalar::cx;

    #[test]
    fn level_zero_is_the_initial_datum() {
        let grid = HalfLineGrid::new(10.0f64, 256, 1.0, 16).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| cx((-x).exp() * x, 0.2 * x * (-x).exp()));
        let chain = compatibility_chain(&u0, &[], &[], 1.0, -0.5, 0).unwrap();
        assert_eq!(chain.phi[0], u0);
        // mu = 0 and u0(0) = 0: compatible at level 0
        assert!(chain.mismatches[0] < 1e-15);
    }

    #[test]
    fn pure_airy_chain_on_exponential_datum() {
        // a = b = 0, f = 0, u0 = e^{-x}: Phi_1 = -u0''' = e^{-x}, Phi_1(0) = 1.
        // The one-sided boundary stencil floors near 1e-7 in f64 (weights grow
        // as dx^-3), hence the tolerance.
        let grid = HalfLineGrid::new(30.0f64, 3000, 1.0, 16).unwrap();
        let u0 = GridFunction::from_fn(grid, |x| cx((-x).exp(), 0.0));
        let chain = compatibility_chain(&u0, &[], &[cx(1.0, 0.0), cx(1.0, 0.0)], 0.0, 0.0, 1).unwrap();
        assert!((chain.phi[1].values[0] - cx(1.0, 0.0)).norm() < 1e-6);
        assert!(chain.mismatches[1] < 1e-6);
        let j = 500;
        let x = grid.x(j);
        assert!((chain.phi[1].values[j].re - (-x).exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_data_gives_zero_chain() {
        let grid = HalfLineGrid::new(10.0f64, 128, 1.0, 16).unwrap();
        let u0 = GridFunction::zeros(grid);
        let chain = compatibility_chain(&u0, &[], &[], 1.0, 1.0, 2).unwrap();
        for phi in &chain.phi {
            assert!(phi.values.iter().all(|v| v.norm() == 0.0));
        }
        assert!(chain.mismatches.iter().all(|m| *m == 0.0));
    }

    #[test]
    fn coarse_grid_rejects_high_order() {
        let grid = HalfLineGrid::new(1.0f64, 8, 1.0, 16).unwrap();
        let u0 = GridFunction::zeros(grid);
        assert!(matches!(
            compatibility_chain(&u0, &[], &[], 0.0, 0.0, 3),
            Err(Error::Accuracy { .. })
        ));
    }
}
