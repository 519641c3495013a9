//! Truncated half-line grids and complex-valued grid functions.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{rl, Scalar, C};

/// Uniform grid on the truncated half-line `[0, L]` with time horizon `[0, T]`.
///
/// Spatial nodes `x_j = j * dx`, `j = 0..=N`; time nodes `t_n = n * dt`,
/// `n = 0..=M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLineGrid<T: Scalar> {
    pub length: T,
    pub n_cells: usize,
    pub horizon: T,
    pub n_steps: usize,
}

impl<T: Scalar> HalfLineGrid<T> {
    pub fn new(length: T, n_cells: usize, horizon: T, n_steps: usize) -> Result<Self> {
        if !(length > T::zero()) || !(horizon > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "grid extents must be positive: L = {length}, T = {horizon}"
            )));
        }
        if n_cells < 8 || n_steps < 2 {
            return Err(Error::InvalidInput(format!(
                "grid too small: N = {n_cells} (>= 8), M = {n_steps} (>= 2)"
            )));
        }
        Ok(Self { length, n_cells, horizon, n_steps })
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.length / rl::<T>(self.n_cells as f64)
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.horizon / rl::<T>(self.n_steps as f64)
    }

    #[inline]
    pub fn x(&self, j: usize) -> T {
        rl::<T>(j as f64) * self.dx()
    }

    #[inline]
    pub fn t(&self, n: usize) -> T {
        rl::<T>(n as f64) * self.dt()
    }

    /// Number of spatial nodes, `N + 1`.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Dyadic refinement in both space and time.
    pub fn refined(&self) -> Self {
        Self {
            length: self.length,
            n_cells: self.n_cells * 2,
            horizon: self.horizon,
            n_steps: self.n_steps * 2,
        }
    }
}

/// One time slice of a complex field on a [`HalfLineGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar> {
    pub grid: HalfLineGrid<T>,
    pub values: Vec<C<T>>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: HalfLineGrid<T>, values: Vec<C<T>>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InvalidInput(format!(
                "grid function length {} does not match grid nodes {}",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample in grid function".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: HalfLineGrid<T>) -> Self {
        Self { grid, values: vec![Complex::new(T::zero(), T::zero()); grid.n_nodes()] }
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(grid: HalfLineGrid<T>, mut f: impl FnMut(T) -> C<T>) -> Self {
        let values = (0..grid.n_nodes()).map(|j| f(grid.x(j))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full time history of a solve: slices `u^n` for `n = 0..=M`.
#[derive(Clone, Debug)]
pub struct SolutionHistory<T: Scalar> {
    pub grid: HalfLineGrid<T>,
    pub slices: Vec<Vec<C<T>>>,
}

impl<T: Scalar> SolutionHistory<T> {
    pub fn new(grid: HalfLineGrid<T>) -> Self {
        Self { grid, slices: Vec::with_capacity(grid.n_steps + 1) }
    }

    pub fn push(&mut self, slice: Vec<C<T>>) {
        debug_assert_eq!(slice.len(), self.grid.n_nodes());
        self.slices.push(slice);
    }

    #[inline]
    pub fn slice(&self, n: usize) -> &[C<T>] {
        &self.slices[n]
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice_fn(&self, n: usize) -> GridFunction<T> {
        GridFunction { grid: self.grid, values: self.slices[n].clone() }
    }

    /// Truncate to the first `n + 1` slices (history on `[0, t_n]`).
    pub fn prefix(&self, n: usize) -> Self {
        Self { grid: self.grid, slices: self.slices[..=n].to_vec() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn grid_nodes_and_steps() {
        let g = HalfLineGrid::<f64>::new(10.0, 100, 1.0, 50).unwrap();
        assert_eq!(g.dx(), 0.1);
        assert_eq!(g.dt(), 0.02);
        assert_eq!(g.n_nodes(), 101);
        assert!((g.x(100) - 10.0).abs() < 1e-14);
        assert!((g.t(50) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(HalfLineGrid::<f64>::new(0.0, 100, 1.0, 50).is_err());
        assert!(HalfLineGrid::<f64>::new(1.0, 4, 1.0, 50).is_err());
        assert!(HalfLineGrid::<f64>::new(1.0, 100, 1.0, 1).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = HalfLineGrid::<f64>::new(1.0, 8, 1.0, 2).unwrap();
        let mut v = vec![cx(0.0, 0.0); 9];
        v[3] = cx(f64::NAN, 0.0);
        assert!(matches!(GridFunction::new(g, v), Err(Error::InvalidInput(_))));
    }
}
