//! Weighted norms and the local-smoothing functional sigma^+. Composite
//! trapezoid quadrature on the uniform grid, matching the solver order.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SolutionHistory};
use crate::scalar::{rl, Scalar, C};
use crate::stencil::d1_second_order;
use crate::weight::WeightSpec;

/// Trapezoid weight for node j on an (n+1)-node grid, in units of dx.
#[inline]
pub fn trapz_factor<T: Scalar>(j: usize, n_nodes: usize) -> T {
    if j == 0 || j + 1 == n_nodes {
        rl::<T>(0.5)
    } else {
        T::one()
    }
}

/// Trapezoid integral of sampled real values with spacing `h`.
pub fn trapz<T: Scalar>(values: &[T], h: T) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let mut acc = (values[0] + values[n - 1]) * rl::<T>(0.5);
    for v in &values[1..n - 1] {
        acc = acc + *v;
    }
    acc * h
}

/// Weighted L2 norm (integral psi |u|^2 dx)^{1/2} by composite trapezoid.
pub fn weighted_l2_norm<T: Scalar>(u: &GridFunction<T>, w: &WeightSpec<T>) -> Result<T> {
    if u.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample in norm input".into()));
    }
    let dx = u.grid.dx();
    let n = u.len();
    let mut acc = T::zero();
    for (j, v) in u.values.iter().enumerate() {
        acc = acc + trapz_factor::<T>(j, n) * w.eval(u.grid.x(j)) * v.norm_sqr();
    }
    Ok((acc * dx).sqrt())
}

/// Unweighted L2 norm of one slice.
pub fn l2_norm<T: Scalar>(values: &[C<T>], dx: T) -> T {
    let n = values.len();
    let mut acc = T::zero();
    for (j, v) in values.iter().enumerate() {
        acc = acc + trapz_factor::<T>(j, n) * v.norm_sqr();
    }
    (acc * dx).sqrt()
}

/// L2 norm on a periodic box (flat weights: the last node is not the first).
pub fn l2_norm_periodic<T: Scalar>(values: &[C<T>], dx: T) -> T {
    (values.iter().map(|v| v.norm_sqr()).sum::<T>() * dx).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct SigmaPlusValue<T: Scalar> {
    pub value: T,
    /// window start realizing the supremum
    pub argmax_x0: T,
}

/// sigma^+(u; T): sup over unit windows [x0, x0+1] of the space-time L2 norm
/// over [0, t_end] x [x0, x0+1].
pub fn sigma_plus<T: Scalar>(
    history: &SolutionHistory<T>,
    t_end: T,
) -> Result<SigmaPlusValue<T>> {
    let grid = history.grid;
    if grid.length < T::one() {
        return Err(Error::DomainTooShort {
            needed: 1.0,
            have: grid.length.to_f64().unwrap_or(f64::NAN),
        });
    }
    if history.is_empty() {
        return Err(Error::InsufficientData("empty history".into()));
    }
    let dx = grid.dx();
    let dt = grid.dt();
    let window = (T::one() / dx).round().to_f64().unwrap() as usize;
    let n_nodes = grid.n_nodes();
    let last = ((t_end / dt).round().to_f64().unwrap() as usize).min(history.len() - 1);

    // per-slice window integrals via prefix sums, then trapezoid in time
    let n_windows = n_nodes - window;
    let mut totals = vec![T::zero(); n_windows];
    for n in 0..=last {
        let tw = trapz_factor::<T>(n, last + 1) * dt;
        let slice = history.slice(n);
        let mut prefix = vec![T::zero(); n_nodes + 1];
        for (j, v) in slice.iter().enumerate() {
            prefix[j + 1] = prefix[j] + v.norm_sqr();
        }
        for j0 in 0..n_windows {
            let sum = prefix[j0 + window + 1] - prefix[j0];
            let integral =
                (sum - rl::<T>(0.5) * (slice[j0].norm_sqr() + slice[j0 + window].norm_sqr())) * dx;
            totals[j0] = totals[j0] + tw * integral;
        }
    }
    let mut best = T::zero();
    let mut arg = T::zero();
    for (j0, v) in totals.iter().enumerate() {
        if *v > best {
            best = *v;
            arg = grid.x(j0);
        }
    }
    Ok(SigmaPlusValue { value: best.max(T::zero()).sqrt(), argmax_x0: arg })
}

/// Discrete X^psi norm of a history: max_n ||u^n||_{2,psi} plus
/// (sum_n dt ||D u^n||^2_{2,psi'})^{1/2}.
pub fn x_psi_norm<T: Scalar>(history: &SolutionHistory<T>, w: &WeightSpec<T>) -> T {
    let grid = history.grid;
    let dx = grid.dx();
    let dt = grid.dt();
    let n = grid.n_nodes();
    let mut max_l2 = T::zero();
    let mut deriv_acc = T::zero();
    for slice in &history.slices {
        let mut acc = T::zero();
        for (j, v) in slice.iter().enumerate() {
            acc = acc + trapz_factor::<T>(j, n) * w.eval(grid.x(j)) * v.norm_sqr();
        }
        max_l2 = max_l2.max((acc * dx).sqrt());

        let du = d1_second_order(slice, dx);
        let mut dacc = T::zero();
        for (j, v) in du.iter().enumerate() {
            dacc = dacc + trapz_factor::<T>(j, n) * w.d1(grid.x(j)) * v.norm_sqr();
        }
        deriv_acc = deriv_acc + dt * dacc * dx;
    }
    max_l2 + deriv_acc.max(T::zero()).sqrt()
}

/// Relative tail mass of a slice: integral over [L-1, L] of |u|^2 divided by
/// ||u||^2. Used by the truncation guard.
pub fn tail_mass_ratio<T: Scalar>(values: &[C<T>], dx: T, length: T) -> T {
    let n = values.len();
    let window = ((T::one() / dx).round().to_f64().unwrap() as usize).min(n - 1);
    let start = n - 1 - window;
    let tail: Vec<T> = values[start..].iter().map(|v| v.norm_sqr()).collect();
    let tail_mass = trapz(&tail, dx);
    let total: Vec<T> = values.iter().map(|v| v.norm_sqr()).collect();
    let total_mass = trapz(&total, dx);
    let _ = length;
    if total_mass > T::zero() {
        tail_mass / total_mass
    } else {
        T::zero()
    }
}
