//! Finite-difference machinery: Fornberg weights, fixed second-order stencils,
//! and boundary-trace extraction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{rl, Scalar, C};

/// Fornberg weights for derivatives `0..=max_order` at `x0` on arbitrary nodes.
///
/// Returns `w[k][j]` with `f^(k)(x0) ~ sum_j w[k][j] f(nodes[j])`.
pub fn fornberg_weights<T: Scalar>(x0: T, nodes: &[T], max_order: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    assert!(n > max_order, "need more nodes than derivative order");
    let mut c = vec![vec![T::zero(); max_order + 1]; n];
    let mut c1 = T::one();
    let mut c4 = nodes[0] - x0;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (rl::<T>(k as f64) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - rl::<T>(k as f64) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // transpose to w[k][j]
    (0..=max_order).map(|k| (0..n).map(|j| c[j][k]).collect()).collect()
}

/// Weights for the m-th derivative at integer offset `at` within a uniform
/// window of `width` nodes starting at offset 0. Scaled by `dx^-m` by caller.
pub fn uniform_weights<T: Scalar>(at: usize, width: usize, m: usize) -> Vec<T> {
    let nodes: Vec<T> = (0..width).map(|j| rl::<T>(j as f64)).collect();
    fornberg_weights(rl::<T>(at as f64), &nodes, m).swap_remove(m)
}

/// m-th spatial derivative of a sampled function on a uniform grid, using a
/// sliding window of `width` nodes (shifted near the ends).
pub fn derivative_uniform<T: Scalar>(
    u: &[C<T>],
    dx: T,
    m: usize,
    width: usize,
) -> Result<Vec<C<T>>> {
    let n = u.len();
    if n < width {
        return Err(Error::Accuracy { order: m, needed: width, have: n });
    }
    let scale = dx.powi(-(m as i32));
    let half = width / 2;
    // weights depend only on the offset of the evaluation node inside the window
    let tables: Vec<Vec<T>> = (0..width).map(|at| uniform_weights(at, width, m)).collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..n {
        let start = j.saturating_sub(half).min(n - width);
        let w = &tables[j - start];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, wk) in w.iter().enumerate() {
            acc = acc + u[start + k] * *wk;
        }
        out[j] = acc * scale;
    }
    Ok(out)
}

/// First derivative, second order: centered interior, one-sided at both ends.
pub fn d1_second_order<T: Scalar>(u: &[C<T>], dx: T) -> Vec<C<T>> {
    let n = u.len();
    assert!(n >= 3);
    let two = rl::<T>(2.0);
    let half = (two * dx).recip();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    out[0] = (-u[0] * rl::<T>(3.0) + u[1] * rl::<T>(4.0) - u[2]) * half;
    for j in 1..n - 1 {
        out[j] = (u[j + 1] - u[j - 1]) * half;
    }
    out[n - 1] = (u[n - 1] * rl::<T>(3.0) - u[n - 2] * rl::<T>(4.0) + u[n - 3]) * half;
    out
}

/// Second derivative, second order: centered interior, one-sided at ends.
pub fn d2_second_order<T: Scalar>(u: &[C<T>], dx: T) -> Vec<C<T>> {
    let n = u.len();
    assert!(n >= 4);
    let s = (dx * dx).recip();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    out[0] = (u[0] * rl::<T>(2.0) - u[1] * rl::<T>(5.0) + u[2] * rl::<T>(4.0) - u[3]) * s;
    for j in 1..n - 1 {
        out[j] = (u[j - 1] - u[j] * rl::<T>(2.0) + u[j + 1]) * s;
    }
    out[n - 1] = (u[n - 1] * rl::<T>(2.0) - u[n - 2] * rl::<T>(5.0) + u[n - 3] * rl::<T>(4.0)
        - u[n - 4])
        * s;
    out
}

/// Boundary trace u_x(0), one-sided second order.
#[inline]
pub fn ux_at_left<T: Scalar>(u: &[C<T>], dx: T) -> C<T> {
    (-u[0] * rl::<T>(3.0) + u[1] * rl::<T>(4.0) - u[2]) / (rl::<T>(2.0) * dx)
}

/// Boundary trace u_xx(0), one-sided second order.
#[inline]
pub fn uxx_at_left<T: Scalar>(u: &[C<T>], dx: T) -> C<T> {
    (u[0] * rl::<T>(2.0) - u[1] * rl::<T>(5.0) + u[2] * rl::<T>(4.0) - u[3]) / (dx * dx)
}
