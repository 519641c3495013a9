//! The cutoff function eta: smooth, non-decreasing, 0 below 0, 1 above 1,
//! with eta(x) + eta(1 - x) = 1. Realized as the normalized integral of the
//! bump exp(-1/(x(1-x))), which makes the identity hold by symmetry.

use crate::quad::GaussRule;
use crate::scalar::{rl, Scalar};

#[derive(Clone, Debug)]
pub struct CutoffEta<T: Scalar> {
    rule: GaussRule<T>,
    /// integral of the bump over [0, 1]
    norm: T,
}

fn bump<T: Scalar>(x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        return T::zero();
    }
    let phi = x * (T::one() - x);
    (-phi.recip()).exp()
}

impl<T: Scalar> Default for CutoffEta<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> CutoffEta<T> {
    pub fn new() -> Self {
        let rule = GaussRule::new(24);
        let norm = rule.integrate(T::zero(), T::one(), 8, bump);
        Self { rule, norm }
    }

    pub fn eval(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else if x >= T::one() {
            T::one()
        } else {
            self.rule.integrate(T::zero(), x, 8, bump) / self.norm
        }
    }

    pub fn d1(&self, x: T) -> T {
        bump(x) / self.norm
    }

    pub fn d2(&self, x: T) -> T {
        if x <= T::zero() || x >= T::one() {
            return T::zero();
        }
        let r = Self::log_deriv(x);
        bump(x) * r / self.norm
    }

    pub fn d3(&self, x: T) -> T {
        if x <= T::zero() || x >= T::one() {
            return T::zero();
        }
        let r = Self::log_deriv(x);
        let rp = Self::log_deriv_prime(x);
        bump(x) * (r * r + rp) / self.norm
    }

    /// (log bump)' = (1 - 2x) / (x(1-x))^2
    fn log_deriv(x: T) -> T {
        let phi = x * (T::one() - x);
        (T::one() - rl::<T>(2.0) * x) / (phi * phi)
    }

    /// d/dx of `log_deriv`
    fn log_deriv_prime(x: T) -> T {
        let two = rl::<T>(2.0);
        let phi = x * (T::one() - x);
        let s = T::one() - two * x;
        (-two * phi - two * s * s) / (phi * phi * phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn endpoint_values() {
        let eta = CutoffEta::<f64>::new();
        assert_eq!(eta.eval(0.0), 0.0);
        assert_eq!(eta.eval(1.0), 1.0);
        assert_eq!(eta.eval(-3.0), 0.0);
        assert_eq!(eta.eval(7.0), 1.0);
    }

    #[test]
    fn midpoint_is_half() {
        let eta = CutoffEta::<f64>::new();
        assert_relative_eq!(eta.eval(0.5), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn antisymmetry_at_quarter() {
        let eta = CutoffEta::<f64>::new();
        assert_relative_eq!(eta.eval(0.25) + eta.eval(0.75), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eta = CutoffEta::<f64>::new();
        let h = 1e-5;
        for &x in &[0.2, 0.4, 0.55, 0.8] {
            let fd1 = (eta.eval(x + h) - eta.eval(x - h)) / (2.0 * h);
            assert_relative_eq!(fd1, eta.d1(x), max_relative = 1e-7);
            let fd2 = (eta.d1(x + h) - eta.d1(x - h)) / (2.0 * h);
            assert_relative_eq!(fd2, eta.d2(x), max_relative = 1e-6);
            let fd3 = (eta.d2(x + h) - eta.d2(x - h)) / (2.0 * h);
            assert_relative_eq!(fd3, eta.d3(x), max_relative = 1e-5);
        }
    }

    proptest! {
        #[test]
        fn antisymmetry_identity(x in -0.5f64..1.5) {
            let eta = CutoffEta::<f64>::new();
            let s = eta.eval(x) + eta.eval(1.0 - x);
            prop_assert!((s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn non_decreasing(x in 0.0f64..0.99, dx in 1e-4f64..0.2) {
            let eta = CutoffEta::<f64>::new();
            prop_assert!(eta.eval(x + dx) >= eta.eval(x) - 1e-14);
        }
    }
}
