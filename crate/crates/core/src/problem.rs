//! Problem data: boundary signals, source terms, and the full coefficient
//! set for one initial-boundary value problem.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, HalfLineGrid};
use crate::scalar::{rl, Scalar, C};

type SignalFn<T> = Arc<dyn Fn(T) -> C<T> + Send + Sync>;
type FieldFn<T> = Arc<dyn Fn(T, T) -> C<T> + Send + Sync>;

/// Boundary trace mu(t) at x = 0.
#[derive(Clone)]
pub enum BoundarySignal<T: Scalar> {
    Zero,
    /// closed-form signal
    Analytic(SignalFn<T>),
    /// sum of c_k e^{i 2 pi k t / period}; exactly periodic on the window
    Modes { period: T, modes: Vec<(i64, C<T>)> },
    /// uniform samples with spacing dt, linearly interpolated
    Samples { dt: T, values: Vec<C<T>> },
}

impl<T: Scalar> fmt::Debug for BoundarySignal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic(_) => write!(f, "Analytic"),
            Self::Modes { period, modes } => {
                write!(f, "Modes {{ period: {period}, count: {} }}", modes.len())
            }
            Self::Samples { dt, values } => {
                write!(f, "Samples {{ dt: {dt}, count: {} }}", values.len())
            }
        }
    }
}

impl<T: Scalar> BoundarySignal<T> {
    pub fn analytic(f: impl Fn(T) -> C<T> + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    pub fn eval(&self, t: T) -> C<T> {
        match self {
            Self::Zero => Complex::new(T::zero(), T::zero()),
            Self::Analytic(f) => f(t),
            Self::Modes { period, modes } => {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (k, c) in modes {
                    let lambda = rl::<T>(2.0) * T::PI() * rl::<T>(*k as f64) / *period;
                    acc = acc + *c * Complex::from_polar(T::one(), lambda * t);
                }
                acc
            }
            Self::Samples { dt, values } => {
                if values.is_empty() {
                    return Complex::new(T::zero(), T::zero());
                }
                let s = (t / *dt).to_f64().unwrap_or(0.0).max(0.0);
                let j = (s.floor() as usize).min(values.len() - 1);
                let j1 = (j + 1).min(values.len() - 1);
                let frac = rl::<T>(s - j as f64);
                values[j] * (T::one() - frac) + values[j1] * frac
            }
        }
    }
}

/// Right-hand side f(t, x).
#[derive(Clone)]
pub enum SourceTerm<T: Scalar> {
    Zero,
    Analytic(FieldFn<T>),
    /// slices sampled with time spacing dt on the solver grid
    Samples { dt: T, slices: Vec<Vec<C<T>>> },
}

impl<T: Scalar> fmt::Debug for SourceTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Analytic(_) => write!(f, "Analytic"),
            Self::Samples { dt, slices } => {
                write!(f, "Samples {{ dt: {dt}, count: {} }}", slices.len())
            }
        }
    }
}

impl<T: Scalar> SourceTerm<T> {
    pub fn analytic(f: impl Fn(T, T) -> C<T> + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }

    /// Sample f(t, .) on the grid nodes (linear interpolation in t for the
    /// sampled variant, second order at step midpoints).
    pub fn eval_slice(&self, grid: &HalfLineGrid<T>, t: T) -> Vec<C<T>> {
        match self {
            Self::Zero => vec![Complex::new(T::zero(), T::zero()); grid.n_nodes()],
            Self::Analytic(f) => (0..grid.n_nodes()).map(|j| f(t, grid.x(j))).collect(),
            Self::Samples { dt, slices } => {
                let s = (t / *dt).to_f64().unwrap_or(0.0).max(0.0);
                let j = (s.floor() as usize).min(slices.len() - 1);
                let j1 = (j + 1).min(slices.len() - 1);
                let frac = rl::<T>(s - j as f64);
                slices[j]
                    .iter()
                    .zip(&slices[j1])
                    .map(|(x, y)| *x * (T::one() - frac) + *y * frac)
                    .collect()
            }
        }
    }
}

/// Coefficients and data of one initial-boundary value problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec<T: Scalar> {
    pub a: T,
    pub b: T,
    pub lambda: T,
    pub beta: T,
    pub gamma: T,
    pub p: T,
    pub u0: GridFunction<T>,
    pub mu: BoundarySignal<T>,
    pub f: SourceTerm<T>,
}

impl<T: Scalar> ProblemSpec<T> {
    /// Enforce the regime gates: p >= 1 always; nonhomogeneous boundary data
    /// only with p = 1 and gamma = 0.
    pub fn validate(&self) -> Result<()> {
        if self.p < T::one() {
            return Err(Error::ConfigRejected(format!(
                "nonlinearity exponent must satisfy p >= 1, got p = {}",
                self.p
            )));
        }
        if !self.mu.is_zero() && (self.p != T::one() || self.gamma != T::zero()) {
            return Err(Error::ConfigRejected(format!(
                "nonzero boundary data requires p = 1 and gamma = 0, got p = {}, gamma = {}",
                self.p, self.gamma
            )));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.lambda == T::zero() && self.beta == T::zero() && self.gamma == T::zero()
    }
}
