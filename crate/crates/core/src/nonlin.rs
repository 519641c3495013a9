//! Regularized nonlinearity and the fixed-point time stepper for the full
//! equation. g_h truncates theta^p smoothly: exact below 1/h, saturated by
//! (2/h)^p, with g'_h(theta) = p theta^{p-1} eta(2 - h theta). The stepper
//! freezes the nonlinearity at the time-centered iterate and contracts onto
//! the Crank–Nicolson solution of each step.

use num_complex::Complex;

use crate::boundary::{build_lifting, LiftingPair};
use crate::cutoff::CutoffEta;
use crate::error::{Error, Result};
use crate::grid::SolutionHistory;
use crate::linear::{tail_guard, LinearStepOperator};
use crate::norms::trapz_factor;
use crate::problem::ProblemSpec;
use crate::quad::GaussRule;
use crate::scalar::{rl, Scalar, C};
use crate::stencil::d1_second_order;
use crate::weight::WeightSpec;

/// g_h, g'_h and the primitive g*_h(theta) = integral_0^theta g_h(sqrt y) dy.
#[derive(Clone, Debug)]
pub struct RegularizedNonlinearity<T: Scalar> {
    pub h: T,
    pub p: T,
    eta: CutoffEta<T>,
    rule: GaussRule<T>,
    /// g_h value on [2/h, infinity)
    saturation: T,
}

impl<T: Scalar> RegularizedNonlinearity<T> {
    pub fn new(h: T, p: T) -> Result<Self> {
        if !(h > T::zero() && h <= T::one()) {
            return Err(Error::InvalidInput(format!("regularization h must be in (0,1], got {h}")));
        }
        if p < T::one() {
            return Err(Error::InvalidInput(format!("exponent p must be >= 1, got {p}")));
        }
        let eta = CutoffEta::new();
        let rule = GaussRule::new(20);
        let mut reg = Self { h, p, eta, rule, saturation: T::zero() };
        let lo = h.recip();
        let hi = rl::<T>(2.0) * lo;
        reg.saturation = lo.powf(p) + reg.transition_integral(lo, hi);
        Ok(reg)
    }

    /// integral of g'_h over [lo, hi] inside the transition band
    fn transition_integral(&self, lo: T, hi: T) -> T {
        if hi <= lo {
            return T::zero();
        }
        let (p, h) = (self.p, self.h);
        let eta = &self.eta;
        self.rule
            .integrate(lo, hi, 8, |y: T| p * y.powf(p - T::one()) * eta.eval(rl::<T>(2.0) - h * y))
    }

    /// g'_h(theta) = p theta^{p-1} eta(2 - h theta).
    pub fn g_prime(&self, theta: T) -> T {
        debug_assert!(theta >= T::zero());
        self.p * theta.powf(self.p - T::one()) * self.eta.eval(rl::<T>(2.0) - self.h * theta)
    }

    /// g_h(theta): theta^p exactly on [0, 1/h], quadrature of g'_h on the
    /// transition band, constant beyond 2/h.
    pub fn g(&self, theta: T) -> T {
        debug_assert!(theta >= T::zero());
        let lo = self.h.recip();
        if theta <= lo {
            theta.powf(self.p)
        } else if theta >= rl::<T>(2.0) * lo {
            self.saturation
        } else {
            lo.powf(self.p) + self.transition_integral(lo, theta)
        }
    }

    /// g*_h(theta) = integral_0^theta g_h(sqrt y) dy; exact power branch on
    /// [0, 1/h^2].
    pub fn g_star(&self, theta: T) -> T {
        debug_assert!(theta >= T::zero());
        let exact_to = self.h.recip() * self.h.recip();
        let exponent = self.p * rl::<T>(0.5) + T::one();
        if theta <= exact_to {
            return theta.powf(exponent) / exponent;
        }
        let exact = exact_to.powf(exponent) / exponent;
        let sat_from = rl::<T>(4.0) * exact_to;
        let mid_hi = theta.min(sat_from);
        let mut acc = exact + self.rule.integrate(exact_to, mid_hi, 8, |y: T| self.g(y.sqrt()));
        if theta > sat_from {
            acc = acc + self.saturation * (theta - sat_from);
        }
        acc
    }

    /// The regularization is inactive while max |u| stays at or below 1/h.
    pub fn is_active(&self, max_abs: T) -> bool {
        max_abs > self.h.recip()
    }
}

/// The nonlinear terms lambda g_h(|u|) u + i beta D(g_h(|u|) u)
/// + i gamma D(g_h(|u|)) u with the solver's discrete derivative D.
pub fn nonlinear_apply<T: Scalar>(
    u: &[C<T>],
    dx: T,
    lambda: T,
    beta: T,
    gamma: T,
    reg: &RegularizedNonlinearity<T>,
) -> Vec<C<T>> {
    let n = u.len();
    let ii = Complex::new(T::zero(), T::one());
    let g: Vec<T> = u.iter().map(|v| reg.g(v.norm())).collect();
    let gu: Vec<C<T>> = u.iter().zip(&g).map(|(v, gv)| *v * *gv).collect();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..n {
        out[j] = gu[j] * lambda;
    }
    if beta != T::zero() {
        let d_gu = d1_second_order(&gu, dx);
        for j in 0..n {
            out[j] = out[j] + ii * beta * d_gu[j];
        }
    }
    if gamma != T::zero() {
        let g_c: Vec<C<T>> = g.iter().map(|v| Complex::new(*v, T::zero())).collect();
        let d_g = d1_second_order(&g_c, dx);
        for j in 0..n {
            out[j] = out[j] + ii * gamma * d_g[j] * u[j];
        }
    }
    out
}

/// Fixed-point iteration controls.
#[derive(Clone, Debug)]
pub struct FixedPointOptions<T: Scalar> {
    /// weighted-norm tolerance on successive iterates
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for FixedPointOptions<T> {
    fn default() -> Self {
        // iteration error must sit far below scheme error; the floor keeps
        // the criterion reachable in f32
        let eps = T::epsilon().to_f64().unwrap_or(2.2e-16);
        Self { tol: rl::<T>((50.0 * eps).max(1e-10)), max_iter: 50 }
    }
}

/// Outcome of one fixed-point step.
#[derive(Clone, Debug)]
pub struct StepOutcome<T: Scalar> {
    pub value: Vec<C<T>>,
    pub iterations: usize,
    /// final ratio of successive-iterate distances
    pub contraction: T,
    pub regularization_active: bool,
}

/// One step of the full equation: Picard iteration
/// V^{m+1} = CN-solve with the nonlinearity frozen at (u^n + V^m)/2
/// (plus the lifting slice when operating on the homogenized variable),
/// iterated until the weighted distance of successive iterates drops
/// below tol.
#[allow(clippy::too_many_arguments)]
pub fn hnls_step<T: Scalar>(
    op: &LinearStepOperator<T>,
    u_n: &[C<T>],
    predictor: &[C<T>],
    f_mid: &[C<T>],
    psi0_mid: Option<&[C<T>]>,
    lambda: T,
    beta: T,
    gamma: T,
    reg: &RegularizedNonlinearity<T>,
    w: &WeightSpec<T>,
    mu_next: C<T>,
    opts: &FixedPointOptions<T>,
) -> Result<StepOutcome<T>> {
    let grid = op.grid;
    let dx = grid.dx();
    let n = u_n.len();
    let mi = Complex::new(T::zero(), -T::one());
    let ii = Complex::new(T::zero(), T::one());
    let half = rl::<T>(0.5);

    let psi: Vec<T> = (0..n).map(|j| w.eval(grid.x(j))).collect();
    let dist = |x: &[C<T>], y: &[C<T>]| -> T {
        let mut acc = T::zero();
        for j in 0..n {
            acc = acc + trapz_factor::<T>(j, n) * psi[j] * (x[j] - y[j]).norm_sqr();
        }
        (acc * dx).sqrt()
    };

    let mut v = predictor.to_vec();
    let mut prev_dist = T::infinity();
    let mut contraction = T::zero();
    let mut reg_active = false;
    for m in 0..opts.max_iter {
        // time-centered evaluation point, shifted by the lifting when present
        let mut mid: Vec<C<T>> = u_n.iter().zip(&v).map(|(a, b)| (*a + *b) * half).collect();
        if let Some(psi0) = psi0_mid {
            for j in 0..n {
                mid[j] = mid[j] + psi0[j];
            }
        }
        let max_abs = mid.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        reg_active = reg_active || reg.is_active(max_abs);
        let nl = nonlinear_apply(&mid, dx, lambda, beta, gamma, reg);
        let q: Vec<C<T>> = f_mid.iter().zip(&nl).map(|(f, nlj)| mi * *f + ii * *nlj).collect();
        let next = op.step(u_n, &q, mu_next);
        let d = dist(&next, &v);
        v = next;
        if d <= opts.tol {
            return Ok(StepOutcome {
                value: v,
                iterations: m + 1,
                contraction,
                regularization_active: reg_active,
            });
        }
        if prev_dist.is_finite() && prev_dist > T::zero() {
            contraction = d / prev_dist;
        }
        prev_dist = d;
    }
    Err(Error::ContractionFailure {
        max_iter: opts.max_iter,
        distance: prev_dist.to_f64().unwrap_or(f64::NAN),
    })
}

/// Per-step log of the production loop.
#[derive(Clone, Debug, Default)]
pub struct StepLog {
    pub iterations: Vec<usize>,
    pub contraction: Vec<f64>,
    pub regularization_active: Vec<bool>,
}

/// Full solve of the initial-boundary value problem.
pub struct HnlsRun<T: Scalar> {
    /// the physical field u (lifting already added back when mu != 0)
    pub history: SolutionHistory<T>,
    pub log: StepLog,
    pub lifting: Option<LiftingPair<T>>,
}

/// Time loop for the full equation. Nonhomogeneous boundary data is handled
/// by the lifting: the loop advances U = u - Psi0 with source f - F0 and a
/// homogeneous boundary row, then adds Psi0 back.
pub fn solve_hnls<T: Scalar>(
    spec: &ProblemSpec<T>,
    reg: &RegularizedNonlinearity<T>,
    w: &WeightSpec<T>,
    opts: &FixedPointOptions<T>,
) -> Result<HnlsRun<T>> {
    spec.validate()?;
    let grid = spec.u0.grid;
    let dt = grid.dt();
    let n = grid.n_nodes();
    let zero = Complex::new(T::zero(), T::zero());

    let lifting = if spec.mu.is_zero() {
        None
    } else {
        let eta = CutoffEta::new();
        Some(build_lifting(&spec.mu, grid, spec.a, spec.b, &eta)?)
    };

    let op = LinearStepOperator::new(grid, spec.a, spec.b, dt)?;
    let mut log = StepLog::default();
    let mut history = SolutionHistory::new(grid);

    // state variable: u itself, or U = u - Psi0 when lifted
    let mut state: Vec<C<T>> = match &lifting {
        None => spec.u0.values.clone(),
        Some(lift) => {
            let psi0 = lift.psi0_slice(0);
            spec.u0.values.iter().zip(&psi0).map(|(u, p)| *u - *p).collect()
        }
    };
    let mut prev_state: Option<Vec<C<T>>> = None;
    history.push(match &lifting {
        None => state.clone(),
        Some(lift) => {
            let psi0 = lift.psi0_slice(0);
            state.iter().zip(&psi0).map(|(u, p)| *u + *p).collect()
        }
    });

    for step in 0..grid.n_steps {
        let t_mid = grid.t(step) + dt * rl::<T>(0.5);
        let mut f_mid = spec.f.eval_slice(&grid, t_mid);
        let psi0_mid: Option<Vec<C<T>>> = lifting.as_ref().map(|lift| {
            let wmid = lift.index_of_midpoint(step);
            let f0 = lift.f0_slice(wmid);
            for j in 0..n {
                f_mid[j] = f_mid[j] - f0[j];
            }
            lift.psi0_slice(wmid)
        });

        // predictor: linear extrapolation once two levels exist, otherwise a
        // forward-Euler start via the assembled right-hand-side matrix
        let predictor: Vec<C<T>> = match &prev_state {
            Some(prev) => {
                state.iter().zip(prev).map(|(cur, old)| *cur * rl::<T>(2.0) - *old).collect()
            }
            None => {
                let mut eval = state.clone();
                if let Some(psi0) = &psi0_mid {
                    for j in 0..n {
                        eval[j] = eval[j] + psi0[j];
                    }
                }
                let nl = nonlinear_apply(&eval, grid.dx(), spec.lambda, spec.beta, spec.gamma, reg);
                let matvec = op.rhs_matvec(&state);
                let mi = Complex::new(T::zero(), -T::one());
                let ii = Complex::new(T::zero(), T::one());
                (0..n)
                    .map(|j| {
                        matvec[j] * rl::<T>(2.0) - state[j] + (mi * f_mid[j] + ii * nl[j]) * dt
                    })
                    .collect()
            }
        };

        let outcome = hnls_step(
            &op,
            &state,
            &predictor,
            &f_mid,
            psi0_mid.as_deref(),
            spec.lambda,
            spec.beta,
            spec.gamma,
            reg,
            w,
            zero,
            opts,
        )?;
        log.iterations.push(outcome.iterations);
        log.contraction.push(outcome.contraction.to_f64().unwrap_or(f64::NAN));
        log.regularization_active.push(outcome.regularization_active);

        prev_state = Some(std::mem::replace(&mut state, outcome.value));

        let physical = match &lifting {
            None => state.clone(),
            Some(lift) => {
                let psi0 = lift.psi0_slice(lift.index_of_step(step + 1));
                state.iter().zip(&psi0).map(|(u, p)| *u + *p).collect()
            }
        };
        tail_guard(&physical, &grid, grid.t(step + 1))?;
        history.push(physical);
    }

    Ok(HnlsRun { history, log, lifting })
}
