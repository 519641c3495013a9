//! Identity diagnostics over solution histories: the L2 balance with its
//! boundary traces, the energy functional with the gamma-obstruction term,
//! the weak-formulation residual against smooth test functions, and the
//! weighted interpolation inequality probe.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::SolutionHistory;
use crate::nonlin::RegularizedNonlinearity;
use crate::norms::trapz_factor;
use crate::problem::SourceTerm;
use crate::scalar::{rl, Scalar, C};
use crate::stencil::{d1_second_order, d2_second_order, ux_at_left, uxx_at_left};
use crate::weight::WeightSpec;

/// Coefficient bundle shared by the nonlinear diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct Coefficients<T: Scalar> {
    pub a: T,
    pub b: T,
    pub lambda: T,
    pub beta: T,
    pub gamma: T,
    pub p: T,
}

/// Residual time series of the L2 balance
///   d/dt int |u|^2 dx + |u_x(0)|^2 = 2 Im int f conj(u) dx + boundary traces,
/// where the traces involve mu = u(t,0): the linear ones
/// 2a Im(u_x(0) conj(mu)) + b |mu|^2 + 2 Re(u_xx(0) conj(mu)) and the
/// nonlinear ones through g_h and its primitive,
/// -beta (g*(|mu|^2) - 2 g(|mu|) |mu|^2) - 2 gamma (g*(|mu|^2) - g(|mu|) |mu|^2).
/// All trace terms vanish identically for homogeneous boundary data.
pub fn l2_balance_residual<T: Scalar>(
    history: &SolutionHistory<T>,
    coeffs: &Coefficients<T>,
    f: &SourceTerm<T>,
    reg: &RegularizedNonlinearity<T>,
) -> Result<Vec<T>> {
    if history.len() < 3 {
        return Err(Error::InsufficientData("need at least three time slices".into()));
    }
    let grid = history.grid;
    let dx = grid.dx();
    let dt = grid.dt();
    let n = grid.n_nodes();
    let m_last = history.len() - 1;
    let two = rl::<T>(2.0);

    let mut mass = Vec::with_capacity(m_last + 1);
    let mut terms = Vec::with_capacity(m_last + 1);
    for idx in 0..=m_last {
        let u = history.slice(idx);
        let fs = f.eval_slice(&grid, grid.t(idx));
        let mut m = T::zero();
        let mut src = T::zero();
        for j in 0..n {
            let w = trapz_factor::<T>(j, n) * dx;
            m = m + w * u[j].norm_sqr();
            src = src + w * (fs[j] * u[j].conj()).im;
        }
        mass.push(m);

        let mu = u[0];
        let ux0 = ux_at_left(u, dx);
        let uxx0 = uxx_at_left(u, dx);
        let flux = ux0.norm_sqr();
        let mu_abs = mu.norm();
        let g = reg.g(mu_abs);
        let gs = reg.g_star(mu_abs * mu_abs);
        let linear_traces = two * coeffs.a * (ux0 * mu.conj()).im
            + coeffs.b * mu.norm_sqr()
            + two * (uxx0 * mu.conj()).re;
        let nonlinear_traces = coeffs.beta * (gs - two * g * mu.norm_sqr())
            + two * coeffs.gamma * (gs - g * mu.norm_sqr());
        terms.push(flux - linear_traces + nonlinear_traces - two * src);
    }

    let ddt = |k: usize| -> T {
        if k == 0 {
            (-rl::<T>(3.0) * mass[0] + rl::<T>(4.0) * mass[1] - mass[2]) / (two * dt)
        } else if k == m_last {
            (rl::<T>(3.0) * mass[m_last] - rl::<T>(4.0) * mass[m_last - 1] + mass[m_last - 2])
                / (two * dt)
        } else {
            (mass[k + 1] - mass[k - 1]) / (two * dt)
        }
    };
    Ok((0..=m_last).map(|k| ddt(k) + terms[k]).collect())
}

/// The energy functional whose time derivative is obstructed by the gamma
/// term: int [ |u_x|^2 + i/(beta+gamma) (lambda - a(3 beta + 2 gamma)/3)
/// u conj(u_x) - 2(3 beta + 2 gamma)/(3(p+2)) |u|^{p+2} ] dx.
#[derive(Clone, Copy, Debug)]
pub struct EnergyFunctional<T: Scalar> {
    pub coeffs: Coefficients<T>,
}

impl<T: Scalar> EnergyFunctional<T> {
    pub fn new(coeffs: Coefficients<T>) -> Result<Self> {
        if coeffs.beta + coeffs.gamma == T::zero() {
            return Err(Error::UndefinedFunctional);
        }
        Ok(Self { coeffs })
    }

    /// Returns the complex-valued integral; the imaginary part must be
    /// round-off small (assertable invariant).
    pub fn value_complex(&self, u: &[C<T>], dx: T) -> C<T> {
        let c = &self.coeffs;
        let n = u.len();
        let three = rl::<T>(3.0);
        let drift = (c.lambda - c.a * (three * c.beta + rl::<T>(2.0) * c.gamma) / three)
            / (c.beta + c.gamma);
        let well =
            rl::<T>(2.0) * (three * c.beta + rl::<T>(2.0) * c.gamma) / (three * (c.p + rl::<T>(2.0)));
        let du = d1_second_order(u, dx);
        let ii = Complex::new(T::zero(), T::one());
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..n {
            let w = trapz_factor::<T>(j, n) * dx;
            let grad = Complex::new(du[j].norm_sqr(), T::zero());
            let cross = ii * drift * (u[j] * du[j].conj());
            let power = Complex::new(well * u[j].norm().powf(c.p + rl::<T>(2.0)), T::zero());
            acc = acc + (grad + cross - power) * w;
        }
        acc
    }

    pub fn value(&self, u: &[C<T>], dx: T) -> T {
        self.value_complex(u, dx).re
    }
}

/// Energy-identity series: dE/dt, the obstruction term
/// (gamma/3) int (|u|^p)_x (|u|^2)_xx dx, and their difference.
#[derive(Clone, Debug)]
pub struct EnergySeries<T: Scalar> {
    pub de_dt: Vec<T>,
    pub gamma_term: Vec<T>,
    pub residual: Vec<T>,
    pub energy: Vec<T>,
    /// max |Im E| / max(1, |Re E|) over the run
    pub imag_defect: T,
}

pub fn energy_identity_residual_nl<T: Scalar>(
    history: &SolutionHistory<T>,
    coeffs: &Coefficients<T>,
) -> Result<EnergySeries<T>> {
    if history.len() < 3 {
        return Err(Error::InsufficientData("need at least three time slices".into()));
    }
    let functional = EnergyFunctional::new(*coeffs)?;
    let grid = history.grid;
    let dx = grid.dx();
    let dt = grid.dt();
    let n = grid.n_nodes();
    let m_last = history.len() - 1;
    let two = rl::<T>(2.0);
    let third = rl::<T>(1.0 / 3.0);

    let mut energy = Vec::with_capacity(m_last + 1);
    let mut imag_defect = T::zero();
    let mut gamma_term = Vec::with_capacity(m_last + 1);
    for idx in 0..=m_last {
        let u = history.slice(idx);
        let e = functional.value_complex(u, dx);
        imag_defect = imag_defect.max(e.im.abs() / e.re.abs().max(T::one()));
        energy.push(e.re);

        // (gamma/3) int (|u|^p)_x (|u|^2)_xx dx by the solver stencils
        let abs_p: Vec<C<T>> =
            u.iter().map(|v| Complex::new(v.norm().powf(coeffs.p), T::zero())).collect();
        let abs_sq: Vec<C<T>> =
            u.iter().map(|v| Complex::new(v.norm_sqr(), T::zero())).collect();
        let d_abs_p = d1_second_order(&abs_p, dx);
        let dd_abs_sq = d2_second_order(&abs_sq, dx);
        let mut acc = T::zero();
        for j in 0..n {
            acc = acc + trapz_factor::<T>(j, n) * dx * d_abs_p[j].re * dd_abs_sq[j].re;
        }
        gamma_term.push(coeffs.gamma * third * acc);
    }

    let de_dt: Vec<T> = (0..=m_last)
        .map(|k| {
            if k == 0 {
                (-rl::<T>(3.0) * energy[0] + rl::<T>(4.0) * energy[1] - energy[2]) / (two * dt)
            } else if k == m_last {
                (rl::<T>(3.0) * energy[m_last] - rl::<T>(4.0) * energy[m_last - 1]
                    + energy[m_last - 2])
                    / (two * dt)
            } else {
                (energy[k + 1] - energy[k - 1]) / (two * dt)
            }
        })
        .collect();
    let residual = de_dt.iter().zip(&gamma_term).map(|(d, g)| *d - *g).collect();
    Ok(EnergySeries { de_dt, gamma_term, residual, energy, imag_defect })
}

/// A space-time test function with analytic derivatives, vanishing at t = T
/// and to second order at x = 0, rapidly decaying in x.
#[derive(Clone)]
pub struct TestFunction<T: Scalar> {
    pub label: String,
    /// (phi, phi_t, phi_x, phi_xx, phi_xxx) at (t, x)
    #[allow(clippy::type_complexity)]
    pub eval: std::sync::Arc<dyn Fn(T, T) -> [C<T>; 5] + Send + Sync>,
}

/// theta(t) x^2 e^{-x} e^{i omega x} with theta(t) = cos(pi t / (2 T)).
pub fn standard_test_family<T: Scalar>(horizon: T, omegas: &[f64]) -> Vec<TestFunction<T>> {
    omegas
        .iter()
        .map(|&omega| {
            let om = rl::<T>(omega);
            let half_pi_over_t = T::PI() / (rl::<T>(2.0) * horizon);
            let eval = move |t: T, x: T| -> [C<T>; 5] {
                let theta = (half_pi_over_t * t).cos();
                let theta_t = -half_pi_over_t * (half_pi_over_t * t).sin();
                // s = i omega - 1: phi = theta x^2 e^{s x}
                let s = Complex::new(-T::one(), om);
                let e = (s * x).exp();
                let two = rl::<T>(2.0);
                let x2 = x * x;
                let p0 = Complex::new(x2, T::zero());
                let p1 = s * x2 + two * x;
                let p2 = s * s * x2 + s * (rl::<T>(4.0) * x) + two;
                let p3 = s * s * s * x2 + s * s * (rl::<T>(6.0) * x) + s * rl::<T>(6.0);
                [
                    e * p0 * theta,
                    e * p0 * theta_t,
                    e * p1 * theta,
                    e * p2 * theta,
                    e * p3 * theta,
                ]
            };
            TestFunction {
                label: format!("damped-wave omega={omega}"),
                eval: std::sync::Arc::new(eval),
            }
        })
        .collect()
}

/// Evaluate the weak-formulation functional over a history for each test
/// function; for a weak solution every value tends to zero under refinement.
pub fn weak_form_residual<T: Scalar>(
    history: &SolutionHistory<T>,
    coeffs: &Coefficients<T>,
    f: &SourceTerm<T>,
    tests: &[TestFunction<T>],
) -> Result<Vec<T>> {
    if history.len() < 3 {
        return Err(Error::InsufficientData("need at least three time slices".into()));
    }
    let grid = history.grid;
    let dx = grid.dx();
    let dt = grid.dt();
    let n = grid.n_nodes();
    let m_last = history.len() - 1;
    let ii = Complex::new(T::zero(), T::one());

    // validity: phi(T, .) = 0, phi(., 0) = phi_x(., 0) = 0
    for test in tests {
        for probe in 0..8 {
            let x = rl::<T>(probe as f64) * grid.length / rl::<T>(8.0);
            let at_end = (test.eval)(grid.horizon, x)[0].norm();
            if at_end > rl::<T>(1e-12) {
                return Err(Error::InvalidTest(format!(
                    "{}: phi(T, {x}) = {at_end:e} != 0",
                    test.label
                )));
            }
            let t = rl::<T>(probe as f64) * grid.horizon / rl::<T>(8.0);
            let v = (test.eval)(t, T::zero());
            if v[0].norm() > rl::<T>(1e-12) || v[2].norm() > rl::<T>(1e-12) {
                return Err(Error::InvalidTest(format!(
                    "{}: boundary trace of phi or phi_x at x = 0 is nonzero",
                    test.label
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(tests.len());
    for test in tests {
        let mut total = Complex::new(T::zero(), T::zero());
        for idx in 0..=m_last {
            let t = grid.t(idx);
            let u = history.slice(idx);
            let du = d1_second_order(u, dx);
            let fs = f.eval_slice(&grid, t);
            let wt = trapz_factor::<T>(idx, m_last + 1) * dt;
            let mut slice_acc = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                let wx = trapz_factor::<T>(j, n) * dx;
                let [phi, phi_t, phi_x, phi_xx, phi_xxx] = (test.eval)(t, grid.x(j));
                let up = u[j].norm().powf(coeffs.p);
                let nl_u = u[j] * up;
                let lin = u[j] * (ii * phi_t - phi_xx * coeffs.a + ii * (phi_x * coeffs.b) + ii * phi_xxx);
                let nl = -nl_u * phi * coeffs.lambda
                    + ii * (nl_u * phi_x * coeffs.beta)
                    + ii * ((du[j] * phi + u[j] * phi_x) * up * coeffs.gamma);
                slice_acc = slice_acc + (lin + nl + fs[j] * phi) * wx;
            }
            // boundary trace term i mu phi_xx(t, 0)
            let phi0 = (test.eval)(t, T::zero());
            total = total + (slice_acc + ii * (u[0] * phi0[3])) * wt;
        }
        // initial-data term; integrating the equation against phi forces the
        // same factor i as the boundary trace carries
        let u0 = history.slice(0);
        for j in 0..n {
            let wx = trapz_factor::<T>(j, n) * dx;
            let phi = (test.eval)(T::zero(), grid.x(j))[0];
            total = total + ii * (u0[j] * phi * wx);
        }
        out.push(total.norm());
    }
    Ok(out)
}

/// Exponent pair of the interpolation inequality: s(q) = 1/4 - 1/(2q).
pub fn interpolation_exponent<T: Scalar>(q: T) -> T {
    if q.is_infinite() {
        rl::<T>(0.25)
    } else {
        rl::<T>(0.25) - (rl::<T>(2.0) * q).recip()
    }
}

/// A sampled profile with its analytic derivative, as used by the probe.
#[derive(Clone)]
pub struct Profile<T: Scalar> {
    pub values: Vec<T>,
    pub derivs: Vec<T>,
}

/// Empirical constant of the interpolation inequality over a family of
/// profiles: max over the family of LHS / RHS.
pub fn interpolation_probe<T: Scalar>(
    profiles: &[Profile<T>],
    xs: &[T],
    psi1: &WeightSpec<T>,
    psi2: &WeightSpec<T>,
    q: T,
) -> Result<T> {
    let s = interpolation_exponent(q);
    let n = xs.len();
    let dx = xs[1] - xs[0];
    let half = rl::<T>(0.5);
    let mut max_ratio = T::zero();
    for profile in profiles {
        debug_assert_eq!(profile.values.len(), n);
        let mut lhs;
        let mut rhs_grad = T::zero();
        let mut rhs_low = T::zero();
        if q.is_infinite() {
            lhs = T::zero();
            for j in 0..n {
                let w1 = psi1.eval(xs[j]);
                let w2 = psi2.eval(xs[j]);
                lhs = lhs.max(profile.values[j].abs() * w1.powf(s) * w2.powf(half - s));
            }
        } else {
            let mut acc = T::zero();
            for j in 0..n {
                let w1 = psi1.eval(xs[j]);
                let w2 = psi2.eval(xs[j]);
                acc = acc
                    + trapz_factor::<T>(j, n)
                        * profile.values[j].abs().powf(q)
                        * w1.powf(q * s)
                        * w2.powf(q * (half - s));
            }
            lhs = (acc * dx).powf(q.recip());
        }
        for j in 0..n {
            let w = trapz_factor::<T>(j, n) * dx;
            let both = profile.derivs[j].abs() + profile.values[j].abs();
            rhs_grad = rhs_grad + w * both * both * psi1.eval(xs[j]);
            rhs_low = rhs_low + w * profile.values[j] * profile.values[j] * psi2.eval(xs[j]);
        }
        let rhs = rhs_grad.sqrt().powf(rl::<T>(2.0) * s)
            * rhs_low.sqrt().powf(T::one() - rl::<T>(2.0) * s);
        if rhs == T::zero() {
            if lhs > rl::<T>(1e-14) {
                return Err(Error::NumericalDegeneracy(format!(
                    "zero right-hand side with LHS = {lhs:e}"
                )));
            }
            continue;
        }
        max_ratio = max_ratio.max(lhs / rhs);
    }
    Ok(max_ratio)
}

/// Fixed-seed damped-oscillation family phi = sum A_i e^{-alpha_i x}
/// cos(omega_i x + delta_i) with analytic derivatives.
pub fn damped_wave_family<T: Scalar>(seed: u64, count: usize, xs: &[T]) -> Vec<Profile<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<[f64; 4]> = (0..3)
                .map(|_| {
                    [
                        rng.gen_range(0.2..1.0),
                        rng.gen_range(0.3..2.0),
                        rng.gen_range(0.0..8.0),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    ]
                })
                .collect();
            let mut values = Vec::with_capacity(xs.len());
            let mut derivs = Vec::with_capacity(xs.len());
            for &x in xs {
                let xf = x.to_f64().unwrap();
                let mut v = 0.0;
                let mut d = 0.0;
                for [amp, alpha, omega, delta] in &terms {
                    let e = (-alpha * xf).exp();
                    v += amp * e * (omega * xf + delta).cos();
                    d += amp
                        * e
                        * (-alpha * (omega * xf + delta).cos()
                            - omega * (omega * xf + delta).sin());
                }
                values.push(rl::<T>(v));
                derivs.push(rl::<T>(d));
            }
            Profile { values, derivs }
        })
        .collect()
}
