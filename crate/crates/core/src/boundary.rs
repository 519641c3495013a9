//! Boundary potentials. The characteristic cubic r^3 - i a r^2 + b r + i lambda = 0
//! has, for |lambda| large enough, a unique root r0 with negative real part;
//! e^{r0 x} then solves the homogeneous equation u_t - i a u_xx + b u_x + u_xxx = 0
//! per frequency. Summing over the high-frequency part of a boundary signal
//! yields J+, and the cutoff eta(2 - x) turns mu0 + J+ into the compactly
//! supported lifting pair (Psi0, F0) that reduces nonhomogeneous boundary
//! data to zero.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::cutoff::CutoffEta;
use crate::error::{Error, Result};
use crate::grid::HalfLineGrid;
use crate::problem::BoundarySignal;
use crate::scalar::{rl, Scalar, C};

/// Root residual budget, relative to max(1, |lambda|).
pub const ROOT_RESIDUAL_LIMIT: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct CharacteristicRoot<T: Scalar> {
    pub lambda: T,
    pub r0: C<T>,
    /// decay margin: Re r0 <= -2 eps |lambda|^{1/3}
    pub eps: T,
    pub residual: T,
}

fn cubic_value<T: Scalar>(r: C<T>, a: T, b: T, lambda: T) -> C<T> {
    let ii = Complex::new(T::zero(), T::one());
    r * r * r - ii * a * r * r + r * b + ii * lambda
}

/// All three roots of the characteristic cubic, Cardano plus Newton polish.
pub fn cubic_roots<T: Scalar>(a: T, b: T, lambda: T) -> [C<T>; 3] {
    let ii = Complex::new(T::zero(), T::one());
    let zero = T::zero();
    let c2 = -ii * a;
    let c1 = Complex::new(b, zero);
    let c0 = ii * lambda;
    let third = rl::<T>(1.0 / 3.0);
    let shift = c2 * third;

    // depressed cubic t^3 + p t + q
    let p = c1 - c2 * c2 * third;
    let q = c2 * c2 * c2 * rl::<T>(2.0 / 27.0) - c2 * c1 * third + c0;
    let half_q = q * rl::<T>(0.5);
    let disc = (half_q * half_q + p * p * p * rl::<T>(1.0 / 27.0)).sqrt();
    // pick the branch that avoids cancellation
    let u1 = -half_q + disc;
    let u2 = -half_q - disc;
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let cbrt = u.powf(third);
    let omega = Complex::new(rl::<T>(-0.5), rl::<T>(0.75).sqrt());

    let mut roots = [Complex::new(zero, zero); 3];
    for (k, root) in roots.iter_mut().enumerate() {
        let mut w = cbrt;
        for _ in 0..k {
            w = w * omega;
        }
        let t = if w.norm() > T::zero() { w - p / (w * rl::<T>(3.0)) } else { w };
        let mut r = t - shift;
        // Newton polish on the undepressed cubic
        for _ in 0..3 {
            let f = cubic_value(r, a, b, lambda);
            let df = r * r * rl::<T>(3.0) - ii * a * r * rl::<T>(2.0) + b;
            if df.norm() > T::zero() {
                r = r - f / df;
            }
        }
        *root = r;
    }
    roots
}

/// The unique negative-real-part root, or the below-cutoff error when the
/// root structure degenerates (used to calibrate lambda0).
pub fn find_root<T: Scalar>(lambda: T, a: T, b: T) -> Result<CharacteristicRoot<T>> {
    if lambda == T::zero() {
        return Err(Error::InvalidInput("characteristic root needs lambda != 0".into()));
    }
    let roots = cubic_roots(a, b, lambda);
    // one root always sits on the imaginary axis (its real part is a pure
    // rounding artifact); count as decaying only well below that noise
    let decaying = |r: &&C<T>| r.re < -rl::<T>(1e-13) * (r.norm() + T::one());
    let mut negatives = roots.iter().filter(decaying);
    let r0 = match (negatives.next(), negatives.next()) {
        (Some(r), None) => *r,
        _ => {
            return Err(Error::BelowCutoff { lambda: lambda.to_f64().unwrap_or(f64::NAN) });
        }
    };
    let scale = lambda.abs().powf(rl::<T>(1.0 / 3.0));
    let eps = -r0.re / (rl::<T>(2.0) * scale);
    let residual = cubic_value(r0, a, b, lambda).norm();
    Ok(CharacteristicRoot { lambda, r0, eps, residual })
}

#[derive(Clone, Copy, Debug)]
pub struct Lambda0Calibration<T: Scalar> {
    pub lambda0: T,
    pub eps: T,
}

/// Scan |lambda| upward from 1 on a log grid (both signs) and return the
/// smallest cutoff above which a unique decaying root exists with a uniform
/// margin, together with the validated margin.
pub fn calibrate_lambda0<T: Scalar>(a: T, b: T) -> Result<Lambda0Calibration<T>> {
    const POINTS: usize = 400;
    const LOG_MAX: f64 = 6.0;
    let mut ok = vec![true; POINTS];
    let mut margins = vec![T::infinity(); POINTS];
    for i in 0..POINTS {
        let lam = rl::<T>(10f64.powf(LOG_MAX * i as f64 / (POINTS - 1) as f64));
        for sign in [T::one(), -T::one()] {
            match find_root(lam * sign, a, b) {
                Ok(root) if root.eps > T::zero() => {
                    if root.eps < margins[i] {
                        margins[i] = root.eps;
                    }
                }
                _ => ok[i] = false,
            }
        }
    }
    // smallest grid point whose whole suffix is valid
    let mut start = None;
    for i in (0..POINTS).rev() {
        if ok[i] {
            start = Some(i);
        } else {
            break;
        }
    }
    let Some(first) = start else {
        return Err(Error::CalibrationFailed {
            a: a.to_f64().unwrap_or(f64::NAN),
            b: b.to_f64().unwrap_or(f64::NAN),
            scanned: 10f64.powf(LOG_MAX),
        });
    };
    let lambda0 = rl::<T>(10f64.powf(LOG_MAX * first as f64 / (POINTS - 1) as f64));
    let eps = margins[first..].iter().fold(T::infinity(), |acc, m| acc.min(*m));
    Ok(Lambda0Calibration { lambda0, eps })
}

/// A boundary signal represented by Fourier-series coefficients on the
/// periodic window [0, period). Coefficients are in FFT bin order.
#[derive(Clone, Debug)]
pub struct WindowedSignal<T: Scalar> {
    pub period: T,
    pub coeffs: Vec<C<T>>,
}

impl<T: Scalar> WindowedSignal<T> {
    /// Signed frequency of bin k.
    #[inline]
    pub fn lambda(&self, k: usize) -> T {
        let n = self.coeffs.len();
        let k_signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        rl::<T>(2.0) * T::PI() * rl::<T>(k_signed) / self.period
    }

    /// Window step between samples.
    #[inline]
    pub fn step(&self) -> T {
        self.period / rl::<T>(self.coeffs.len() as f64)
    }

    /// Build the window for a solver grid: period 2T sampled at dt/2, so
    /// solver times sit at even sample indices and step midpoints at odd
    /// ones. Signals that are not window-periodic are closed up by a smooth
    /// eta-bridge over (T, 2T) before the transform.
    pub fn from_signal(
        mu: &BoundarySignal<T>,
        grid: &HalfLineGrid<T>,
        eta: &CutoffEta<T>,
    ) -> Self {
        let period = rl::<T>(2.0) * grid.horizon;
        let k = 4 * grid.n_steps;
        if let BoundarySignal::Modes { period: p, modes } = mu {
            if (*p - period).abs() <= period * rl::<T>(1e-12) {
                let mut coeffs = vec![Complex::new(T::zero(), T::zero()); k];
                for (idx, c) in modes {
                    let bin = idx.rem_euclid(k as i64) as usize;
                    coeffs[bin] = coeffs[bin] + *c;
                }
                return Self { period, coeffs };
            }
        }
        let step = period / rl::<T>(k as f64);
        let horizon = grid.horizon;
        let mu_start = mu.eval(T::zero());
        let mu_end = mu.eval(horizon);
        let mut samples: Vec<C<T>> = (0..k)
            .map(|w| {
                let t = step * rl::<T>(w as f64);
                if t <= horizon {
                    mu.eval(t)
                } else {
                    let s = (t - horizon) / horizon;
                    mu_end + (mu_start - mu_end) * eta.eval(s)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(k).process(&mut samples);
        let scale = rl::<T>(1.0 / k as f64);
        for c in &mut samples {
            *c = *c * scale;
        }
        Self { period, coeffs: samples }
    }

    /// Values at the window sample points (inverse FFT).
    pub fn values(&self) -> Vec<C<T>> {
        let mut buf = self.coeffs.clone();
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(buf.len()).process(&mut buf);
        buf
    }

    /// Pointwise evaluation of the trigonometric interpolant.
    pub fn eval(&self, t: T) -> C<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > T::zero() {
                acc = acc + *c * Complex::from_polar(T::one(), self.lambda(k) * t);
            }
        }
        acc
    }

    /// Discrete Sobolev norm (period * sum (1 + lambda^2)^s |c_k|^2)^{1/2}.
    pub fn h_norm(&self, s: T) -> T {
        let mut acc = T::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let lam = self.lambda(k);
            acc = acc + (T::one() + lam * lam).powf(s) * c.norm_sqr();
        }
        (self.period * acc).sqrt()
    }
}

/// Low/high frequency decomposition mu = mu0 + mu1 at the cutoff lambda0.
#[derive(Clone, Debug)]
pub struct FrequencySplit<T: Scalar> {
    pub lambda0: T,
    pub low: WindowedSignal<T>,
    pub high: WindowedSignal<T>,
}

pub fn frequency_split<T: Scalar>(win: &WindowedSignal<T>, lambda0: T) -> FrequencySplit<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut low = win.coeffs.clone();
    let mut high = win.coeffs.clone();
    for k in 0..win.coeffs.len() {
        if win.lambda(k).abs() < lambda0 {
            high[k] = zero;
        } else {
            low[k] = zero;
        }
    }
    FrequencySplit {
        lambda0,
        low: WindowedSignal { period: win.period, coeffs: low },
        high: WindowedSignal { period: win.period, coeffs: high },
    }
}

/// J+ sampled on (window times) x (requested x nodes), together with the
/// per-frequency roots that generated it.
#[derive(Clone, Debug)]
pub struct BoundaryPotential<T: Scalar> {
    pub xs: Vec<T>,
    /// values[w][j] at window sample w, node xs[j]
    pub values: Vec<Vec<C<T>>>,
    pub roots: Vec<Option<CharacteristicRoot<T>>>,
}

/// Synthesize J+(t, x; mu1) = sum_k c_k e^{i lambda_k t} e^{r0(lambda_k) x}.
/// The spectrum of mu1 must vanish below lambda0.
pub fn build_j_plus<T: Scalar>(
    mu1: &WindowedSignal<T>,
    xs: &[T],
    a: T,
    b: T,
    lambda0: T,
) -> Result<BoundaryPotential<T>> {
    let k_total = mu1.coeffs.len();
    let total: T = mu1.coeffs.iter().map(|c| c.norm_sqr()).sum();
    let mut leak = T::zero();
    let mut roots: Vec<Option<CharacteristicRoot<T>>> = vec![None; k_total];
    for k in 0..k_total {
        let lam = mu1.lambda(k);
        if mu1.coeffs[k].norm_sqr() > T::zero() {
            if lam.abs() < lambda0 {
                leak = leak + mu1.coeffs[k].norm_sqr();
            } else {
                roots[k] = Some(find_root(lam, a, b)?);
            }
        }
    }
    if total > T::zero() && leak / total > rl::<T>(1e-24) {
        return Err(Error::SplittingViolation {
            lambda0: lambda0.to_f64().unwrap_or(f64::NAN),
            mass: (leak / total).to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(k_total);
    let mut values = vec![vec![Complex::new(T::zero(), T::zero()); xs.len()]; k_total];
    for (j, &x) in xs.iter().enumerate() {
        let mut buf: Vec<C<T>> = (0..k_total)
            .map(|k| match &roots[k] {
                Some(root) => mu1.coeffs[k] * (root.r0 * x).exp(),
                None => Complex::new(T::zero(), T::zero()),
            })
            .collect();
        inv.process(&mut buf);
        for w in 0..k_total {
            values[w][j] = buf[w];
        }
    }
    Ok(BoundaryPotential { xs: xs.to_vec(), values, roots })
}

impl<T: Scalar> BoundaryPotential<T> {
    /// Spectral-accuracy residual of u_t - i a u_xx + b u_x + u_xxx on the
    /// sampled nodes: per mode the residual is the characteristic-cubic
    /// defect, so this measures root quality through the synthesis.
    pub fn pde_residual(&self, mu1: &WindowedSignal<T>, a: T, b: T) -> T {
        let mut worst = T::zero();
        for &x in &self.xs {
            let mut acc = T::zero();
            for (k, root) in self.roots.iter().enumerate() {
                if let Some(root) = root {
                    let defect = cubic_value(root.r0, a, b, root.lambda).norm();
                    acc = acc + mu1.coeffs[k].norm() * (root.r0 * x).exp().norm() * defect;
                }
            }
            worst = worst.max(acc);
        }
        worst
    }
}

/// Compactly supported lifting: Psi0 = (mu0 + J+) eta(2 - x) and
/// F0 = i Psi0_t + a Psi0_xx + i b Psi0_x + i Psi0_xxx, both vanishing for
/// x >= 2, with Psi0(t, 0) = mu(t).
#[derive(Clone, Debug)]
pub struct LiftingPair<T: Scalar> {
    pub grid: HalfLineGrid<T>,
    /// nodes 0..support_nodes carry data; everything beyond is exactly zero
    pub support_nodes: usize,
    /// psi0[w][j] at window sample w (step dt/2), node j
    pub psi0: Vec<Vec<C<T>>>,
    pub f0: Vec<Vec<C<T>>>,
    pub split: FrequencySplit<T>,
    pub calibration: Lambda0Calibration<T>,
}

impl<T: Scalar> LiftingPair<T> {
    /// Window sample index of solver time t_n.
    #[inline]
    pub fn index_of_step(&self, n: usize) -> usize {
        2 * n
    }

    /// Window sample index of the midpoint of step n.
    #[inline]
    pub fn index_of_midpoint(&self, n: usize) -> usize {
        2 * n + 1
    }

    fn padded(&self, rows: &[Vec<C<T>>], w: usize) -> Vec<C<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.grid.n_nodes()];
        out[..self.support_nodes].copy_from_slice(&rows[w][..self.support_nodes]);
        out
    }

    pub fn psi0_slice(&self, w: usize) -> Vec<C<T>> {
        self.padded(&self.psi0, w)
    }

    pub fn f0_slice(&self, w: usize) -> Vec<C<T>> {
        self.padded(&self.f0, w)
    }
}

/// Assemble the lifting pair for a boundary signal on a solver grid.
pub fn build_lifting<T: Scalar>(
    mu: &BoundarySignal<T>,
    grid: HalfLineGrid<T>,
    a: T,
    b: T,
    eta: &CutoffEta<T>,
) -> Result<LiftingPair<T>> {
    let dx = grid.dx();
    if grid.length <= rl::<T>(2.0) {
        return Err(Error::DomainTooShort {
            needed: 2.0,
            have: grid.length.to_f64().unwrap_or(f64::NAN),
        });
    }
    let win = WindowedSignal::from_signal(mu, &grid, eta);
    let calibration = calibrate_lambda0(a, b)?;
    let split = frequency_split(&win, calibration.lambda0);

    let support_nodes =
        ((rl::<T>(2.0) / dx).ceil().to_f64().unwrap() as usize + 1).min(grid.n_nodes());
    let k_total = win.coeffs.len();
    let ii = Complex::new(T::zero(), T::one());

    // roots for the high band
    let mut roots: Vec<Option<CharacteristicRoot<T>>> = vec![None; k_total];
    for k in 0..k_total {
        if split.high.coeffs[k].norm_sqr() > T::zero() {
            roots[k] = Some(find_root(split.high.lambda(k), a, b)?);
        }
    }

    // eta(2 - x) and derivatives per node
    let cut: Vec<[T; 4]> = (0..support_nodes)
        .map(|j| {
            let s = rl::<T>(2.0) - grid.x(j);
            [eta.eval(s), eta.d1(s), eta.d2(s), eta.d3(s)]
        })
        .collect();

    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(k_total);
    let mut psi0 = vec![vec![Complex::new(T::zero(), T::zero()); support_nodes]; k_total];
    let mut f0 = vec![vec![Complex::new(T::zero(), T::zero()); support_nodes]; k_total];

    for j in 0..support_nodes {
        let x = grid.x(j);
        let zero = Complex::new(T::zero(), T::zero());
        let decay = |k: usize, order: u32| -> C<T> {
            match &roots[k] {
                Some(root) => {
                    let mut m = (root.r0 * x).exp();
                    for _ in 0..order {
                        m = m * root.r0;
                    }
                    m * split.high.coeffs[k]
                }
                None => zero,
            }
        };
        let spectral = |mult: &dyn Fn(usize) -> C<T>| -> Vec<C<T>> {
            let mut buf: Vec<C<T>> = (0..k_total).map(mult).collect();
            inv.process(&mut buf);
            buf
        };
        // A = mu0 + J+ and its x-derivatives (mu0 is x-constant)
        let a_val = spectral(&|k| split.low.coeffs[k] + decay(k, 0));
        let a_x = spectral(&|k| decay(k, 1));
        let a_xx = spectral(&|k| decay(k, 2));
        let a_xxx = spectral(&|k| decay(k, 3));
        let a_t = spectral(&|k| (split.low.coeffs[k] + decay(k, 0)) * ii * win.lambda(k));

        let [e0, e1, e2, e3] = cut[j];
        for w in 0..k_total {
            let psi = a_val[w] * e0;
            let psi_x = a_x[w] * e0 - a_val[w] * e1;
            let psi_xx = a_xx[w] * e0 - a_x[w] * (rl::<T>(2.0) * e1) + a_val[w] * e2;
            let psi_xxx = a_xxx[w] * e0 - a_xx[w] * (rl::<T>(3.0) * e1)
                + a_x[w] * (rl::<T>(3.0) * e2)
                - a_val[w] * e3;
            let psi_t = a_t[w] * e0;
            psi0[w][j] = psi;
            f0[w][j] = ii * psi_t + psi_xx * a + ii * psi_x * b + ii * psi_xxx;
        }
    }

    Ok(LiftingPair { grid, support_nodes, psi0, f0, split, calibration })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Durand–Kerner iteration: an independent root oracle for the cubic.
    fn durand_kerner(a: f64, b: f64, lambda: f64) -> [C<f64>; 3] {
        let ii = cx::<f64>(0.0, 1.0);
        let poly = |r: C<f64>| r * r * r - ii * a * r * r + r * b + ii * lambda;
        let mut z = [cx::<f64>(0.4, 0.9), cx::<f64>(-0.91, 0.7), cx::<f64>(0.2, -1.1)];
        for _ in 0..200 {
            let old = z;
            for i in 0..3 {
                let mut denom = cx::<f64>(1.0, 0.0);
                for j in 0..3 {
                    if i != j {
                        denom = denom * (old[i] - old[j]);
                    }
                }
                z[i] = old[i] - poly(old[i]) / denom;
            }
        }
        z
    }

    #[test]
    fn closed_form_roots_at_plus_minus_eight() {
        // a = b = 0, lambda = 8: r0 = -sqrt(3) - i; lambda = -8: -sqrt(3) + i
        let r = find_root(8.0f64, 0.0, 0.0).unwrap();
        assert!((r.r0 - cx(-(3.0f64).sqrt(), -1.0)).norm() < 1e-12);
        let r = find_root(-8.0f64, 0.0, 0.0).unwrap();
        assert!((r.r0 - cx(-(3.0f64).sqrt(), 1.0)).norm() < 1e-12);
    }

    #[test]
    fn random_roots_verified_against_oracle() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(-2.0..2.0);
            let lambda: f64 =
                rng.gen_range(20.0..500.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let root = match find_root(lambda, a, b) {
                Ok(r) => r,
                Err(_) => continue,
            };
            assert!(root.residual < 1e-12 * lambda.abs().max(1.0));
            let oracle = durand_kerner(a, b, lambda);
            let nearest =
                oracle.iter().map(|z| (z - root.r0).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "root {:?} not near oracle {:?}", root.r0, oracle);
        }
    }

    #[test]
    fn calibration_for_pure_airy_symbol() {
        let cal = calibrate_lambda0(0.0f64, 0.0).unwrap();
        assert_relative_eq!(cal.lambda0, 1.0, epsilon = 1e-12);
        // Re r0 = -(sqrt(3)/2) |lambda|^{1/3} => eps = sqrt(3)/4
        assert_relative_eq!(cal.eps, 3.0f64.sqrt() / 4.0, epsilon = 1e-10);
    }

    #[test]
    fn below_cutoff_regime_is_reported() {
        // large a at small lambda destroys the unique-decaying-root structure
        let mut seen = false;
        for k in 0..40 {
            let lam = 0.2 + k as f64 * 0.2;
            if matches!(find_root(lam, 4.0, -3.0), Err(Error::BelowCutoff { .. })) {
                seen = true;
            }
        }
        assert!(seen, "expected a below-cutoff failure somewhere in the scan");
        let cal = calibrate_lambda0(4.0f64, -3.0).unwrap();
        assert!(cal.lambda0 > 1.0);
        assert!(cal.eps > 0.0);
    }

    fn test_grid() -> HalfLineGrid<f64> {
        HalfLineGrid::new(10.0, 200, 1.0, 64).unwrap()
    }

    #[test]
    fn single_mode_j_plus_solves_the_equation_and_traces() {
        let grid = test_grid();
        let (a, b) = (0.0f64, 0.0);
        let cal = calibrate_lambda0(a, b).unwrap();
        // window mode index 4: lambda = 2 pi 4 / 2T = 4 pi >= lambda0
        let period = 2.0 * grid.horizon;
        let mu = BoundarySignal::Modes { period, modes: vec![(4, cx(1.0, 0.0))] };
        let eta = CutoffEta::new();
        let win = WindowedSignal::from_signal(&mu, &grid, &eta);
        let split = frequency_split(&win, cal.lambda0);
        assert!(split.low.coeffs.iter().all(|c| c.norm() == 0.0));

        let xs: Vec<f64> = (0..=40).map(|j| j as f64 * 0.05).collect();
        let jp = build_j_plus(&split.high, &xs, a, b, cal.lambda0).unwrap();

        // trace: J+(t, 0) = mu1(t) at the window samples
        let mu_vals = win.values();
        for (w, row) in jp.values.iter().enumerate() {
            assert!((row[0] - mu_vals[w]).norm() < 1e-10);
        }

        // analytic check of the field: e^{i lambda t} e^{r0 x}
        let lambda = 8.0 * std::f64::consts::PI / period;
        let root = find_root(lambda, a, b).unwrap();
        for w in (0..win.coeffs.len()).step_by(17) {
            let t = w as f64 * win.step();
            for (j, &x) in xs.iter().enumerate().step_by(7) {
                let exact = Complex::from_polar(1.0, lambda * t) * (root.r0 * x).exp();
                assert!((jp.values[w][j] - exact).norm() < 1e-10, "w={w} j={j}");
            }
        }

        // spectral PDE residual
        assert!(jp.pde_residual(&split.high, a, b) < 1e-10);
    }

    #[test]
    fn zero_signal_gives_zero_potential_and_lifting() {
        let grid = test_grid();
        let eta = CutoffEta::new();
        let lift = build_lifting(&BoundarySignal::Zero, grid, 1.0, 0.5, &eta).unwrap();
        for w in [0usize, 5, 100] {
            assert!(lift.psi0[w].iter().all(|v| v.norm() == 0.0));
            assert!(lift.f0[w].iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn constant_signal_lifts_through_the_cutoff() {
        // mu = c: split gives mu0 = c, mu1 = 0; Psi0 = c eta(2-x) and F0
        // carries only the eta-derivative terms
        let grid = test_grid();
        let (a, b) = (0.7f64, -0.3);
        let c = cx::<f64>(0.8, -0.25);
        let mu = BoundarySignal::analytic(move |_t: f64| c);
        let eta = CutoffEta::new();
        let lift = build_lifting(&mu, grid, a, b, &eta).unwrap();
        assert!(lift.split.high.coeffs.iter().all(|v| v.norm() < 1e-13));
        let ii = cx::<f64>(0.0, 1.0);
        for w in [0usize, 31, 64] {
            for j in (0..lift.support_nodes).step_by(13) {
                let x = grid.x(j);
                let s = 2.0 - x;
                let psi_expect = c * eta.eval(s);
                assert!((lift.psi0[w][j] - psi_expect).norm() < 1e-12);
                let f_expect = c * (a * eta.d2(s) - ii * (b * eta.d1(s)) - ii * eta.d3(s));
                assert!((lift.f0[w][j] - f_expect).norm() < 1e-11, "w={w} j={j}");
            }
            // trace and support
            assert!((lift.psi0[w][0] - c).norm() < 1e-12);
            let beyond = lift.psi0_slice(w);
            for j in lift.support_nodes..grid.n_nodes() {
                assert_eq!(beyond[j], cx(0.0, 0.0));
            }
        }
    }

    #[test]
    fn band_limited_lifting_traces_mu_and_stays_supported() {
        let grid = test_grid();
        let (a, b) = (1.0f64, 0.5);
        let period = 2.0 * grid.horizon;
        let mu = BoundarySignal::Modes {
            period,
            modes: vec![(3, cx(0.6, 0.1)), (-5, cx(0.2, -0.4)), (9, cx(0.0, 0.3))],
        };
        let eta = CutoffEta::new();
        let lift = build_lifting(&mu, grid, a, b, &eta).unwrap();
        // Psi0(t, 0) = mu(t) samplewise
        for w in (0..lift.psi0.len()).step_by(11) {
            let t = w as f64 * grid.dt() / 2.0;
            assert!((lift.psi0[w][0] - mu.eval(t)).norm() < 1e-10, "w = {w}");
        }
        // mu0 + mu1 reconstructs mu
        let total: Vec<C<f64>> = lift
            .split
            .low
            .coeffs
            .iter()
            .zip(&lift.split.high.coeffs)
            .map(|(l, h)| l + h)
            .collect();
        let win = WindowedSignal::from_signal(&mu, &grid, &eta);
        for (k, c) in win.coeffs.iter().enumerate() {
            assert!((total[k] - c).norm() < 1e-13);
        }
        // high band really sits above the cutoff
        for (k, c) in lift.split.high.coeffs.iter().enumerate() {
            if c.norm() > 0.0 {
                assert!(lift.split.high.lambda(k).abs() >= lift.calibration.lambda0);
            }
        }
    }

    #[test]
    fn h_norm_scales_with_frequency() {
        let win = WindowedSignal {
            period: 2.0f64,
            coeffs: {
                let mut c = vec![cx(0.0, 0.0); 64];
                c[1] = cx(1.0, 0.0);
                c
            },
        };
        let lam = win.lambda(1);
        let expect = (2.0 * (1.0 + lam * lam).powf(1.0 / 3.0)).sqrt();
        assert_relative_eq!(win.h_norm(1.0 / 3.0), expect, epsilon = 1e-12);
    }
}
