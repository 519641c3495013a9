//! Full-line Fourier oracle: the initial-value problem
//! i w_t + a w_xx + i b w_x + i w_xxx = f on a periodic box, solved exactly
//! in spectral space through the dispersion phase xi^3 - a xi^2 - b xi.
//! Used as the reference solution for the half-line solver before boundary
//! influence arrives.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{rl, Scalar, C};

/// Relative spectral tail mass allowed before a run is declared unresolved.
pub const ALIAS_TAIL_LIMIT: f64 = 1e-10;

/// Periodic box `[x_left, x_left + width)` with `n` uniform nodes.
#[derive(Clone, Copy, Debug)]
pub struct PeriodicBox<T: Scalar> {
    pub x_left: T,
    pub width: T,
    pub n: usize,
}

impl<T: Scalar> PeriodicBox<T> {
    #[inline]
    pub fn dx(&self) -> T {
        self.width / rl::<T>(self.n as f64)
    }

    #[inline]
    pub fn x(&self, m: usize) -> T {
        self.x_left + rl::<T>(m as f64) * self.dx()
    }

    /// Signed frequency of FFT bin k.
    #[inline]
    pub fn xi(&self, k: usize) -> T {
        let k_signed = if k < self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
        rl::<T>(2.0) * T::PI() * rl::<T>(k_signed) / self.width
    }
}

/// Dispersion phase of the linear group: w_hat(t) = w_hat(0) e^{i phase t}.
#[inline]
pub fn dispersion_phase<T: Scalar>(xi: T, a: T, b: T) -> T {
    xi * xi * xi - a * xi * xi - b * xi
}

/// FFT plans bound to one box; transforms are normalized so that `hat`
/// approximates the continuous Fourier transform on the box.
pub struct SpectralBox<T: Scalar> {
    pub bx: PeriodicBox<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Scalar> SpectralBox<T> {
    pub fn new(bx: PeriodicBox<T>) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(bx.n);
        let inv = planner.plan_fft_inverse(bx.n);
        Self { bx, fwd, inv }
    }

    /// Sample a function on the box nodes.
    pub fn sample(&self, mut f: impl FnMut(T) -> C<T>) -> Vec<C<T>> {
        (0..self.bx.n).map(|m| f(self.bx.x(m))).collect()
    }

    /// hat(xi_k) = dx e^{-i xi_k x_left} sum_m w_m e^{-2 pi i k m / n}.
    pub fn to_hat(&self, phys: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(phys.len(), self.bx.n);
        let mut buf = phys.to_vec();
        self.fwd.process(&mut buf);
        let dx = self.bx.dx();
        for (k, v) in buf.iter_mut().enumerate() {
            let rot = Complex::from_polar(T::one(), -self.bx.xi(k) * self.bx.x_left);
            *v = *v * rot * dx;
        }
        buf
    }

    pub fn to_phys(&self, hat: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(hat.len(), self.bx.n);
        let dx = self.bx.dx();
        let mut buf: Vec<C<T>> = hat
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let rot = Complex::from_polar(T::one(), self.bx.xi(k) * self.bx.x_left);
                *v * rot / dx
            })
            .collect();
        self.inv.process(&mut buf);
        let scale = rl::<T>(1.0 / self.bx.n as f64);
        for v in &mut buf {
            *v = *v * scale;
        }
        buf
    }

    /// Fraction of spectral mass in the top eighth of |xi|.
    pub fn tail_mass(&self, hat: &[C<T>]) -> T {
        let n = self.bx.n;
        let cutoff = rl::<T>(7.0 / 8.0) * self.xi_max();
        let mut tail = T::zero();
        let mut total = T::zero();
        for (k, v) in hat.iter().enumerate() {
            let m = v.norm_sqr();
            total = total + m;
            if self.bx.xi(k).abs() >= cutoff {
                tail = tail + m;
            }
        }
        let _ = n;
        if total > T::zero() {
            tail / total
        } else {
            T::zero()
        }
    }

    fn xi_max(&self) -> T {
        rl::<T>(2.0) * T::PI() * rl::<T>((self.bx.n / 2) as f64) / self.bx.width
    }

    fn guard(&self, hat: &[C<T>]) -> Result<()> {
        let tail = self.tail_mass(hat).to_f64().unwrap_or(f64::NAN);
        if !(tail <= ALIAS_TAIL_LIMIT) {
            return Err(Error::Resolution { tail, limit: ALIAS_TAIL_LIMIT });
        }
        Ok(())
    }

    /// Exact spectral propagator: returns `w_hat(t)` given `u0_hat` and the
    /// source history `f_hat` sampled with step `dt_f` (trapezoid in tau).
    /// `t` must be a multiple of `dt_f` when `f_hat` is non-empty.
    pub fn fourier_oracle_fullline(
        &self,
        u0_hat: &[C<T>],
        f_hat: &[Vec<C<T>>],
        dt_f: T,
        t: T,
        a: T,
        b: T,
    ) -> Result<Vec<C<T>>> {
        self.guard(u0_hat)?;
        let n = self.bx.n;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for k in 0..n {
            let phase = dispersion_phase(self.bx.xi(k), a, b);
            out[k] = u0_hat[k] * Complex::from_polar(T::one(), phase * t);
        }
        if !f_hat.is_empty() {
            let nt = (t / dt_f).round().to_f64().unwrap() as usize;
            if nt >= f_hat.len() {
                return Err(Error::InsufficientData(format!(
                    "source history has {} slices, need {}",
                    f_hat.len(),
                    nt + 1
                )));
            }
            for slice in &f_hat[..=nt] {
                self.guard(slice)?;
            }
            let half = rl::<T>(0.5);
            let mi = Complex::new(T::zero(), -T::one());
            for k in 0..n {
                let phase = dispersion_phase(self.bx.xi(k), a, b);
                let mut acc = Complex::new(T::zero(), T::zero());
                for (j, slice) in f_hat[..=nt].iter().enumerate() {
                    let tau = rl::<T>(j as f64) * dt_f;
                    let w = if j == 0 || j == nt { half } else { T::one() };
                    acc = acc + slice[k] * Complex::from_polar(T::one(), phase * (t - tau)) * w;
                }
                out[k] = out[k] + mi * acc * dt_f;
            }
        }
        Ok(out)
    }

    /// Spectral derivative of order `m`.
    pub fn derivative_hat(&self, hat: &[C<T>], m: usize) -> Vec<C<T>> {
        let ii = Complex::new(T::zero(), T::one());
        hat.iter()
            .enumerate()
            .map(|(k, v)| {
                let mut mult = Complex::new(T::one(), T::zero());
                for _ in 0..m {
                    mult = mult * ii * self.bx.xi(k);
                }
                *v * mult
            })
            .collect()
    }
}

/// Full history of a spectral run sampled on M+1 uniform times.
pub struct FullLineRun<T: Scalar> {
    pub bx: PeriodicBox<T>,
    pub horizon: T,
    pub slices: Vec<Vec<C<T>>>,
}

/// Run the linear full-line problem (f = 0) over [0, horizon], M steps.
pub fn solve_fullline_linear<T: Scalar>(
    sb: &SpectralBox<T>,
    u0: &[C<T>],
    horizon: T,
    n_steps: usize,
    a: T,
    b: T,
) -> Result<FullLineRun<T>> {
    let u0_hat = sb.to_hat(u0);
    let dt = horizon / rl::<T>(n_steps as f64);
    let mut slices = Vec::with_capacity(n_steps + 1);
    for n in 0..=n_steps {
        let hat = sb.fourier_oracle_fullline(&u0_hat, &[], dt, dt * rl::<T>(n as f64), a, b)?;
        slices.push(sb.to_phys(&hat));
    }
    Ok(FullLineRun { bx: sb.bx, horizon, slices })
}
