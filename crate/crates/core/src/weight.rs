//! Admissible weight functions: positive, with derivatives dominated by the
//! function itself. Derivatives are analytic formulas per kind, never
//! finite-differenced, so identity residuals are not polluted by
//! weight-differentiation error.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{rl, Scalar};

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind<T: Scalar> {
    /// e^{2 alpha x}
    Exponential { alpha: T },
    /// (1 + x)^{2 alpha}
    Power { alpha: T },
    /// rho_0(x) = 1 + (2/pi) arctan x
    Arctan,
    /// identically one
    One,
    /// user-supplied evaluators (not serializable)
    Custom { name: String, derivs: [RealFn<T>; 4] },
}

impl<T: Scalar> fmt::Debug for WeightKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { alpha } => write!(f, "Exponential {{ alpha: {alpha} }}"),
            Self::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            Self::Arctan => write!(f, "Arctan"),
            Self::One => write!(f, "One"),
            Self::Custom { name, .. } => write!(f, "Custom {{ name: {name} }}"),
        }
    }
}

/// An admissible weight with declared domination constants c(1), c(3).
#[derive(Clone, Debug)]
pub struct WeightSpec<T: Scalar> {
    pub kind: WeightKind<T>,
    pub c1: T,
    pub c3: T,
}

impl<T: Scalar> WeightSpec<T> {
    pub fn exponential(alpha: T) -> Self {
        let two_a = (rl::<T>(2.0) * alpha).abs();
        Self { kind: WeightKind::Exponential { alpha }, c1: two_a, c3: two_a.powi(3) }
    }

    pub fn power(alpha: T) -> Self {
        let two = rl::<T>(2.0);
        let a2 = two * alpha;
        // |2a (2a-1) ... | / (1+x)^j peaks at x = 0
        let c1 = a2.abs();
        let c3 = (a2 * (a2 - T::one()) * (a2 - two)).abs();
        Self { kind: WeightKind::Power { alpha }, c1, c3 }
    }

    pub fn arctan() -> Self {
        let two_over_pi = rl::<T>(2.0) / T::PI();
        Self { kind: WeightKind::Arctan, c1: two_over_pi, c3: two_over_pi * rl::<T>(2.0) }
    }

    pub fn one() -> Self {
        Self { kind: WeightKind::One, c1: T::zero(), c3: T::zero() }
    }

    pub fn custom(name: impl Into<String>, derivs: [RealFn<T>; 4], c1: T, c3: T) -> Self {
        Self { kind: WeightKind::Custom { name: name.into(), derivs }, c1, c3 }
    }

    /// rho_0'(x), itself an admissible weight.
    pub fn arctan_derivative() -> Self {
        let two_over_pi = |x: T| rl::<T>(2.0) / T::PI() * x;
        let psi: RealFn<T> = Arc::new(move |x: T| two_over_pi((T::one() + x * x).recip()));
        let d1: RealFn<T> = Arc::new(move |x: T| {
            let d = T::one() + x * x;
            two_over_pi(-rl::<T>(2.0) * x / (d * d))
        });
        let d2: RealFn<T> = Arc::new(move |x: T| {
            let d = T::one() + x * x;
            two_over_pi((rl::<T>(6.0) * x * x - rl::<T>(2.0)) / (d * d * d))
        });
        let d3: RealFn<T> = Arc::new(move |x: T| {
            let d = T::one() + x * x;
            two_over_pi(rl::<T>(24.0) * x * (T::one() - x * x) / (d * d * d * d))
        });
        // |psi'|/psi = 2x/(1+x^2) <= 1; |psi'''|/psi = 12|x||1-x^2|/(1+x^2)^2 <= 12
        Self::custom("arctan-derivative", [psi, d1, d2, d3], T::one(), rl::<T>(12.0))
    }

    /// psi^{(j)}(x) for j = 0..=3.
    pub fn derivative(&self, j: usize, x: T) -> T {
        assert!(j <= 3, "weight derivatives available up to order 3");
        match &self.kind {
            WeightKind::Exponential { alpha } => {
                let a2 = rl::<T>(2.0) * *alpha;
                a2.powi(j as i32) * (a2 * x).exp()
            }
            WeightKind::Power { alpha } => {
                let a2 = rl::<T>(2.0) * *alpha;
                let mut coeff = T::one();
                for i in 0..j {
                    coeff = coeff * (a2 - rl::<T>(i as f64));
                }
                coeff * (T::one() + x).powf(a2 - rl::<T>(j as f64))
            }
            WeightKind::Arctan => {
                let two_over_pi = rl::<T>(2.0) / T::PI();
                let d = T::one() + x * x;
                match j {
                    0 => T::one() + two_over_pi * x.atan(),
                    1 => two_over_pi / d,
                    2 => two_over_pi * (-rl::<T>(2.0) * x) / (d * d),
                    _ => two_over_pi * (rl::<T>(6.0) * x * x - rl::<T>(2.0)) / (d * d * d),
                }
            }
            WeightKind::One => {
                if j == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            }
            WeightKind::Custom { derivs, .. } => derivs[j](x),
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        self.derivative(0, x)
    }

    #[inline]
    pub fn d1(&self, x: T) -> T {
        self.derivative(1, x)
    }

    #[inline]
    pub fn d3(&self, x: T) -> T {
        self.derivative(3, x)
    }

    pub fn declared(&self, order: usize) -> Option<T> {
        match order {
            1 => Some(self.c1),
            3 => Some(self.c3),
            _ => None,
        }
    }

    /// Serialization code used by config and report files.
    pub fn code(&self) -> String {
        match &self.kind {
            WeightKind::Exponential { alpha } => format!("exp:{alpha}"),
            WeightKind::Power { alpha } => format!("pow:{alpha}"),
            WeightKind::Arctan => "arctan".into(),
            WeightKind::One => "one".into(),
            WeightKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    pub fn parse(code: &str) -> Result<Self> {
        if code == "arctan" {
            return Ok(Self::arctan());
        }
        if code == "one" {
            return Ok(Self::one());
        }
        if let Some(rest) = code.strip_prefix("exp:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad weight code {code:?}")))?;
            return Ok(Self::exponential(rl(alpha)));
        }
        if let Some(rest) = code.strip_prefix("pow:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad weight code {code:?}")))?;
            return Ok(Self::power(rl(alpha)));
        }
        Err(Error::InvalidInput(format!("unknown weight code {code:?}")))
    }
}

/// Log-spaced sample set {0} U 10^linspace(-3, log10(x_max)).
pub fn log_spaced_samples<T: Scalar>(x_max: T, count: usize) -> Vec<T> {
    assert!(count >= 2);
    let lo = -3.0f64;
    let hi = x_max.to_f64().unwrap().max(1e-2).log10();
    let mut out = vec![T::zero()];
    for k in 0..count {
        let e = lo + (hi - lo) * k as f64 / (count - 1) as f64;
        out.push(rl(10f64.powf(e)));
    }
    out
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport<T: Scalar> {
    pub ok: bool,
    /// per requested order: observed max |psi^(j)| / psi
    pub constants: Vec<(usize, T)>,
}

/// Check the domination ratios |psi^(j)(x)| <= c(j) psi(x) on the samples.
pub fn check_admissible<T: Scalar>(
    w: &WeightSpec<T>,
    orders: &[usize],
    x_samples: &[T],
) -> Result<AdmissibilityReport<T>> {
    let mut constants = Vec::with_capacity(orders.len());
    let mut ok = true;
    for &j in orders {
        if j == 0 || j > 3 {
            return Err(Error::InvalidInput(format!(
                "admissibility orders must be in 1..=3, got {j}"
            )));
        }
        let mut max_ratio = T::zero();
        for &x in x_samples {
            let psi = w.eval(x);
            if !(psi > T::zero()) {
                return Err(Error::NotAWeight {
                    x: x.to_f64().unwrap_or(f64::NAN),
                    value: psi.to_f64().unwrap_or(f64::NAN),
                });
            }
            let ratio = w.derivative(j, x).abs() / psi;
            if ratio > max_ratio {
                max_ratio = ratio;
            }
        }
        if let Some(declared) = w.declared(j) {
            let slack = rl::<T>(1.0 + 1e-9);
            if max_ratio > declared * slack + rl::<T>(1e-12) {
                ok = false;
            }
        }
        constants.push((j, max_ratio));
    }
    Ok(AdmissibilityReport { ok, constants })
}

#[derive(Clone, Debug)]
pub struct UniquenessReport<T: Scalar> {
    pub ok: bool,
    pub inf_value: T,
}

/// Evaluate inf over the samples of (psi')^{p+2} psi^{p-2}; `ok` iff the
/// infimum stays at or above the caller's threshold c0.
pub fn check_uniqueness_condition<T: Scalar>(
    w: &WeightSpec<T>,
    p: T,
    x_samples: &[T],
    c0: T,
) -> Result<UniquenessReport<T>> {
    if p < T::one() || p > rl::<T>(2.0) {
        return Err(Error::InvalidInput(format!("uniqueness range requires p in [1,2], got {p}")));
    }
    let mut inf = T::infinity();
    for &x in x_samples {
        let psi = w.eval(x);
        let dpsi = w.d1(x);
        if !(psi > T::zero()) {
            return Err(Error::NotAWeight {
                x: x.to_f64().unwrap_or(f64::NAN),
                value: psi.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(dpsi > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "psi'({}) = {} not positive; condition undefined",
                x.to_f64().unwrap_or(f64::NAN),
                dpsi.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let v = dpsi.powf(p + rl::<T>(2.0)) * psi.powf(p - rl::<T>(2.0));
        if v < inf {
            inf = v;
        }
    }
    Ok(UniquenessReport { ok: inf >= c0, inf_value: inf })
}
