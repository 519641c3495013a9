//! Numerical laboratory for the higher-order nonlinear Schrödinger equation
//!
//!   i u_t + a u_xx + i b u_x + i u_xxx + lambda |u|^p u
//!       + i beta (|u|^p u)_x + i gamma (|u|^p)_x u = f
//!
//! on the half-line x >= 0 with initial data u(0, x) = u0(x) and boundary
//! data u(t, 0) = mu(t).
//!
//! The crate provides:
//! - weighted norms, admissible weights, and the local-smoothing functional
//!   sigma^+ ([`norms`], [`weight`]);
//! - a Crank–Nicolson solver for the linear half-line problem plus a
//!   full-line Fourier oracle and the data-compatibility recursion
//!   ([`linear`], [`oracle`], [`compat`]);
//! - boundary potentials built from the decaying root of the characteristic
//!   cubic, and the lifting pair that homogenizes boundary data
//!   ([`boundary`]);
//! - the regularized nonlinearity and a contraction-style fixed-point time
//!   stepper for the full equation ([`nonlin`]);
//! - a small spectral Galerkin solver for the auxiliary problems with exact
//!   ODE-level identities ([`galerkin`]);
//! - identity and estimate diagnostics: L2 balance, energy identities, weak
//!   residuals, interpolation probes, and continuous-dependence experiments
//!   ([`diagnostics`], [`experiment`]);
//! - scenario orchestration with flat-file configs and CSV/JSON artifacts
//!   ([`scenario`], [`report`]).
//!
//! All numerics are generic over the real scalar via [`scalar::Scalar`]
//! (`f32` or `f64`); the concrete aliases below fix `f64`, which is what the
//! CLI and the acceptance suite use.

pub mod boundary;
pub mod compat;
pub mod cutoff;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod galerkin;
pub mod grid;
pub mod linalg;
pub mod linear;
pub mod nonlin;
pub mod norms;
pub mod oracle;
pub mod problem;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod stencil;
pub mod weight;

pub use error::{Error, Result};
pub use scalar::{Scalar, C};

/// Default scalar for the CLI and the acceptance suite.
pub type Real = f64;
/// Complex number over the default scalar.
pub type C64 = num_complex::Complex<f64>;
/// Single-precision complex, for scalar-genericity smoke tests.
pub type C32 = num_complex::Complex<f32>;

pub type HalfLineGrid64 = grid::HalfLineGrid<f64>;
pub type GridFunction64 = grid::GridFunction<f64>;
pub type WeightSpec64 = weight::WeightSpec<f64>;
pub type ProblemSpec64 = problem::ProblemSpec<f64>;
