//! Scalar abstraction: all numerics are generic over the real type.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type the laboratory is generic over: `f32` or `f64`.
///
/// The `rustfft::FftNum` bound keeps the spectral paths (full-line oracle,
/// boundary-signal windows) available for every scalar choice.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
        + rustfft::FftNum
{
}

/// Complex number over the chosen scalar.
pub type C<T> = Complex<T>;

/// Convert an `f64` literal into the generic scalar.
#[inline]
pub fn rl<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in scalar type")
}

/// Complex constant from a pair of `f64` literals.
#[inline]
pub fn cx<T: Scalar>(re: f64, im: f64) -> C<T> {
    Complex::new(rl(re), rl(im))
}

/// The imaginary unit.
#[inline]
pub fn i<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        let x: f64 = rl(0.5);
        assert_eq!(x, 0.5);
        let y: f32 = rl(0.25);
        assert_eq!(y, 0.25);
        assert_eq!(i::<f64>() * i::<f64>(), cx(-1.0, 0.0));
    }
}
