//! Scalar abstraction: every numeric routine in this crate is generic over
//! the floating-point type through [`GocdmFloat`].

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
///
/// Bundles the numeric traits the transform/channel/detector code needs with
/// the two random draws the channel model uses, so call sites do not have to
/// repeat `where StandardNormal: Distribution<T>` bounds everywhere.
pub trait GocdmFloat:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + rustfft::FftNum
    + std::fmt::Display
{
    /// One sample of the standard normal distribution N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One sample uniform on the half-open interval `[lo, hi)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;

    /// Shorthand for lossless-enough conversion from `f64` constants.
    fn from_f64c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    /// Shorthand for converting a count or index.
    fn from_usizec(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }
}

impl GocdmFloat for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        Uniform::new(lo, hi).expect("valid range").sample(rng)
    }
}

impl GocdmFloat for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        Uniform::new(lo, hi).expect("valid range").sample(rng)
    }
}

/// `e^{j·angle}` as a complex number.
#[inline]
pub fn cis<T: GocdmFloat>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

/// One sample of the circularly symmetric complex Gaussian CN(0, `variance`):
/// real and imaginary parts are independent N(0, `variance`/2).
pub fn complex_gaussian<T: GocdmFloat, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let sigma = (variance / T::from_f64c(2.0)).sqrt();
    Complex::new(
        T::standard_normal(rng) * sigma,
        T::standard_normal(rng) * sigma,
    )
}
