//! Floating-point abstraction used by every numeric kernel in this crate.
//!
//! All core math is generic over [`Scalar`]; `f64` is the default used by the
//! CLI and the benchmark harness (see the aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal, StudentT, Uniform};

/// Real scalar type for all numeric kernels.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;

    fn from_usize(x: usize) -> Self {
        Self::from_f64(x as f64)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// Scalars that can be drawn from the random families used by the data
/// generators. Sampling goes through explicit methods so callers only need a
/// `SampleScalar` bound rather than a pile of `Distribution` clauses.
pub trait SampleScalar: Scalar {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
    fn student_t<R: Rng + ?Sized>(rng: &mut R, dof: Self) -> Self;
    fn cauchy<R: Rng + ?Sized>(rng: &mut R, scale: Self) -> Self;
    /// Standard Laplace (variance 2).
    fn laplace<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_sample_scalar {
    ($t:ty) => {
        impl SampleScalar for $t {
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
            fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
                Uniform::new(lo, hi).sample(rng)
            }
            fn student_t<R: Rng + ?Sized>(rng: &mut R, dof: Self) -> Self {
                StudentT::new(dof).expect("dof > 0").sample(rng)
            }
            fn cauchy<R: Rng + ?Sized>(rng: &mut R, scale: Self) -> Self {
                Cauchy::new(0.0, scale).expect("scale > 0").sample(rng)
            }
            fn laplace<R: Rng + ?Sized>(rng: &mut R) -> Self {
                // Inverse CDF on u ~ U(-1/2, 1/2).
                let u: Self = Uniform::new(-0.5, 0.5).sample(rng);
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    };
}

impl_sample_scalar!(f64);
impl_sample_scalar!(f32);
