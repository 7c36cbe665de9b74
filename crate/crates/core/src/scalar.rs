//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real floating point scalar: `f32` or `f64`.
///
/// Physical computations that involve ħ or the speed of light (the spectral
/// routines) overflow or underflow in `f32`; use `f64` there.
pub trait Real:
    RealField + Copy + FloatConst + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    const EPSILON: Self;
    const INFINITY: Self;
    const MIN_POSITIVE: Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    #[inline]
    fn is_nan_value(self) -> bool {
        self.partial_cmp(&self).is_none()
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const EPSILON: Self = <$t>::EPSILON;
            const INFINITY: Self = <$t>::INFINITY;
            const MIN_POSITIVE: Self = <$t>::MIN_POSITIVE;
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}
