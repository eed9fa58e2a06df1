//! Scalar abstraction: all core math is generic over the real field.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Complex number over the generic real scalar.
pub type Cx<T> = Complex<T>;

/// i as a complex constant.
pub fn im<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// Real constant lifted into the complex field.
pub fn cx<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_lift_to_both_widths() {
        assert_eq!(<f64 as Real>::of(0.5), 0.5);
        assert_eq!(<f32 as Real>::of(0.5), 0.5f32);
        assert_eq!(im::<f64>() * im::<f64>(), cx(-1.0));
    }
}
