//! Floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the simulations are generic over (`f32` or `f64`).
///
/// Numerical tolerances that depend on the working precision live here so
/// that solvers do not hard-code `f64` thresholds.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + Send + Sync + 'static
{
    /// Gradient max-norm the equilibrium solver aims for.
    fn solver_target() -> Self;
    /// Gradient max-norm below which an equilibrium is accepted.
    fn solver_accept() -> Self;
    /// Relative scale below which a quantity counts as numerically zero.
    fn noise_floor() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal fits scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count fits scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Reduces a phase into `[0, 2π)` before trigonometric evaluation.
    #[inline]
    fn wrap_phase(self) -> Self {
        let two_pi = Self::two_pi();
        self - (self / two_pi).floor() * two_pi
    }
}

impl Scalar for f64 {
    fn solver_target() -> Self {
        1e-12
    }
    fn solver_accept() -> Self {
        1e-10
    }
    fn noise_floor() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn solver_target() -> Self {
        1e-5
    }
    fn solver_accept() -> Self {
        1e-3
    }
    fn noise_floor() -> Self {
        1e-5
    }
}
