//! Scalar abstraction shared by every module.
//!
//! All geometry is written against [`Real`] so the same code runs in `f32`
//! and `f64`. Tolerances are part of the scalar type: the `f64` values are the
//! ones the library is calibrated for, the `f32` values are loosened to sit a
//! few orders of magnitude above single-precision rounding.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Residual bound for the generalized Kepler equation (scaled by the
    /// magnitude of the terms).
    const ROOT_RESIDUAL: f64;
    /// Step bound `|Δφ|` for Newton convergence.
    const ROOT_STEP: f64;
    /// Default absolute tolerance for algebraic identity checks.
    const IDENTITY_TOL: f64;
    /// Threshold below which a denominator or norm counts as zero.
    const SINGULAR: f64;
    /// Energies with `|H|` below this are treated as parabolic.
    const ENERGY_DEAD_ZONE: f64;
    /// Relative central-difference step for gradients.
    const GRADIENT_STEP: f64;
    /// Relative central-difference step for Hessians.
    const HESSIAN_STEP: f64;

    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f64 {
    const ROOT_RESIDUAL: f64 = 1e-13;
    const ROOT_STEP: f64 = 1e-14;
    const IDENTITY_TOL: f64 = 1e-10;
    const SINGULAR: f64 = 1e-14;
    const ENERGY_DEAD_ZONE: f64 = 1e-12;
    const GRADIENT_STEP: f64 = 1e-6;
    const HESSIAN_STEP: f64 = 1e-4;
}

impl Real for f32 {
    const ROOT_RESIDUAL: f64 = 2e-6;
    const ROOT_STEP: f64 = 1e-6;
    const IDENTITY_TOL: f64 = 2e-4;
    const SINGULAR: f64 = 1e-6;
    const ENERGY_DEAD_ZONE: f64 = 1e-5;
    const GRADIENT_STEP: f64 = 5e-3;
    const HESSIAN_STEP: f64 = 3e-2;
}
