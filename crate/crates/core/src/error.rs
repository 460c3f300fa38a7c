use thiserror::Error;

/// Every failure mode of the library.
///
/// Domain errors (collision, north pole, parabolic energy) are distinguished
/// from numerical ones so callers can map them to different exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Error {
    #[error("CollisionState: position vector has zero length")]
    CollisionState,
    #[error("ZeroEnergy: parabolic state (H = 0) is outside both map branches")]
    ZeroEnergy,
    #[error("NonFinite: input contains NaN or infinity")]
    NonFinite,
    #[error("NoRootInBracket: no sign change of the hyperbolic Kepler equation for |phi| <= 50")]
    NoRootInBracket,
    #[error("DegenerateDenominator: 1 - r0 vanishes (collision / north pole)")]
    DegenerateDenominator,
    #[error("NorthPole: stereographic projection undefined at xi0 = 1")]
    NorthPole,
    #[error("ZeroZ: Levi-Civita map undefined at z = 0")]
    ZeroZ,
    #[error("ZeroY: inverse Levi-Civita map undefined at y = 0")]
    ZeroY,
    #[error("ZeroPoint: Hamiltonian undefined at w = z = 0")]
    ZeroPoint,
    #[error("PrimaryCollision: position coincides with a primary")]
    PrimaryCollision,
    #[error("ZeroGradient: tangential basis needs a non-vanishing gradient")]
    ZeroGradient,
    #[error("EvaluationFailed: a finite-difference probe left the domain")]
    EvaluationFailed,
    #[error("NonNegativeEnergy: operation requires a bound (H < 0) orbit")]
    NonNegativeEnergy,
    #[error("InfeasibleStart: starting point violates the constraints")]
    InfeasibleStart,
    #[error("AllNegative: no rdHP boundary above which all bins are positive")]
    AllNegative,
    #[error("InvalidMassRatio: mu must lie in [0, 0.5]")]
    InvalidMassRatio,
    #[error("EnergySignMismatch: state and energy belong to different branches")]
    EnergySignMismatch,
    #[error("InvalidArgument: {0}")]
    InvalidArgument(&'static str),
}

impl Error {
    /// True for errors caused by the input lying outside the regularized
    /// domain rather than by bad arguments.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::CollisionState
                | Error::ZeroEnergy
                | Error::DegenerateDenominator
                | Error::NorthPole
                | Error::ZeroZ
                | Error::ZeroY
                | Error::ZeroPoint
                | Error::PrimaryCollision
                | Error::NonNegativeEnergy
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
