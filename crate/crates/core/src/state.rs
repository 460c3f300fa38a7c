//! Phase-space value types.
//!
//! Units are canonical (`GM = 1`). Planar problems embed as 3-vectors with a
//! zero third component; their sphere images then have `xi3 = eta3 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, is_finite, norm, norm_sq, Vec3, Vec4};
use crate::scalar::Real;

/// A point `(q, p)` of Kepler phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState<T> {
    pub q: Vec3<T>,
    pub p: Vec3<T>,
}

impl<T: Real> CartesianState<T> {
    /// Builds a state, rejecting non-finite input and collision positions.
    pub fn new(q: Vec3<T>, p: Vec3<T>) -> Result<Self> {
        let s = Self { q, p };
        s.validate()?;
        Ok(s)
    }

    pub fn planar(q: [T; 2], p: [T; 2]) -> Result<Self> {
        Self::new([q[0], q[1], T::zero()], [p[0], p[1], T::zero()])
    }

    pub fn validate(&self) -> Result<()> {
        if !is_finite(&self.q) || !is_finite(&self.p) {
            return Err(Error::NonFinite);
        }
        if norm_sq(&self.q) == T::zero() {
            return Err(Error::CollisionState);
        }
        Ok(())
    }

    #[inline]
    pub fn radius(&self) -> T {
        norm(&self.q)
    }

    #[inline]
    pub fn q_dot_p(&self) -> T {
        dot(&self.q, &self.p)
    }

    /// Kepler energy `|p|²/2 − 1/|q|`.
    #[inline]
    pub fn energy(&self) -> T {
        norm_sq(&self.p) * T::half() - self.radius().recip()
    }

    /// Which branch of the map this state belongs to.
    pub fn energy_sign(&self) -> Result<EnergySign> {
        EnergySign::of_energy(self.energy())
    }

    #[inline]
    pub fn angular_momentum(&self) -> Vec3<T> {
        cross(&self.q, &self.p)
    }

    /// Runge-Lenz vector rescaled by `1/sqrt(|2H|)`:
    /// `(q/|q| + p (q·p) − q |p|²) / sqrt(|2H|)`.
    pub fn rescaled_runge_lenz(&self) -> Vec3<T> {
        let r = self.radius();
        let qp = self.q_dot_p();
        let p2 = norm_sq(&self.p);
        let k = (T::two() * self.energy()).abs().sqrt();
        std::array::from_fn(|i| (self.q[i] / r + self.p[i] * qp - self.q[i] * p2) / k)
    }

    pub fn conserved(&self) -> ConservedQuantities<T> {
        ConservedQuantities {
            angular_momentum: self.angular_momentum(),
            runge_lenz: self.rescaled_runge_lenz(),
            energy: self.energy(),
        }
    }
}

/// Energy branch of the regularization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergySign {
    /// Elliptic orbits, Euclidean metric on R⁴.
    #[serde(rename = "neg")]
    Negative,
    /// Hyperbolic orbits, Lorentzian metric on R⁴.
    #[serde(rename = "pos")]
    Positive,
}

impl EnergySign {
    pub fn of_energy<T: Real>(h: T) -> Result<Self> {
        if !h.is_finite() {
            Err(Error::NonFinite)
        } else if h.abs() < T::lit(T::ENERGY_DEAD_ZONE) {
            Err(Error::ZeroEnergy)
        } else if h < T::zero() {
            Ok(EnergySign::Negative)
        } else {
            Ok(EnergySign::Positive)
        }
    }

    /// Inner product on R⁴ matching this branch:
    /// Euclidean for negative energy, `a0 b0 − Σ ai bi` for positive.
    #[inline]
    pub fn inner<T: Real>(self, a: &Vec4<T>, b: &Vec4<T>) -> T {
        match self {
            EnergySign::Negative => dot(a, b),
            EnergySign::Positive => a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        }
    }
}

/// Image of a Kepler state on the cotangent bundle of the 3-sphere
/// (or of the hyperboloid for positive energy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereState<T> {
    pub xi: Vec4<T>,
    pub eta: Vec4<T>,
    pub sign: EnergySign,
    /// Rotation angle used by the forward map, kept for diagnostics.
    #[serde(skip)]
    pub angle: Option<T>,
}

impl<T: Real> SphereState<T> {
    pub fn new(xi: Vec4<T>, eta: Vec4<T>, sign: EnergySign) -> Self {
        Self {
            xi,
            eta,
            sign,
            angle: None,
        }
    }

    /// Branch metric square of `xi` (1 on valid states).
    pub fn xi_sq(&self) -> T {
        self.sign.inner(&self.xi, &self.xi)
    }

    /// Branch metric product `xi·eta` (0 on valid states).
    pub fn xi_dot_eta(&self) -> T {
        self.sign.inner(&self.xi, &self.eta)
    }

    /// Branch metric square of `eta`, equal to `−1/(2H)`.
    pub fn eta_sq(&self) -> T {
        self.sign.inner(&self.eta, &self.eta)
    }

    /// Positive normalizer of `eta`: `|eta|` for negative energy,
    /// `sqrt(−eta²)` for positive energy.
    pub fn eta_scale(&self) -> T {
        self.eta_sq().abs().sqrt()
    }

    /// Delaunay Hamiltonian `−1/(2 eta²)`.
    pub fn energy(&self) -> T {
        -(T::two() * self.eta_sq()).recip()
    }

    /// Angular momentum on the sphere, `L_i = xi_j eta_k − xi_k eta_j`.
    pub fn angular_momentum(&self) -> Vec3<T> {
        let (x, e) = (&self.xi, &self.eta);
        [
            x[2] * e[3] - x[3] * e[2],
            x[3] * e[1] - x[1] * e[3],
            x[1] * e[2] - x[2] * e[1],
        ]
    }

    /// Image of the rescaled Runge-Lenz vector, `xi0 eta_i − xi_i eta0`.
    pub fn runge_lenz(&self) -> Vec3<T> {
        let (x, e) = (&self.xi, &self.eta);
        std::array::from_fn(|i| x[0] * e[i + 1] - x[i + 1] * e[0])
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.xi) && is_finite(&self.eta)
    }
}

/// Intermediate `(r, s)` of the factorization `F = F2 ∘ F1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsState<T> {
    pub r: Vec4<T>,
    pub s: Vec4<T>,
    pub sign: EnergySign,
}

impl<T: Real> RsState<T> {
    pub fn r_sq(&self) -> T {
        self.sign.inner(&self.r, &self.r)
    }

    pub fn r_dot_s(&self) -> T {
        self.sign.inner(&self.r, &self.s)
    }

    pub fn s_sq(&self) -> T {
        self.sign.inner(&self.s, &self.s)
    }
}

/// First integrals of the Kepler problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedQuantities<T> {
    pub angular_momentum: Vec3<T>,
    /// Runge-Lenz vector rescaled by `1/sqrt(|2H|)`.
    pub runge_lenz: Vec3<T>,
    pub energy: T,
}

impl<T: Real> ConservedQuantities<T> {
    /// `sqrt(|2H|)·|M|`.
    pub fn eccentricity_from_runge_lenz(&self) -> T {
        (T::two() * self.energy).abs().sqrt() * norm(&self.runge_lenz)
    }

    /// `sqrt(1 + 2H|L|²)`.
    pub fn eccentricity_from_angular_momentum(&self) -> T {
        (T::one() + T::two() * self.energy * norm_sq(&self.angular_momentum))
            .max(T::zero())
            .sqrt()
    }
}
