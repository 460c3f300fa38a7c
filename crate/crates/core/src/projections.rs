//! Stereographic projection between `T*R²` and `T*S²`, the Levi-Civita
//! double cover, and the shift that centers the regularization on the heavy
//! primary.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_finite, norm_sq, Vec2};
use crate::scalar::Real;
use crate::state::{EnergySign, SphereState};

/// Point of `T*R²`, read as complex position `x` and momentum `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarCotangent<T> {
    pub x: Vec2<T>,
    pub y: Vec2<T>,
}

/// Levi-Civita variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair<T> {
    pub w: Vec2<T>,
    pub z: Vec2<T>,
}

impl<T: Real> ComplexPair<T> {
    pub fn new(w: Vec2<T>, z: Vec2<T>) -> Self {
        Self { w, z }
    }

    /// Packs `(w1, w2, z1, z2)`.
    pub fn from_array(v: [T; 4]) -> Self {
        Self { w: [v[0], v[1]], z: [v[2], v[3]] }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.w[0], self.w[1], self.z[0], self.z[1]]
    }

    /// `|w|² + |z|²`
    pub fn norm_sq(&self) -> T {
        norm_sq(&self.w) + norm_sq(&self.z)
    }

    /// `w1 z2 − w2 z1`
    pub fn wedge(&self) -> T {
        self.w[0] * self.z[1] - self.w[1] * self.z[0]
    }
}

#[inline]
fn to_complex<T: Real>(v: &Vec2<T>) -> Complex<T> {
    Complex::new(v[0], v[1])
}

#[inline]
fn from_complex<T: Real>(c: Complex<T>) -> Vec2<T> {
    [c.re, c.im]
}

/// Stereographic projection onto `T*S²`, embedded in `T*S³` with zero
/// third components.
pub fn stereo_forward<T: Real>(pc: &PlanarCotangent<T>) -> Result<SphereState<T>> {
    if !is_finite(&pc.x) || !is_finite(&pc.y) {
        return Err(Error::NonFinite);
    }
    let (x, y) = (&pc.x, &pc.y);
    let x2 = norm_sq(x);
    let denom = x2 + T::one();
    let c = T::two() / denom;
    let xy = x[0] * y[0] + x[1] * y[1];
    let half = denom * T::half();
    let xi = [(x2 - T::one()) / denom, c * x[0], c * x[1], T::zero()];
    let eta = [xy, half * y[0] - xy * x[0], half * y[1] - xy * x[1], T::zero()];
    Ok(SphereState::new(xi, eta, EnergySign::Negative))
}

/// Inverse stereographic projection from the north pole.
pub fn stereo_inverse<T: Real>(sp: &SphereState<T>) -> Result<PlanarCotangent<T>> {
    if !sp.is_finite() {
        return Err(Error::NonFinite);
    }
    let (xi, eta) = (&sp.xi, &sp.eta);
    let gap = T::one() - xi[0];
    if gap < T::lit(T::SINGULAR) {
        return Err(Error::NorthPole);
    }
    Ok(PlanarCotangent {
        x: [xi[1] / gap, xi[2] / gap],
        y: [eta[0] * xi[1] + gap * eta[1], eta[0] * xi[2] + gap * eta[2]],
    })
}

/// Levi-Civita map `x = conj(w)/z`, `y = 2 conj(z)²`.
///
/// The conjugation fixes the orientation so that `x1 y2 − x2 y1` equals
/// `−2(w1 z2 − w2 z1)` and the pulled-back rotating Kepler Hamiltonian reads
/// `−1/(2X²) + 2(w1 z2 − w2 z1)`.
pub fn levi_civita_forward<T: Real>(cp: &ComplexPair<T>) -> Result<PlanarCotangent<T>> {
    if !is_finite(&cp.w) || !is_finite(&cp.z) {
        return Err(Error::NonFinite);
    }
    if norm_sq(&cp.z).sqrt() <= T::lit(T::SINGULAR) {
        return Err(Error::ZeroZ);
    }
    let w = to_complex(&cp.w);
    let z = to_complex(&cp.z);
    let zc = z.conj();
    Ok(PlanarCotangent {
        x: from_complex(w.conj() / z),
        y: from_complex(zc * zc * T::two()),
    })
}

/// Inverse Levi-Civita map on the principal branch:
/// `z = conj(sqrt(y/2))`, `w = conj(x z)`.
pub fn levi_civita_inverse<T: Real>(pc: &PlanarCotangent<T>) -> Result<ComplexPair<T>> {
    if !is_finite(&pc.x) || !is_finite(&pc.y) {
        return Err(Error::NonFinite);
    }
    if norm_sq(&pc.y).sqrt() <= T::lit(T::SINGULAR) {
        return Err(Error::ZeroY);
    }
    let z = (to_complex(&pc.y) * T::half()).sqrt().conj();
    let w = (to_complex(&pc.x) * z).conj();
    Ok(ComplexPair { w: from_complex(w), z: from_complex(z) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftDirection {
    /// Regularized coordinates (heavy primary at the origin) to the
    /// rotating frame (heavy primary at `(−μ, 0)`).
    RegToFrame,
    FrameToReg,
}

/// Translation by `μ` along the first axis.
pub fn shift_t_mu<T: Real>(q: Vec2<T>, mu: T, direction: ShiftDirection) -> Vec2<T> {
    match direction {
        ShiftDirection::RegToFrame => [q[0] - mu, q[1]],
        ShiftDirection::FrameToReg => [q[0] + mu, q[1]],
    }
}
