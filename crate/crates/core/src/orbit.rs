//! Bound Kepler orbits propagated exactly: map to `T*S³`, follow the
//! great-circle Delaunay flow, map back. Classical elements and Delaunay
//! variables are extracted from `(q, p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cross, lincomb, norm, scale, signed_angle, wrap_two_pi, Vec3};
use crate::ls_map::{forward, inverse};
use crate::scalar::Real;
use crate::state::{CartesianState, EnergySign, SphereState};

/// Kepler's third law: `2π (−2H)^(−3/2)`.
pub fn period<T: Real>(energy: T) -> Result<T> {
    if !(energy < T::zero()) {
        return Err(Error::NonNegativeEnergy);
    }
    Ok(T::TAU() * (-T::two() * energy).powf(T::lit(-1.5)))
}

/// Flow of `−1/(2|eta|²)` for time `t`: rotation in the `(xi, eta/|eta|)`
/// plane at rate `|eta|⁻³`.
pub fn delaunay_flow<T: Real>(sp: &SphereState<T>, t: T) -> Result<SphereState<T>> {
    if sp.sign != EnergySign::Negative {
        return Err(Error::NonNegativeEnergy);
    }
    let n = norm(&sp.eta);
    if !(n > T::zero()) {
        return Err(Error::ZeroEnergy);
    }
    let (s, c) = (t / (n * n * n)).sin_cos();
    Ok(SphereState::new(
        lincomb(&sp.xi, c, &sp.eta, s / n),
        lincomb(&sp.xi, -n * s, &sp.eta, c),
        EnergySign::Negative,
    ))
}

/// State after time `t`.
pub fn propagate<T: Real>(state: &CartesianState<T>, t: T) -> Result<CartesianState<T>> {
    state.validate()?;
    if !(state.energy() < T::zero()) {
        return Err(Error::NonNegativeEnergy);
    }
    inverse(&delaunay_flow(&forward(state)?, t)?)
}

/// Classical elements; angles in radians, `tau` is the time of the most
/// recent pericenter passage relative to the epoch of the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements<T> {
    pub a: T,
    pub e: T,
    pub i: T,
    #[serde(rename = "Omega")]
    pub raan: T,
    pub omega: T,
    pub tau: T,
}

/// Delaunay action-angle variables `(ℓ, g, h, L, G, H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaunayElements<T> {
    pub ell: T,
    pub g: T,
    pub h: T,
    #[serde(rename = "L")]
    pub lc: T,
    #[serde(rename = "G")]
    pub gc: T,
    #[serde(rename = "H")]
    pub hc: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anomalies<T> {
    #[serde(rename = "true")]
    pub true_anomaly: T,
    pub eccentric: T,
    pub mean: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementSet<T> {
    pub orbital: OrbitalElements<T>,
    pub delaunay: DelaunayElements<T>,
    pub anomalies: Anomalies<T>,
}

/// Threshold below which inclination or eccentricity is treated as zero.
const DEGENERATE: f64 = 1e-12;

/// Classical eccentricity vector `p × L − q/|q|`.
pub fn eccentricity_vector<T: Real>(state: &CartesianState<T>) -> Vec3<T> {
    let l = state.angular_momentum();
    let q = &state.q;
    lincomb(&cross(&state.p, &l), T::one(), q, -state.radius().recip())
}

pub fn elements<T: Real>(state: &CartesianState<T>) -> Result<ElementSet<T>> {
    state.validate()?;
    let energy = state.energy();
    if !(energy < T::zero()) {
        return Err(Error::NonNegativeEnergy);
    }
    let tiny = T::lit(DEGENERATE);
    let (zero, one) = (T::zero(), T::one());
    let a = -(T::two() * energy).recip();
    let l = state.angular_momentum();
    let l_norm = norm(&l);
    let axis = if l_norm > tiny { scale(&l, l_norm.recip()) } else { [zero, zero, one] };
    let ecc = eccentricity_vector(state);
    let e = norm(&ecc);

    let i = if l_norm > tiny { (l[2] / l_norm).max(-one).min(one).acos() } else { zero };
    let node_vec = [-l[1], l[0], zero];
    let node_norm = norm(&node_vec);
    let (raan, node) = if i.sin().abs() < tiny || node_norm <= tiny * l_norm.max(one) {
        (zero, [one, zero, zero])
    } else {
        (wrap_two_pi(node_vec[1].atan2(node_vec[0])), scale(&node_vec, node_norm.recip()))
    };
    let (omega, true_anomaly) = if e < tiny {
        (zero, wrap_two_pi(signed_angle(&node, &state.q, &axis)))
    } else {
        (
            wrap_two_pi(signed_angle(&node, &ecc, &axis)),
            wrap_two_pi(signed_angle(&ecc, &state.q, &axis)),
        )
    };

    let half = true_anomaly * T::half();
    let eccentric = wrap_two_pi(
        T::two() * ((one - e).max(zero).sqrt() * half.sin()).atan2((one + e).sqrt() * half.cos()),
    );
    let mean = wrap_two_pi(eccentric - e * eccentric.sin());
    let motion = T::TAU() / period(energy)?;

    Ok(ElementSet {
        orbital: OrbitalElements { a, e, i, raan, omega, tau: -mean / motion },
        delaunay: DelaunayElements {
            ell: mean,
            g: omega,
            h: raan,
            lc: a.sqrt(),
            gc: l_norm,
            hc: l[2],
        },
        anomalies: Anomalies { true_anomaly, eccentric, mean },
    })
}
