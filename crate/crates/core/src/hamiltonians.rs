//! Kepler, rotating Kepler and circular restricted three-body Hamiltonians,
//! their pull-back to Levi-Civita variables, and the L1 point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sq, Vec2};
use crate::ls_map::inverse;
use crate::projections::{levi_civita_forward, shift_t_mu, stereo_forward, ComplexPair, ShiftDirection};
use crate::scalar::Real;
use crate::state::SphereState;

/// Mass ratio `μ ∈ [0, 1/2]` of the light primary.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MassRatio<T>(T);

impl<T: Real> MassRatio<T> {
    pub fn new(mu: T) -> Result<Self> {
        if mu.is_finite() && mu >= T::zero() && mu <= T::half() {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidMassRatio)
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Heavy primary `e = (−μ, 0)`.
    pub fn heavy(self) -> Vec2<T> {
        [-self.0, T::zero()]
    }

    /// Light primary `m = (1 − μ, 0)`.
    pub fn light(self) -> Vec2<T> {
        [T::one() - self.0, T::zero()]
    }
}

fn distance<T: Real>(a: &Vec2<T>, b: &Vec2<T>) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `−1/(2X²)` with `X = |w|² + |z|²`.
pub fn eval_hk<T: Real>(cp: &ComplexPair<T>) -> Result<T> {
    let x = cp.norm_sq();
    if !(x > T::zero()) {
        return Err(if x.is_nan() { Error::NonFinite } else { Error::ZeroPoint });
    }
    Ok(-(T::two() * x * x).recip())
}

/// `−1/(2X²) + 2(w1 z2 − w2 z1)`.
pub fn eval_hr<T: Real>(cp: &ComplexPair<T>) -> Result<T> {
    Ok(eval_hk(cp)? + T::two() * cp.wedge())
}

/// Restricted three-body Hamiltonian in the rotating frame,
/// `|p|²/2 − μ/|q − m| − (1 − μ)/|q − e| + (p1 q2 − p2 q1)`.
pub fn eval_hc<T: Real>(q: &Vec2<T>, p: &Vec2<T>, mu: MassRatio<T>) -> Result<T> {
    let m = mu.value();
    let d_heavy = distance(q, &mu.heavy());
    let d_light = distance(q, &mu.light());
    let tiny = T::lit(T::SINGULAR);
    // a massless light primary contributes nothing and is not a singularity
    if d_heavy <= tiny || (m > T::zero() && d_light <= tiny) {
        return Err(Error::PrimaryCollision);
    }
    let light = if m > T::zero() { m / d_light } else { T::zero() };
    Ok(norm_sq(p) * T::half() - light - (T::one() - m) / d_heavy + (p[0] * q[1] - p[1] * q[0]))
}

/// Value of the restricted Hamiltonian at rest in the rotating frame.
pub fn rest_energy<T: Real>(q: &Vec2<T>, mu: MassRatio<T>) -> Result<T> {
    eval_hc(q, &[-q[1], q[0]], mu)
}

/// `−1/(2|eta|²)` on the negative-energy branch.
pub fn delaunay_energy<T: Real>(sp: &SphereState<T>) -> T {
    -(T::two() * norm_sq(&sp.eta)).recip()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangePointL1<T> {
    pub position: Vec2<T>,
    pub energy: T,
    pub dist_heavy: T,
}

/// Collinear point between the primaries where the effective potential is
/// critical, located by sign scan and bisection.
pub fn locate_l1<T: Real>(mu: MassRatio<T>) -> LagrangePointL1<T> {
    let m = mu.value();
    if m == T::zero() {
        return LagrangePointL1 {
            position: [T::one(), T::zero()],
            energy: T::lit(-1.5),
            dist_heavy: T::one(),
        };
    }
    let one = T::one();
    let slope = |x: T| -x - m / (one - m - x).powi(2) + (one - m) / (x + m).powi(2);

    let delta = T::lit(1e-6);
    let (lo, hi) = (-m + delta, one - m - delta);
    let samples = 10_000;
    let at = |k: usize| lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(samples).unwrap();
    // last sign change, i.e. the critical point nearest the light primary
    let mut bracket = (lo, hi);
    let mut prev = slope(lo);
    for k in 1..=samples {
        let x = at(k);
        let f = slope(x);
        if prev > T::zero() && f <= T::zero() {
            bracket = (at(k - 1), x);
        }
        prev = f;
    }

    let (mut a, mut b) = bracket;
    let tol = T::lit(1e-14).max(T::epsilon());
    for _ in 0..200 {
        let mid = (a + b) * T::half();
        if b - a <= tol || mid <= a || mid >= b {
            break;
        }
        if slope(mid) > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let x = if slope(b) == T::zero() { b } else { (a + b) * T::half() };
    let position = [x, T::zero()];
    let energy = -x * x * T::half() - m / (one - m - x) - (one - m) / (x + m);
    LagrangePointL1 { position, energy, dist_heavy: x + m }
}

/// One evaluation of the restricted Hamiltonian through the
/// Levi-Civita / stereographic / inverse Ligon-Schaaf chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainEvaluation<T> {
    pub energy: T,
    /// Position in the rotating frame.
    pub q: Vec2<T>,
    pub p: Vec2<T>,
    /// Distance to the heavy primary in units of its distance to L1.
    pub rdhp: T,
}

/// Restricted problem for a fixed mass ratio, with L1 cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedProblem<T> {
    pub mu: MassRatio<T>,
    pub l1: LagrangePointL1<T>,
}

impl<T: Real> RestrictedProblem<T> {
    pub fn new(mu: T) -> Result<Self> {
        let mu = MassRatio::new(mu)?;
        Ok(Self { mu, l1: locate_l1(mu) })
    }

    /// Pulls `(q, p)` back from `(w, z)` and evaluates the restricted
    /// Hamiltonian there.
    pub fn eval_hx(&self, cp: &ComplexPair<T>) -> Result<ChainEvaluation<T>> {
        let (q_reg, p) = pull_back(cp)?;
        let q = shift_t_mu(q_reg, self.mu.value(), ShiftDirection::RegToFrame);
        let energy = eval_hc(&q, &p, self.mu)?;
        Ok(ChainEvaluation {
            energy,
            q,
            p,
            rdhp: norm(&q_reg) / self.l1.dist_heavy,
        })
    }
}

/// Planar `(q, p)` centered on the regularized collision point.
pub fn pull_back<T: Real>(cp: &ComplexPair<T>) -> Result<(Vec2<T>, Vec2<T>)> {
    let pc = levi_civita_forward(cp)?;
    let sp = stereo_forward(&pc)?;
    let state = inverse(&sp)?;
    Ok(([state.q[0], state.q[1]], [state.p[0], state.p[1]]))
}

/// Convenience wrapper for a single evaluation.
pub fn eval_hx<T: Real>(cp: &ComplexPair<T>, mu: T) -> Result<ChainEvaluation<T>> {
    RestrictedProblem::new(mu)?.eval_hx(cp)
}
