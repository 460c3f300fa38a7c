//! Residual checks for the algebraic identities linking `(q, p)`, the
//! intermediate `(r, s)` and the sphere image `(xi, eta)`.

use serde::Serialize;

use crate::error::Result;
use crate::hamiltonians::{eval_hk, eval_hr};
use crate::linalg::{cross, max_abs_diff, Vec3, Vec4};
use crate::ls_map::{forward_f1, forward_f2, inverse};
use crate::projections::{levi_civita_forward, stereo_forward, ComplexPair};
use crate::scalar::Real;
use crate::state::{CartesianState, EnergySign};

/// One evaluated identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual<T> {
    pub name: &'static str,
    pub residual: T,
}

/// Residuals of every identity for one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport<T> {
    pub sign: EnergySign,
    pub tolerance: T,
    pub entries: Vec<IdentityResidual<T>>,
}

impl<T: Real> IdentityReport<T> {
    pub fn max_residual(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, e| acc.max(e.residual))
    }

    /// Entries above tolerance (NaN counts as a failure).
    pub fn failures(&self) -> Vec<&IdentityResidual<T>> {
        self.entries
            .iter()
            .filter(|e| !(e.residual <= self.tolerance))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

fn spatial_wedge<T: Real>(a: &Vec4<T>, b: &Vec4<T>) -> Vec3<T> {
    cross(&[a[1], a[2], a[3]], &[b[1], b[2], b[3]])
}

fn time_wedge<T: Real>(a: &Vec4<T>, b: &Vec4<T>) -> Vec3<T> {
    std::array::from_fn(|i| a[0] * b[i + 1] - a[i + 1] * b[0])
}

/// Verifies the identities with the default tolerance `1e-10·max(1, |eta²|)`.
pub fn verify_identities<T: Real>(state: &CartesianState<T>) -> Result<IdentityReport<T>> {
    verify_identities_with(state, T::lit(T::IDENTITY_TOL))
}

/// Verifies the identities; `base_tol` is scaled by `max(1, |eta²|)`.
pub fn verify_identities_with<T: Real>(
    state: &CartesianState<T>,
    base_tol: T,
) -> Result<IdentityReport<T>> {
    let rs = forward_f1(state)?;
    let h = state.energy();
    let sp = forward_f2(&rs, h)?;
    let sign = rs.sign;
    let one = T::one();
    let k = (T::two() * h).abs().sqrt();
    let phi = -rs.s[0];
    let n = sp.eta_scale();
    let b = sp.eta[0] / n;
    let radius = state.radius();

    // (r, s) enter the conserved quantities with factor ±1/k.
    let rs_factor = match sign {
        EnergySign::Negative => k.recip(),
        EnergySign::Positive => -k.recip(),
    };
    let (s_norm, angle_rhs, gap_rhs) = match sign {
        EnergySign::Negative => (
            one,
            sp.xi[0] * phi.sin() - b * phi.cos(),
            one - sp.xi[0] * phi.cos() - b * phi.sin(),
        ),
        EnergySign::Positive => (
            -one,
            sp.xi[0] * phi.sinh() + b * phi.cosh(),
            one - sp.xi[0] * phi.cosh() - b * phi.sinh(),
        ),
    };

    let l = state.angular_momentum();
    let m = state.rescaled_runge_lenz();
    let l_rs = spatial_wedge(&rs.r, &rs.s).map(|v| v * rs_factor);
    let m_rs = time_wedge(&rs.r, &rs.s).map(|v| v * rs_factor);
    let l_sp = sp.angular_momentum();
    let m_sp = sp.runge_lenz();
    let delaunay = sp.energy();
    let (q, p) = (&state.q, &state.p);
    let rotating = h + q[1] * p[0] - q[0] * p[1];
    let rotating_rs = h + rs_factor * (rs.r[2] * rs.s[1] - rs.r[1] * rs.s[2]);
    let rotating_sp = delaunay + sp.xi[2] * sp.eta[1] - sp.xi[1] * sp.eta[2];

    let entries = vec![
        ("r.r = ±1", (rs.r_sq() - one).abs()),
        ("r.s = 0", rs.r_dot_s().abs()),
        ("s.s = ±1", (rs.s_sq() - s_norm).abs()),
        ("xi.xi = 1", (sp.xi_sq() - one).abs()),
        ("xi.eta = 0", sp.xi_dot_eta().abs()),
        ("eta.eta = -1/(2H)", (sp.eta_sq() + (T::two() * h).recip()).abs()),
        ("phi = k q.p = -s0", (k * state.q_dot_p() + rs.s[0]).abs()),
        ("phi = Kepler equation", (phi - angle_rhs).abs()),
        ("-2H|q| = 1 - r0", (-T::two() * h * radius - (one - rs.r[0])).abs()),
        ("1 - r0 from xi, eta", ((one - rs.r[0]) - gap_rhs).abs()),
        ("L from r, s", max_abs_diff(&l, &l_rs)),
        ("L from xi, eta", max_abs_diff(&l, &l_sp)),
        ("M from r, s", max_abs_diff(&m, &m_rs)),
        ("M from xi, eta", max_abs_diff(&m, &m_sp)),
        ("H = -1/(2 eta^2)", (h - delaunay).abs()),
        ("rotating H from r, s", (rotating - rotating_rs).abs()),
        ("rotating H from xi, eta", (rotating - rotating_sp).abs()),
    ]
    .into_iter()
    .map(|(name, residual)| IdentityResidual { name, residual })
    .collect();

    Ok(IdentityReport {
        sign,
        tolerance: base_tol * one.max(sp.eta_sq().abs()),
        entries,
    })
}

/// Identities along the chain `(w, z) → (x, y) → (xi, eta) → (q, p)`:
/// the sphere constraints, `|eta| = X`, the three forms of the planar
/// angular momentum, and the Kepler and rotating Kepler energies.
///
/// Energy residuals are relative to `max(1, |H|)`.
pub fn verify_chain<T: Real>(cp: &ComplexPair<T>) -> Result<IdentityReport<T>> {
    verify_chain_with(cp, T::lit(T::IDENTITY_TOL))
}

pub fn verify_chain_with<T: Real>(cp: &ComplexPair<T>, tolerance: T) -> Result<IdentityReport<T>> {
    let one = T::one();
    let pc = levi_civita_forward(cp)?;
    let sp = stereo_forward(&pc)?;
    let state = inverse(&sp)?;
    let x = cp.norm_sq();
    let twice_wedge = T::two() * cp.wedge();
    let (xv, yv) = (&pc.x, &pc.y);
    let planar = xv[0] * yv[1] - xv[1] * yv[0];
    let sphere = sp.xi[1] * sp.eta[2] - sp.xi[2] * sp.eta[1];
    let lz = state.angular_momentum()[2];

    let hk = eval_hk(cp)?;
    let hr = eval_hr(cp)?;
    let rel = |a: T, b: T| (a - b).abs() / one.max(b.abs());

    let entries = vec![
        ("xi.xi = 1", (sp.xi_sq() - one).abs()),
        ("xi.eta = 0", sp.xi_dot_eta().abs()),
        ("eta.eta = X^2", (sp.eta_sq() - x * x).abs() / one.max(x * x)),
        ("x^y = -2 w^z", (planar + twice_wedge).abs()),
        ("xi^eta = -2 w^z", (sphere + twice_wedge).abs()),
        ("q^p = -2 w^z", (lz + twice_wedge).abs()),
        ("H_K = -1/(2 eta^2)", rel(sp.energy(), hk)),
        ("H_K from q, p", rel(state.energy(), hk)),
        ("H_R from xi, eta", rel(sp.energy() - sphere, hr)),
        ("H_R from q, p", rel(state.energy() - lz, hr)),
    ]
    .into_iter()
    .map(|(name, residual)| IdentityResidual { name, residual })
    .collect();

    Ok(IdentityReport { sign: EnergySign::Negative, tolerance, entries })
}
