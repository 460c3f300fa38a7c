//! The Ligon-Schaaf map between Kepler phase space and the cotangent bundle
//! of the 3-sphere (negative energy) or of the hyperboloid (positive energy).
//!
//! The forward map factors as `F = F2 ∘ F1`: an algebraic part producing
//! `(r, s)` followed by a rescaled rotation by the angle `φ = −s0`. The
//! inverse undoes the rotation after recovering the same `φ` from the
//! generalized Kepler equation, then inverts the algebraic part. The fused
//! single-step formulas are provided as an independent route.

use crate::error::{Error, Result};
use crate::kepler_eq::{solve_elliptic, solve_hyperbolic};
use crate::linalg::{lincomb, norm, norm_sq, scale, Vec3, Vec4};
use crate::scalar::Real;
use crate::state::{CartesianState, EnergySign, RsState, SphereState};

#[inline]
fn split<T: Real>(v: &Vec4<T>) -> (T, Vec3<T>) {
    (v[0], [v[1], v[2], v[3]])
}

#[inline]
fn join<T: Real>(head: T, tail: &Vec3<T>) -> Vec4<T> {
    [head, tail[0], tail[1], tail[2]]
}

/// `q/|q| − (q·p) p`
#[inline]
fn radial_part<T: Real>(state: &CartesianState<T>) -> Vec3<T> {
    let r = state.radius();
    lincomb(&state.q, r.recip(), &state.p, -state.q_dot_p())
}

/// Algebraic factor `F1`.
pub fn forward_f1<T: Real>(state: &CartesianState<T>) -> Result<RsState<T>> {
    state.validate()?;
    let h = state.energy();
    let sign = EnergySign::of_energy(h)?;
    let k = (T::two() * h).abs().sqrt();
    let radius = state.radius();
    let r0 = norm_sq(&state.p) * radius - T::one();
    let r = scale(&state.p, k * radius);
    let s0 = -k * state.q_dot_p();
    let s = match sign {
        EnergySign::Negative => scale(&radial_part(state), -T::one()),
        EnergySign::Positive => radial_part(state),
    };
    Ok(RsState { r: join(r0, &r), s: join(s0, &s), sign })
}

/// Rescaled rotation `F2` by `φ = −s0`.
pub fn forward_f2<T: Real>(rs: &RsState<T>, energy: T) -> Result<SphereState<T>> {
    if EnergySign::of_energy(energy)? != rs.sign {
        return Err(Error::EnergySignMismatch);
    }
    let k = (T::two() * energy).abs().sqrt();
    let phi = -rs.s[0];
    let (xi, eta) = match rs.sign {
        EnergySign::Negative => {
            let (sn, cs) = phi.sin_cos();
            (
                lincomb(&rs.r, cs, &rs.s, -sn),
                lincomb(&rs.s, cs / k, &rs.r, sn / k),
            )
        }
        EnergySign::Positive => {
            let (sh, ch) = (phi.sinh(), phi.cosh());
            (
                lincomb(&rs.r, ch, &rs.s, sh),
                lincomb(&rs.s, -ch / k, &rs.r, -sh / k),
            )
        }
    };
    Ok(SphereState { xi, eta, sign: rs.sign, angle: Some(phi) })
}

/// Forward map `F = F2 ∘ F1`; the returned state carries `φ` in `angle`.
pub fn forward<T: Real>(state: &CartesianState<T>) -> Result<SphereState<T>> {
    let rs = forward_f1(state)?;
    forward_f2(&rs, state.energy())
}

/// Forward map evaluated from the single-step formulas.
pub fn forward_fused<T: Real>(state: &CartesianState<T>) -> Result<SphereState<T>> {
    state.validate()?;
    let h = state.energy();
    let sign = EnergySign::of_energy(h)?;
    let k = (T::two() * h).abs().sqrt();
    let radius = state.radius();
    let qp = state.q_dot_p();
    let a = norm_sq(&state.p) * radius - T::one();
    let phi = k * qp;
    let radial = radial_part(state);
    let (xi, eta) = match sign {
        EnergySign::Negative => {
            let (sn, cs) = phi.sin_cos();
            let xi0 = a * cs + k * qp * sn;
            let xi = lincomb(&state.p, k * radius * cs, &radial, sn);
            let eta0 = -qp * cs + a * sn / k;
            let eta = lincomb(&radial, -cs / k, &state.p, radius * sn);
            (join(xi0, &xi), join(eta0, &eta))
        }
        EnergySign::Positive => {
            let (sh, ch) = (phi.sinh(), phi.cosh());
            let xi0 = a * ch - k * qp * sh;
            let xi = lincomb(&state.p, k * radius * ch, &radial, sh);
            let eta0 = qp * ch - a * sh / k;
            let eta = lincomb(&radial, -ch / k, &state.p, -radius * sh);
            (join(xi0, &xi), join(eta0, &eta))
        }
    };
    Ok(SphereState { xi, eta, sign, angle: Some(phi) })
}

/// Normalizer of `eta` for the branch, validated to be usable.
fn eta_scale<T: Real>(sp: &SphereState<T>) -> Result<T> {
    if !sp.is_finite() {
        return Err(Error::NonFinite);
    }
    let eta_sq = sp.eta_sq();
    match sp.sign {
        EnergySign::Negative if eta_sq > T::zero() => Ok(eta_sq.sqrt()),
        EnergySign::Positive if eta_sq < T::zero() => Ok((-eta_sq).sqrt()),
        _ if eta_sq == T::zero() => Err(Error::ZeroEnergy),
        _ => Err(Error::EnergySignMismatch),
    }
}

/// Solves the generalized Kepler equation for the rotation angle of `sp`.
pub fn recover_angle<T: Real>(sp: &SphereState<T>) -> Result<T> {
    let n = eta_scale(sp)?;
    let b = sp.eta[0] / n;
    let root = match sp.sign {
        EnergySign::Negative => solve_elliptic(sp.xi[0], b)?,
        EnergySign::Positive => solve_hyperbolic(sp.xi[0], b)?,
    };
    Ok(root.phi)
}

/// Inverse rotation `G2`; also returns the recovered angle.
pub fn inverse_g2<T: Real>(sp: &SphereState<T>) -> Result<(RsState<T>, T)> {
    let n = eta_scale(sp)?;
    let phi = recover_angle(sp)?;
    let unit_eta = scale(&sp.eta, n.recip());
    let (r, s) = match sp.sign {
        EnergySign::Negative => {
            let (sn, cs) = phi.sin_cos();
            (
                lincomb(&sp.xi, cs, &unit_eta, sn),
                lincomb(&sp.xi, -sn, &unit_eta, cs),
            )
        }
        EnergySign::Positive => {
            let (sh, ch) = (phi.sinh(), phi.cosh());
            (
                lincomb(&sp.xi, ch, &unit_eta, sh),
                lincomb(&sp.xi, -sh, &unit_eta, -ch),
            )
        }
    };
    // 1 − r0 = −2H|q|
    if (T::one() - r[0]).abs() <= T::lit(T::SINGULAR) {
        return Err(Error::DegenerateDenominator);
    }
    Ok((RsState { r, s, sign: sp.sign }, phi))
}

/// Inverse algebraic factor `G1`.
pub fn inverse_g1<T: Real>(rs: &RsState<T>, energy: T) -> Result<CartesianState<T>> {
    if EnergySign::of_energy(energy)? != rs.sign {
        return Err(Error::EnergySignMismatch);
    }
    let (r0, r) = split(&rs.r);
    let (s0, s) = split(&rs.s);
    let gap = T::one() - r0;
    if gap.abs() <= T::lit(T::SINGULAR) {
        return Err(Error::DegenerateDenominator);
    }
    let k = (T::two() * energy).abs().sqrt();
    let two_h = T::two() * energy;
    let (q, p) = match rs.sign {
        EnergySign::Negative => (
            lincomb(&s, gap / two_h, &r, s0 / two_h),
            scale(&r, k / gap),
        ),
        EnergySign::Positive => (
            lincomb(&s, -gap / two_h, &r, -s0 / two_h),
            scale(&r, -k / gap),
        ),
    };
    CartesianState::new(q, p)
}

/// Inverse map `G = G1 ∘ G2`.
pub fn inverse<T: Real>(sp: &SphereState<T>) -> Result<CartesianState<T>> {
    let (rs, _) = inverse_g2(sp)?;
    inverse_g1(&rs, sp.energy())
}

/// Inverse map from the single-step formulas.
pub fn inverse_fused<T: Real>(sp: &SphereState<T>) -> Result<CartesianState<T>> {
    let n = eta_scale(sp)?;
    let phi = recover_angle(sp)?;
    let eta_sq = sp.eta_sq();
    let b = sp.eta[0] / n;
    let (xi0, xi) = split(&sp.xi);
    let (_, eta) = split(&sp.eta);
    let unit_eta = scale(&eta, n.recip());
    let (q, p) = match sp.sign {
        EnergySign::Negative => {
            let (sn, cs) = phi.sin_cos();
            let denom = n * (T::one() - xi0 * cs - b * sn);
            if denom.abs() <= T::lit(T::SINGULAR) * n {
                return Err(Error::DegenerateDenominator);
            }
            (
                lincomb(&xi, -eta_sq * (b - sn), &unit_eta, eta_sq * (xi0 - cs)),
                lincomb(&xi, cs / denom, &unit_eta, sn / denom),
            )
        }
        EnergySign::Positive => {
            let (sh, ch) = (phi.sinh(), phi.cosh());
            let denom = n * (T::one() - xi0 * ch - b * sh);
            if denom.abs() <= T::lit(T::SINGULAR) * n {
                return Err(Error::DegenerateDenominator);
            }
            (
                lincomb(&xi, -eta_sq * (b + sh), &unit_eta, eta_sq * (xi0 - ch)),
                lincomb(&xi, -ch / denom, &unit_eta, -sh / denom),
            )
        }
    };
    CartesianState::new(q, p)
}

/// Largest componentwise gap between two sphere states.
pub fn sphere_distance<T: Real>(a: &SphereState<T>, b: &SphereState<T>) -> T {
    crate::linalg::max_abs_diff(&a.xi, &b.xi).max(crate::linalg::max_abs_diff(&a.eta, &b.eta))
}

/// Cauchy-Schwarz bound `xi0² + (eta0/|eta|)² ≤ 1` on negative-energy images,
/// which keeps the elliptic root solve inside the unit disk.
pub fn kepler_argument_radius<T: Real>(sp: &SphereState<T>) -> T {
    let n = norm(&sp.eta);
    sp.xi[0].hypot(sp.eta[0] / n)
}

/// `1 − xi0 cos φ − (eta0/|eta|) sin φ`, the inverse-map denominator.
pub fn inverse_denominator<T: Real>(sp: &SphereState<T>, phi: T) -> T {
    let n = sp.eta_scale();
    let b = sp.eta[0] / n;
    match sp.sign {
        EnergySign::Negative => T::one() - sp.xi[0] * phi.cos() - b * phi.sin(),
        EnergySign::Positive => T::one() - sp.xi[0] * phi.cosh() - b * phi.sinh(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular() -> CartesianState<f64> {
        CartesianState::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap()
    }

    fn radial_hyperbolic() -> CartesianState<f64> {
        CartesianState::new([1.0, 0.0, 0.0], [3f64.sqrt(), 0.0, 0.0]).unwrap()
    }

    fn close<const N: usize>(a: &[f64; N], b: &[f64; N], tol: f64) -> bool {
        crate::linalg::max_abs_diff(a, b) < tol
    }

    #[test]
    fn f1_circular() {
        let rs = forward_f1(&circular()).unwrap();
        assert!(close(&rs.r, &[0.0, 0.0, 1.0, 0.0], 1e-15));
        assert!(close(&rs.s, &[0.0, -1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn f1_eccentric() {
        let s = CartesianState::new([2.0f64, 0.0, 0.0], [0.1, 0.5, 0.0]).unwrap();
        let rs = forward_f1(&s).unwrap();
        assert!((rs.s[0] + 0.74f64.sqrt() * 0.2).abs() < 1e-15);
        assert!((rs.s[0] + 0.172046).abs() < 1e-6);
    }

    #[test]
    fn f1_positive_branch_sign() {
        let rs = forward_f1(&radial_hyperbolic()).unwrap();
        assert_eq!(rs.sign, EnergySign::Positive);
        assert!((rs.r[0] - 2.0).abs() < 1e-14);
        assert!((rs.s[0] + 3f64.sqrt()).abs() < 1e-14);
        // s = +(q/|q| − (q·p)p) = (1 − 3, 0, 0)
        assert!(close(&rs.s, &[-(3f64.sqrt()), -2.0, 0.0, 0.0], 1e-14));
    }

    #[test]
    fn f2_circular_is_pure_scaling() {
        let rs = forward_f1(&circular()).unwrap();
        let sp = forward_f2(&rs, -0.5).unwrap();
        assert!(close(&sp.xi, &[0.0, 0.0, 1.0, 0.0], 1e-15));
        assert!(close(&sp.eta, &[0.0, -1.0, 0.0, 0.0], 1e-15));
        assert_eq!(sp.angle, Some(0.0));
    }

    #[test]
    fn f2_zero_angle() {
        let rs = RsState {
            r: [0.2, 0.3, 0.4, 0.5],
            s: [0.0, 0.6, -0.1, 0.2],
            sign: EnergySign::Negative,
        };
        let h = -0.125;
        let k = (-2.0 * h as f64).sqrt();
        let sp = forward_f2(&rs, h).unwrap();
        assert!(close(&sp.xi, &rs.r, 1e-15));
        assert!(sp.eta[0].abs() < 1e-15);
        assert!(close(&sp.eta, &[0.0, 0.6 / k, -0.1 / k, 0.2 / k], 1e-15));
    }

    #[test]
    fn f2_rejects_wrong_branch() {
        let rs = forward_f1(&circular()).unwrap();
        assert_eq!(forward_f2(&rs, 0.5), Err(Error::EnergySignMismatch));
    }

    #[test]
    fn hyperbolic_forward_values() {
        let sp = forward(&radial_hyperbolic()).unwrap();
        assert!((sp.xi[0] - 1.0875).abs() < 1e-3, "{:?}", sp);
        let b = sp.eta[0] / sp.eta_scale();
        assert!((b + 0.4275).abs() < 1e-3);
        assert!((sp.angle.unwrap() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eccentric_forward_values() {
        let s = CartesianState::new([2.0f64, 0.0, 0.0], [0.1, 0.5, 0.0]).unwrap();
        let sp = forward(&s).unwrap();
        assert!((sp.xi[0] + 0.44346).abs() < 1e-5);
        assert!((sp.eta_sq() - 1.0 / 0.74).abs() < 1e-13);
        let fused = forward_fused(&s).unwrap();
        assert!(sphere_distance(&sp, &fused) < 1e-14);
    }

    #[test]
    fn g2_at_zero_angle() {
        let sp = forward(&circular()).unwrap();
        let (rs, phi) = inverse_g2(&sp).unwrap();
        assert_eq!(phi, 0.0);
        assert!(close(&rs.r, &[0.0, 0.0, 1.0, 0.0], 1e-15));
        assert!(close(&rs.s, &[0.0, -1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn round_trips() {
        for s in [circular(), radial_hyperbolic()] {
            let sp = forward(&s).unwrap();
            for back in [inverse(&sp).unwrap(), inverse_fused(&sp).unwrap()] {
                assert!(close(&back.q, &s.q, 1e-13), "{back:?}");
                assert!(close(&back.p, &s.p, 1e-13), "{back:?}");
            }
        }
    }

    #[test]
    fn north_pole_is_degenerate() {
        let sp = SphereState::new([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], EnergySign::Negative);
        assert_eq!(inverse(&sp), Err(Error::DegenerateDenominator));
        assert_eq!(inverse_fused(&sp), Err(Error::DegenerateDenominator));
    }

    #[test]
    fn forward_errors() {
        let parabolic = CartesianState::new([2.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(forward(&parabolic), Err(Error::ZeroEnergy));
        let collision = CartesianState { q: [0.0; 3], p: [1.0, 0.0, 0.0] };
        assert_eq!(forward(&collision), Err(Error::CollisionState));
    }

    #[test]
    fn single_precision_round_trip() {
        let s = CartesianState::new([1.2f32, 0.3, -0.2], [0.1, 0.8, 0.3]).unwrap();
        let back = inverse(&forward(&s).unwrap()).unwrap();
        assert!(crate::linalg::max_abs_diff(&back.q, &s.q) < 1e-4);
        assert!(crate::linalg::max_abs_diff(&back.p, &s.p) < 1e-4);
    }
}
