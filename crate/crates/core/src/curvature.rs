//! Tangential Gauss-Kronecker curvature of a Hamiltonian on `R⁴ = C²`.
//!
//! The gradient `G` is read as a quaternion; `Gi, Gj, Gk` span the tangent
//! space of the level set and the curvature is the determinant of the
//! Hessian restricted to that basis. Derivatives come either from closed
//! forms (Kepler and rotating Kepler) or from central differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{eval_hk, eval_hr, RestrictedProblem};
use crate::linalg::{det3, norm, Mat3, Mat4, Vec4};
use crate::projections::ComplexPair;
use crate::scalar::Real;

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeMode {
    /// Closed forms where available, otherwise central differences.
    Analytic,
    #[default]
    Numeric,
    /// Central differences extrapolated from steps `h` and `h/2`.
    Richardson,
}

/// A smooth function on `(w1, w2, z1, z2)`.
pub trait Hamiltonian<T: Real>: Sync {
    fn value(&self, x: &Vec4<T>) -> Result<T>;

    /// Closed-form gradient and Hessian, if known.
    fn analytic(&self, _x: &Vec4<T>) -> Option<(Vec4<T>, Mat4<T>)> {
        None
    }
}

impl<T: Real, F> Hamiltonian<T> for F
where
    F: Fn(&Vec4<T>) -> Result<T> + Sync,
{
    fn value(&self, x: &Vec4<T>) -> Result<T> {
        self(x)
    }
}

/// `−1/(2X²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kepler;

/// `−1/(2X²) + 2(w1 z2 − w2 z1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RotatingKepler;

/// Restricted three-body Hamiltonian pulled back through the chain.
#[derive(Debug, Clone, Copy)]
pub struct Restricted<T>(pub RestrictedProblem<T>);

impl<T: Real> Hamiltonian<T> for Kepler {
    fn value(&self, x: &Vec4<T>) -> Result<T> {
        eval_hk(&ComplexPair::from_array(*x))
    }

    fn analytic(&self, x: &Vec4<T>) -> Option<(Vec4<T>, Mat4<T>)> {
        Some((kepler_gradient(x), kepler_hessian(x)))
    }
}

impl<T: Real> Hamiltonian<T> for RotatingKepler {
    fn value(&self, x: &Vec4<T>) -> Result<T> {
        eval_hr(&ComplexPair::from_array(*x))
    }

    fn analytic(&self, x: &Vec4<T>) -> Option<(Vec4<T>, Mat4<T>)> {
        let two = T::two();
        let mut g = kepler_gradient(x);
        let dl = [x[3], -x[2], -x[1], x[0]];
        for i in 0..4 {
            g[i] = g[i] + two * dl[i];
        }
        let mut h = kepler_hessian(x);
        h[0][3] = h[0][3] + two;
        h[3][0] = h[3][0] + two;
        h[1][2] = h[1][2] - two;
        h[2][1] = h[2][1] - two;
        Some((g, h))
    }
}

impl<T: Real> Hamiltonian<T> for Restricted<T> {
    fn value(&self, x: &Vec4<T>) -> Result<T> {
        self.0.eval_hx(&ComplexPair::from_array(*x)).map(|e| e.energy)
    }
}

/// `2x/X³`
pub fn kepler_gradient<T: Real>(x: &Vec4<T>) -> Vec4<T> {
    let s = crate::linalg::norm_sq(x);
    let c = T::two() / (s * s * s);
    x.map(|v| v * c)
}

/// `2/X³ I − 12/X⁴ x xᵀ`
pub fn kepler_hessian<T: Real>(x: &Vec4<T>) -> Mat4<T> {
    let s = crate::linalg::norm_sq(x);
    let a = T::two() / (s * s * s);
    let b = T::lit(12.0) / (s * s * s * s);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { a } else { T::zero() };
            d - b * x[i] * x[j]
        })
    })
}

fn probe<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>) -> Result<T> {
    match f.value(x) {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::EvaluationFailed),
    }
}

fn steps<T: Real>(x: &Vec4<T>, rel: T) -> Vec4<T> {
    x.map(|v| rel * v.abs().max(T::one()))
}

fn gradient_with<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>, rel: T) -> Result<Vec4<T>> {
    let h = steps(x, rel);
    let mut g = [T::zero(); 4];
    for i in 0..4 {
        let (mut xp, mut xm) = (*x, *x);
        xp[i] = x[i] + h[i];
        xm[i] = x[i] - h[i];
        g[i] = (probe(f, &xp)? - probe(f, &xm)?) / (T::two() * h[i]);
    }
    Ok(g)
}

fn hessian_with<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>, rel: T) -> Result<Mat4<T>> {
    let h = steps(x, rel);
    let f0 = probe(f, x)?;
    let shifted = |i: usize, si: T, j: usize, sj: T| {
        let mut y = *x;
        y[i] = y[i] + si * h[i];
        y[j] = y[j] + sj * h[j];
        probe(f, &y)
    };
    let one = T::one();
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..4 {
        let mut yp = *x;
        let mut ym = *x;
        yp[i] = x[i] + h[i];
        ym[i] = x[i] - h[i];
        m[i][i] = (probe(f, &yp)? - T::two() * f0 + probe(f, &ym)?) / (h[i] * h[i]);
        for j in 0..i {
            let v = (shifted(i, one, j, one)? - shifted(i, one, j, -one)?
                - shifted(i, -one, j, one)?
                + shifted(i, -one, j, -one)?)
                / (T::lit(4.0) * h[i] * h[j]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(symmetrize(&m))
}

fn symmetrize<T: Real>(m: &Mat4<T>) -> Mat4<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| (m[i][j] + m[j][i]) * T::half()))
}

fn richardson<T: Real, const N: usize>(coarse: &[T; N], fine: &[T; N]) -> [T; N] {
    let three = T::lit(3.0);
    std::array::from_fn(|i| fine[i] + (fine[i] - coarse[i]) / three)
}

/// Central-difference gradient, step `1e-6·max(1, |x_i|)` in `f64`.
pub fn numeric_gradient<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>) -> Result<Vec4<T>> {
    gradient_with(f, x, T::lit(T::GRADIENT_STEP))
}

/// Central-difference Hessian, step `1e-4·max(1, |x_i|)` in `f64`.
pub fn numeric_hessian<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>) -> Result<Mat4<T>> {
    hessian_with(f, x, T::lit(T::HESSIAN_STEP))
}

/// Gradient extrapolated from steps `h` and `h/2`.
pub fn richardson_gradient<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>) -> Result<Vec4<T>> {
    let h = T::lit(T::GRADIENT_STEP);
    Ok(richardson(&gradient_with(f, x, h)?, &gradient_with(f, x, h * T::half())?))
}

/// Hessian extrapolated from steps `h` and `h/2`.
pub fn richardson_hessian<T: Real, H: Hamiltonian<T> + ?Sized>(f: &H, x: &Vec4<T>) -> Result<Mat4<T>> {
    let h = T::lit(T::HESSIAN_STEP);
    let coarse = hessian_with(f, x, h)?;
    let fine = hessian_with(f, x, h * T::half())?;
    Ok(std::array::from_fn(|i| richardson(&coarse[i], &fine[i])))
}

/// Columns `Gi, Gj, Gk` of the quaternion product, stored row-major as a
/// 4×3 matrix.
pub fn tangential_basis<T: Real>(g: &Vec4<T>) -> Result<[[T; 3]; 4]> {
    if !(norm(g) > T::lit(T::SINGULAR)) {
        return Err(Error::ZeroGradient);
    }
    let [g1, g2, g3, g4] = *g;
    Ok([
        [-g2, -g3, -g4],
        [g1, -g4, g3],
        [g4, g1, -g2],
        [-g3, g2, g1],
    ])
}

/// `det(G_tanᵀ · Hess · G_tan)` from a gradient and Hessian.
pub fn curvature_from_derivatives<T: Real>(g: &Vec4<T>, hess: &Mat4<T>) -> Result<T> {
    let b = tangential_basis(g)?;
    let mut hb = [[T::zero(); 3]; 4];
    for i in 0..4 {
        for c in 0..3 {
            hb[i][c] = (0..4).fold(T::zero(), |acc, k| acc + hess[i][k] * b[k][c]);
        }
    }
    let mut m: Mat3<T> = [[T::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = (0..4).fold(T::zero(), |acc, k| acc + b[k][r] * hb[k][c]);
        }
    }
    Ok(det3(&m))
}

/// Tangential curvature together with the gradient it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureEval<T> {
    pub curvature: T,
    pub gradient: Vec4<T>,
}

pub fn tangential_curvature<T: Real, H: Hamiltonian<T> + ?Sized>(
    f: &H,
    x: &Vec4<T>,
    mode: DerivativeMode,
) -> Result<CurvatureEval<T>> {
    let (gradient, hess) = match mode {
        DerivativeMode::Analytic => match f.analytic(x) {
            Some(d) => d,
            None => (numeric_gradient(f, x)?, numeric_hessian(f, x)?),
        },
        DerivativeMode::Numeric => (numeric_gradient(f, x)?, numeric_hessian(f, x)?),
        DerivativeMode::Richardson => (richardson_gradient(f, x)?, richardson_hessian(f, x)?),
    };
    let curvature = curvature_from_derivatives(&gradient, &hess)?;
    Ok(CurvatureEval { curvature, gradient })
}

/// `X = |w|² + |z|²` and `L = 2(w1 z2 − w2 z1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormInputs<T> {
    pub x: T,
    pub l: T,
}

impl<T: Real> ClosedFormInputs<T> {
    pub fn new(cp: &ComplexPair<T>) -> Result<Self> {
        let x = cp.norm_sq();
        if !(x > T::zero()) {
            return Err(Error::ZeroPoint);
        }
        Ok(Self { x, l: T::two() * cp.wedge() })
    }

    /// The six factors of the rotating-Kepler curvature.
    pub fn factors(&self) -> [T; 6] {
        let (x, l) = (self.x, self.l);
        let one = T::one();
        let x2 = x * x;
        let x4 = x2 * x2;
        let x6 = x4 * x2;
        let x8 = x4 * x4;
        let c6 = x6 + T::two() * l * x2 + one;
        [
            x - one,
            x + one,
            x2 + x + one,
            x2 - x + one,
            -T::lit(6.0) * l * l * x4 + l * x8 - l * x2 + T::lit(7.0) * x6 - one,
            c6 * c6,
        ]
    }

    fn prefactor(&self) -> T {
        T::lit(512.0) / self.x.powi(24)
    }
}

/// Kepler curvature `512/X²⁴`.
pub fn closed_form_ck<T: Real>(cp: &ComplexPair<T>) -> Result<T> {
    Ok(ClosedFormInputs::new(cp)?.prefactor())
}

/// Rotating-Kepler curvature `(512/X²⁴)·C1⋯C6`.
pub fn closed_form_crt<T: Real>(cp: &ComplexPair<T>) -> Result<T> {
    let inputs = ClosedFormInputs::new(cp)?;
    let product = inputs.factors().iter().fold(T::one(), |acc, &c| acc * c);
    Ok(inputs.prefactor() * product)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn kepler_gradient_at_unit_point() {
        let g = numeric_gradient(&Kepler, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(crate::linalg::max_abs_diff(&g, &[2.0, 0.0, 0.0, 0.0]) < 1e-8, "{g:?}");
    }

    #[test]
    fn constant_field_has_zero_gradient() {
        let f = |_: &Vec4<f64>| Ok(3.0);
        assert_eq!(numeric_gradient(&f, &[0.3, 0.1, -2.0, 5.0]).unwrap(), [0.0; 4]);
    }

    #[test]
    fn quadratic_hessian_is_exact() {
        let a = [[1.0, 0.5, 0.0, -0.2], [0.5, 2.0, 0.3, 0.0], [0.0, 0.3, -1.0, 0.1], [-0.2, 0.0, 0.1, 0.7]];
        let f = move |x: &Vec4<f64>| {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += x[i] * a[i][j] * x[j];
                }
            }
            Ok(s)
        };
        let h = numeric_hessian(&f, &[0.4, -0.3, 0.2, 1.1]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((h[i][j] - 2.0 * a[i][j]).abs() < 1e-8, "{i}{j}: {}", h[i][j]);
            }
        }
    }

    #[test]
    fn numeric_hessian_matches_closed_form() {
        let x = [1.0f64, 0.0, 0.0, 0.0];
        let h = numeric_hessian(&Kepler, &x).unwrap();
        let exact = kepler_hessian(&x);
        for i in 0..4 {
            for j in 0..4 {
                assert!((h[i][j] - exact[i][j]).abs() < 1e-5 * exact[i][j].abs().max(1.0), "{i}{j}");
            }
        }
        let hr = numeric_hessian(&RotatingKepler, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(hr[i][j], hr[j][i]);
            }
        }
    }

    #[test]
    fn basis_rows() {
        let b = tangential_basis(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(b, [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let b = tangential_basis(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!([b[0][0], b[1][0], b[2][0], b[3][0]], [-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(tangential_basis(&[0.0f64; 4]), Err(Error::ZeroGradient));
    }

    #[test]
    fn kepler_curvature_values() {
        let c = tangential_curvature(&Kepler, &[1.0, 0.0, 0.0, 0.0], DerivativeMode::Numeric).unwrap();
        assert!(rel(c.curvature, 512.0) < 1e-4, "{c:?}");
        let x = [1.0f64, 0.0, 0.0, 1.0];
        let c = tangential_curvature(&Kepler, &x, DerivativeMode::Analytic).unwrap();
        assert!(rel(c.curvature, 512.0 / 2f64.powi(24)) < 1e-12);
        assert!((closed_form_ck(&ComplexPair::from_array(x)).unwrap() - 3.0518e-5).abs() < 1e-9);
    }

    #[test]
    fn rotating_closed_form_value() {
        let cp = ComplexPair::new([1.0, 0.0], [0.0, 1.0]);
        let inputs = ClosedFormInputs::new(&cp).unwrap();
        assert_eq!(inputs.factors(), [1.0, 3.0, 7.0, 3.0, 567.0, 6561.0]);
        let c = closed_form_crt(&cp).unwrap();
        assert!(rel(c, 512.0 * 234_365_481.0 / 2f64.powi(24)) < 1e-15);
        assert!((c - 7152.27).abs() < 0.01);
        let unit = ComplexPair::new([0.6, 0.0], [0.0, 0.8]);
        assert_eq!(closed_form_crt(&unit).unwrap(), 0.0);
    }

    #[test]
    fn rotating_analytic_matches_closed_form() {
        for x in [[1.0, 0.0, 0.0, 1.0], [0.3, -0.5, 0.9, 0.2], [0.1, 0.2, -0.3, 0.4]] {
            let cp = ComplexPair::from_array(x);
            let c = tangential_curvature(&RotatingKepler, &x, DerivativeMode::Analytic).unwrap();
            let oracle = closed_form_crt(&cp).unwrap();
            assert!(rel(c.curvature, oracle) < 1e-10, "{x:?}: {} vs {oracle}", c.curvature);
        }
    }

    #[test]
    fn rotating_numeric_matches_closed_form() {
        let x = [1.0, 0.0, 0.0, 1.0];
        let oracle = closed_form_crt(&ComplexPair::from_array(x)).unwrap();
        for mode in [DerivativeMode::Numeric, DerivativeMode::Richardson] {
            let c = tangential_curvature(&RotatingKepler, &x, mode).unwrap();
            assert!(rel(c.curvature, oracle) < 1e-3, "{mode:?}");
        }
    }

    #[test]
    fn failing_probe_is_reported() {
        let f = |x: &Vec4<f64>| if x[0] > 0.0 { Err(Error::NorthPole) } else { Ok(x[1]) };
        assert_eq!(numeric_gradient(&f, &[0.0, 0.0, 0.0, 0.0]), Err(Error::EvaluationFailed));
    }
}
