//! The generalized Kepler equation.
//!
//! Elliptic form `φ = x sin φ − y cos φ`, hyperbolic form
//! `φ = x sinh φ + y cosh φ`. The inverse regularization map solves one of
//! these for the rotation angle; on `[-1, 1]²` the elliptic solution defines
//! the Kepler function.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 100;
/// Sign-scan resolution for the multi-root case is `r / SCAN_HALF_SAMPLES`.
const SCAN_HALF_SAMPLES: usize = 1024;
const HYPERBOLIC_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeplerRoot<T> {
    pub phi: T,
    pub residual: T,
    pub iterations: usize,
}

/// `f(φ) = φ − x sin φ + y cos φ` with derivative and a magnitude scale
/// for the residual test.
#[inline]
fn elliptic_eval<T: Real>(x: T, y: T, phi: T) -> (T, T, T) {
    let (s, c) = phi.sin_cos();
    let f = phi - x * s + y * c;
    let df = T::one() - x * c - y * s;
    let scale = T::one() + phi.abs() + (x * s).abs() + (y * c).abs();
    (f, df, scale)
}

/// `g(φ) = φ − x sinh φ − y cosh φ`.
#[inline]
fn hyperbolic_eval<T: Real>(x: T, y: T, phi: T) -> (T, T, T) {
    let (s, c) = (phi.sinh(), phi.cosh());
    let f = phi - x * s - y * c;
    let df = T::one() - x * c - y * s;
    let scale = T::one() + phi.abs() + (x * s).abs() + (y * c).abs();
    (f, df, scale)
}

/// Newton iteration kept inside a sign-change bracket, with bisection
/// whenever the Newton step leaves it.
fn bracketed_newton<T, F>(eval: F, mut lo: T, mut hi: T, start: T) -> KeplerRoot<T>
where
    T: Real,
    F: Fn(T) -> (T, T, T),
{
    let res_tol = T::lit(T::ROOT_RESIDUAL);
    let step_tol = T::lit(T::ROOT_STEP);

    let (f_lo, _, _) = eval(lo);
    let (f_hi, _, _) = eval(hi);
    if f_lo == T::zero() {
        return KeplerRoot { phi: lo, residual: T::zero(), iterations: 0 };
    }
    if f_hi == T::zero() {
        return KeplerRoot { phi: hi, residual: T::zero(), iterations: 0 };
    }
    let lo_negative = f_lo < T::zero();

    let mut phi = start.max(lo).min(hi);
    let mut best = (phi, T::infinity());
    for it in 1..=2 * MAX_ITERATIONS {
        let (f, df, _) = eval(phi);
        if f.abs() < best.1 {
            best = (phi, f.abs());
        }
        if f == T::zero() {
            return KeplerRoot { phi, residual: f, iterations: it };
        }
        if (f < T::zero()) == lo_negative {
            lo = phi;
        } else {
            hi = phi;
        }

        let newton = phi - f / df;
        let next = if it <= MAX_ITERATIONS && df != T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::half()
        };
        let step = (next - phi).abs();
        phi = next;

        if step < step_tol * T::one().max(phi.abs()) || (hi - lo).abs() < step_tol {
            let (f_new, _, scale_new) = eval(phi);
            if f_new.abs() <= res_tol * scale_new || (hi - lo).abs() < step_tol {
                let r = if f_new.abs() <= best.1 { (phi, f_new) } else { (best.0, eval(best.0).0) };
                return KeplerRoot { phi: r.0, residual: r.1, iterations: it };
            }
        }
    }
    KeplerRoot { phi: best.0, residual: eval(best.0).0, iterations: 2 * MAX_ITERATIONS }
}

/// Solves `φ = x sin φ − y cos φ`.
///
/// Every root lies in `[-r, r]` with `r = sqrt(x² + y²)` and the function
/// changes sign across that interval. For `r ≤ 1` the root is unique; beyond
/// that the root of smallest magnitude is returned.
pub fn solve_elliptic<T: Real>(x: T, y: T) -> Result<KeplerRoot<T>> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let r = x.hypot(y);
    if y == T::zero() && x.abs() <= T::one() || r == T::zero() {
        return Ok(KeplerRoot { phi: T::zero(), residual: T::zero(), iterations: 0 });
    }
    let eval = |phi: T| elliptic_eval(x, y, phi);

    if r <= T::one() {
        return Ok(bracketed_newton(eval, -r, r, -y));
    }

    // Several roots are possible: bracket the sign change closest to zero.
    let n = SCAN_HALF_SAMPLES as i64;
    let at = |k: i64| r * (T::from_i64(k).unwrap() / T::from_i64(n).unwrap());
    let mut best: Option<(T, T, T)> = None; // (distance, a, b)
    let mut prev = (at(-n), eval(at(-n)).0);
    for k in (-n + 1)..=n {
        let phi = at(k);
        let f = eval(phi).0;
        if prev.1 == T::zero() || (prev.1 < T::zero()) != (f < T::zero()) || f == T::zero() {
            let (a, b) = (prev.0, phi);
            let dist = if a <= T::zero() && b >= T::zero() {
                T::zero()
            } else {
                a.abs().min(b.abs())
            };
            if best.map_or(true, |(d, _, _)| dist < d) {
                best = Some((dist, a, b));
            }
        }
        prev = (phi, f);
    }
    let (_, a, b) = best.unwrap_or((T::zero(), -r, r));
    let start = (-y).max(a).min(b);
    Ok(bracketed_newton(eval, a, b, start))
}

/// Solves `φ = x sinh φ + y cosh φ` on an expanding symmetric bracket.
pub fn solve_hyperbolic<T: Real>(x: T, y: T) -> Result<KeplerRoot<T>> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFinite);
    }
    if y == T::zero() && x >= T::one() {
        return Ok(KeplerRoot { phi: T::zero(), residual: T::zero(), iterations: 0 });
    }
    let eval = |phi: T| hyperbolic_eval(x, y, phi);
    let limit = T::lit(HYPERBOLIC_LIMIT);
    let mut half = T::one();
    loop {
        let (fa, fb) = (eval(-half).0, eval(half).0);
        if fa == T::zero() || fb == T::zero() || (fa < T::zero()) != (fb < T::zero()) {
            break;
        }
        if half >= limit {
            return Err(Error::NoRootInBracket);
        }
        half = (half * T::two()).min(limit);
    }
    Ok(bracketed_newton(eval, -half, half, T::zero()))
}

/// Location and value of a grid extremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridExtremum<T> {
    pub value: T,
    pub x: T,
    pub y: T,
}

/// The Kepler function tabulated on a square grid.
///
/// `phi[i * ys.len() + j]` is the solution at `(xs[i], ys[j])`. Gradients use
/// centred differences in the interior and one-sided differences on the edges.
#[derive(Debug, Clone, Serialize)]
pub struct GridReport<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    pub phi: Vec<T>,
    pub min_phi: GridExtremum<T>,
    pub max_phi: GridExtremum<T>,
    pub min_dphi_dx: GridExtremum<T>,
    pub max_dphi_dx: GridExtremum<T>,
    pub min_dphi_dy: GridExtremum<T>,
    pub max_dphi_dy: GridExtremum<T>,
    pub max_gradient_norm: GridExtremum<T>,
}

impl<T: Real> GridReport<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.phi[i * self.ys.len() + j]
    }
}

fn axis<T: Real>(lo: T, hi: T, step: T) -> Vec<T> {
    let n = ((hi - lo) / step).round().to_usize().unwrap_or(0) + 1;
    let span = hi - lo;
    let last = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| lo + span * T::from_usize(i).unwrap() / last)
        .collect()
}

/// Derivative of a sampled 1-D function, centred inside, one-sided at ends.
fn differentiate<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    (0..n)
        .map(|k| {
            if n < 2 {
                T::zero()
            } else if k == 0 {
                (values[1] - values[0]) / h
            } else if k == n - 1 {
                (values[n - 1] - values[n - 2]) / h
            } else {
                (values[k + 1] - values[k - 1]) / (T::two() * h)
            }
        })
        .collect()
}

/// Evaluates the Kepler function on `[lo, hi]²` with spacing `step`.
pub fn kepler_function_grid<T: Real>(lo: T, hi: T, step: T) -> Result<GridReport<T>> {
    if !(lo < hi) || !(step > T::zero()) {
        return Err(Error::InvalidArgument("grid requires lo < hi and step > 0"));
    }
    let xs = axis(lo, hi, step);
    let ys = xs.clone();
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points per axis"));
    }
    let h = (hi - lo) / T::from_usize(nx - 1).unwrap();

    let rows: Vec<Vec<T>> = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| solve_elliptic(x, y).map(|r| r.phi)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let phi: Vec<T> = rows.into_iter().flatten().collect();

    let mut dx = vec![T::zero(); nx * ny];
    let mut dy = vec![T::zero(); nx * ny];
    for j in 0..ny {
        let column: Vec<T> = (0..nx).map(|i| phi[i * ny + j]).collect();
        for (i, d) in differentiate(&column, h).into_iter().enumerate() {
            dx[i * ny + j] = d;
        }
    }
    for i in 0..nx {
        for (j, d) in differentiate(&phi[i * ny..(i + 1) * ny], h).into_iter().enumerate() {
            dy[i * ny + j] = d;
        }
    }
    let norm: Vec<T> = dx.iter().zip(&dy).map(|(a, b)| a.hypot(*b)).collect();

    let extremum = |values: &[T], want_max: bool| {
        let mut best = 0;
        for (k, v) in values.iter().enumerate() {
            if (want_max && *v > values[best]) || (!want_max && *v < values[best]) {
                best = k;
            }
        }
        GridExtremum { value: values[best], x: xs[best / ny], y: ys[best % ny] }
    };

    Ok(GridReport {
        min_phi: extremum(&phi, false),
        max_phi: extremum(&phi, true),
        min_dphi_dx: extremum(&dx, false),
        max_dphi_dx: extremum(&dx, true),
        min_dphi_dy: extremum(&dy, false),
        max_dphi_dy: extremum(&dy, true),
        max_gradient_norm: extremum(&norm, true),
        xs,
        ys,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on a bracket; independent of the solver above.
    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) < 0.0) == (fa < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn trivial_roots() {
        assert_eq!(solve_elliptic(0.0, 0.0).unwrap().phi, 0.0);
        assert_eq!(solve_elliptic(0.5, 0.0).unwrap().phi, 0.0);
        assert_eq!(solve_hyperbolic(1.0, 0.0).unwrap().phi, 0.0);
        assert_eq!(solve_hyperbolic(2.0, 0.0).unwrap().phi, 0.0);
    }

    #[test]
    fn elliptic_against_bisection() {
        let oracle = bisect(|p| p + 0.5 * p.cos(), -0.5, 0.5);
        assert!((oracle + 0.450184).abs() < 1e-6);
        let root = solve_elliptic(0.0, 0.5).unwrap();
        assert!((root.phi - oracle).abs() < 1e-13);
        assert!(root.residual.abs() < 1e-13);
    }

    #[test]
    fn corner_values() {
        let r = solve_elliptic(1.0f64, 1.0).unwrap();
        assert!((r.phi + 1.2587).abs() < 1e-3, "{r:?}");
        let r = solve_elliptic(1.0f64, -1.0).unwrap();
        assert!((r.phi - 1.2587).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn hyperbolic_radial_state() {
        let r = solve_hyperbolic(1.0875f64, -0.4275).unwrap();
        assert!((r.phi - 1.7321).abs() < 2e-3, "{r:?}");
        let oracle = bisect(|p| p - 1.0875 * p.sinh() + 0.4275 * p.cosh(), 0.0, 5.0);
        assert!((r.phi - oracle).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_without_root() {
        // φ = −2 cosh φ has no solution
        assert_eq!(solve_hyperbolic(0.0, -2.0), Err(Error::NoRootInBracket));
    }

    #[test]
    fn non_finite_input() {
        assert_eq!(solve_elliptic(f64::NAN, 0.0), Err(Error::NonFinite));
        assert_eq!(solve_hyperbolic(1.0, f64::INFINITY), Err(Error::NonFinite));
    }

    #[test]
    fn smallest_root_chosen() {
        // x = 3 admits three roots for y = 0.1; take the one nearest zero
        let (x, y) = (3.0, 0.1);
        let f = |p: f64| p - x * p.sin() + y * p.cos();
        let r = solve_elliptic(x, y).unwrap();
        let r_max = (x * x + y * y).sqrt();
        let mut roots = vec![];
        let n = 100_000;
        for k in 0..n {
            let a = -r_max + 2.0 * r_max * k as f64 / n as f64;
            let b = a + 2.0 * r_max / n as f64;
            if f(a) * f(b) < 0.0 {
                roots.push(bisect(f, a, b));
            }
        }
        let nearest = roots.iter().cloned().fold(f64::INFINITY, |m, v| if v.abs() < m.abs() { v } else { m });
        assert!(roots.len() >= 3);
        assert!((r.phi - nearest).abs() < 1e-12, "{} vs {}", r.phi, nearest);
    }

    #[test]
    fn single_precision() {
        let r = solve_elliptic(0.0f32, 0.5).unwrap();
        assert!((r.phi + 0.450184).abs() < 1e-5);
        let r = solve_hyperbolic(1.0875f32, -0.4275).unwrap();
        assert!((r.phi - 1.7321).abs() < 2e-3);
    }

    #[test]
    fn small_grid_corners() {
        let g = kepler_function_grid(-0.5f64, 0.5, 0.1).unwrap();
        assert_eq!(g.xs.len(), 11);
        assert_eq!((g.min_phi.x, g.min_phi.y), (0.5, 0.5));
        assert_eq!((g.max_phi.x, g.max_phi.y), (0.5, -0.5));
        assert!((g.min_phi.value + g.max_phi.value).abs() < 1e-14);
    }

    #[test]
    fn invalid_grid() {
        assert!(kepler_function_grid(1.0, -1.0, 0.1).is_err());
        assert!(kepler_function_grid(-1.0, 1.0, 0.0).is_err());
    }
}
