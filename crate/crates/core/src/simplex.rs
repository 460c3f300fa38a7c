//! Nelder-Mead simplex descent.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions<T> {
    /// Edge length of the initial simplex.
    pub initial_step: T,
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter_tol: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for SimplexOptions<T> {
    fn default() -> Self {
        Self {
            initial_step: T::lit(0.02),
            diameter_tol: T::lit(1e-8),
            max_evaluations: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexResult<T, const N: usize> {
    pub point: [T; N],
    pub value: T,
    pub diameter: T,
    pub evaluations: usize,
    pub converged: bool,
}

fn diameter<T: Real, const N: usize>(vertices: &[[T; N]]) -> T {
    let best = &vertices[0];
    vertices[1..].iter().fold(T::zero(), |acc, v| {
        let d = v
            .iter()
            .zip(best)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        acc.max(d)
    })
}

/// Minimizes `f` from `start`. Non-finite values are treated as `+∞`.
pub fn nelder_mead<T, F, const N: usize>(
    f: F,
    start: [T; N],
    opts: &SimplexOptions<T>,
) -> SimplexResult<T, N>
where
    T: Real,
    F: Fn(&[T; N]) -> T,
{
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[T; N]| {
        evaluations.set(evaluations.get() + 1);
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let (alpha, gamma, rho, sigma) = (T::one(), T::two(), T::half(), T::half());
    let mut verts: Vec<[T; N]> = Vec::with_capacity(N + 1);
    verts.push(start);
    for i in 0..N {
        let mut v = start;
        v[i] = v[i] + opts.initial_step;
        verts.push(v);
    }
    let mut vals: Vec<T> = verts.iter().map(eval).collect();

    loop {
        let mut order: Vec<usize> = (0..=N).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal));
        verts = order.iter().map(|&i| verts[i]).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diam = diameter(&verts);
        if diam < opts.diameter_tol || evaluations.get() >= opts.max_evaluations {
            return SimplexResult {
                point: verts[0],
                value: vals[0],
                diameter: diam,
                evaluations: evaluations.get(),
                converged: diam < opts.diameter_tol,
            };
        }

        let n = T::from_usize(N).unwrap();
        let centroid: [T; N] = std::array::from_fn(|k| {
            verts[..N].iter().fold(T::zero(), |acc, v| acc + v[k]) / n
        });
        let along = |t: T| -> [T; N] { std::array::from_fn(|k| centroid[k] + t * (verts[N][k] - centroid[k])) };

        let xr = along(-alpha);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-alpha * gamma);
            let fe = eval(&xe);
            if fe < fr {
                verts[N] = xe;
                vals[N] = fe;
            } else {
                verts[N] = xr;
                vals[N] = fr;
            }
            continue;
        }
        if fr < vals[N - 1] {
            verts[N] = xr;
            vals[N] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[N] {
            let x = along(-alpha * rho);
            (x, eval(&x))
        } else {
            let x = along(rho);
            (x, eval(&x))
        };
        if fc < vals[N].min(fr) {
            verts[N] = xc;
            vals[N] = fc;
            continue;
        }
        let best = verts[0];
        for i in 1..=N {
            verts[i] = std::array::from_fn(|k| best[k] + sigma * (verts[i][k] - best[k]));
            vals[i] = eval(&verts[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions { initial_step: 0.1, diameter_tol: 1e-10, max_evaluations: 10_000 };
        let r = nelder_mead(f, [-1.2, 1.0], &opts);
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-6 && (r.point[1] - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn nan_region_is_avoided() {
        let f = |x: &[f64; 1]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) };
        let r = nelder_mead(f, [0.05], &SimplexOptions::default());
        assert!((r.point[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64; 4]| x.iter().map(|v| v * v).sum::<f64>();
        let opts = SimplexOptions { initial_step: 1.0, diameter_tol: 1e-30, max_evaluations: 50 };
        let r = nelder_mead(f, [1.0; 4], &opts);
        assert!(!r.converged);
        assert!(r.evaluations < 60);
    }
}
