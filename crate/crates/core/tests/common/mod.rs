//! Shared test oracles and samplers.
#![allow(dead_code)]

use kepler_ls::linalg::norm;
use kepler_ls::CartesianState64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let v: [f64; N] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

/// Bound state: `|q| ∈ [0.3, 3]`, `H ∈ [−0.95/|q|, −0.02]`, isotropic.
pub fn elliptic_state(rng: &mut ChaCha8Rng) -> CartesianState64 {
    let r: f64 = rng.gen_range(0.3..3.0);
    let h: f64 = rng.gen_range(-0.95 / r..-0.02);
    state_with(rng, r, h)
}

/// Unbound state: `|q| ∈ [0.3, 3]`, `H ∈ [0.02, 1]`, `sqrt(2H)|q·p| ≤ 2`.
pub fn hyperbolic_state(rng: &mut ChaCha8Rng) -> CartesianState64 {
    loop {
        let r: f64 = rng.gen_range(0.3..3.0);
        let h: f64 = rng.gen_range(0.02..1.0);
        let s = state_with(rng, r, h);
        if (2.0 * h).sqrt() * s.q_dot_p().abs() <= 2.0 {
            return s;
        }
    }
}

fn state_with(rng: &mut ChaCha8Rng, r: f64, h: f64) -> CartesianState64 {
    let speed = (2.0 * (1.0 / r + h)).sqrt();
    let q = unit_vector::<3>(rng).map(|x| x * r);
    let p = unit_vector::<3>(rng).map(|x| x * speed);
    CartesianState64::new(q, p).unwrap()
}

/// Bound state with eccentricity at most `e_max`.
pub fn elliptic_state_max_e(rng: &mut ChaCha8Rng, e_max: f64) -> CartesianState64 {
    loop {
        let s = elliptic_state(rng);
        if s.conserved().eccentricity_from_angular_momentum() <= e_max {
            return s;
        }
    }
}

/// Point of `(w, z)`-space with `X = |w|² + |z|²` in `[x_lo, x_hi]`.
pub fn pair_with_x(rng: &mut ChaCha8Rng, x_lo: f64, x_hi: f64) -> [f64; 4] {
    let radius = rng.gen_range(x_lo..x_hi).sqrt();
    unit_vector::<4>(rng).map(|v| v * radius)
}

pub fn uniform_box(rng: &mut ChaCha8Rng, half: f64) -> [f64; 4] {
    std::array::from_fn(|_| rng.gen_range(-half..half))
}

type Y = [f64; 6];

fn kepler_rhs(y: &Y) -> Y {
    let q = [y[0], y[1], y[2]];
    let r = norm(&q);
    let k = -1.0 / (r * r * r);
    [y[3], y[4], y[5], k * y[0], k * y[1], k * y[2]]
}

fn rk4_step(y: &Y, h: f64) -> Y {
    let add = |a: &Y, b: &Y, s: f64| -> Y { std::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = kepler_rhs(y);
    let k2 = kepler_rhs(&add(y, &k1, h / 2.0));
    let k3 = kepler_rhs(&add(y, &k2, h / 2.0));
    let k4 = kepler_rhs(&add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates `q'' = −q/|q|³` from `t = 0` to each of `times` (ascending)
/// with step-doubling RK4 and local extrapolation; `tol` bounds the local
/// error per step relative to `max(1, |y|)`.
pub fn rk4_oracle(state: &CartesianState64, times: &[f64], tol: f64) -> Vec<CartesianState64> {
    let mut y: Y = [state.q[0], state.q[1], state.q[2], state.p[0], state.p[1], state.p[2]];
    let mut t = 0.0;
    let mut h = 1e-3 * state.radius().powf(1.5);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = h.min(target - t);
            let full = rk4_step(&y, step);
            let half = rk4_step(&rk4_step(&y, step / 2.0), step / 2.0);
            let err = (0..6).map(|i| (half[i] - full[i]).abs()).fold(0.0, f64::max) / 15.0;
            let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if err <= tol * scale {
                y = std::array::from_fn(|i| half[i] + (half[i] - full[i]) / 15.0);
                t = if step == target - t { target } else { t + step };
            }
            let ratio = if err > 0.0 { 0.9 * (tol * scale / err).powf(0.2) } else { 4.0 };
            h = step * ratio.clamp(0.2, 4.0);
        }
        out.push(CartesianState64::new([y[0], y[1], y[2]], [y[3], y[4], y[5]]).unwrap());
    }
    out
}
