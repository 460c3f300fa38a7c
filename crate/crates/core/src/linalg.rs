//! Fixed-size vector helpers on plain arrays.

use crate::scalar::Real;

pub type Vec2<T> = [T; 2];
pub type Vec3<T> = [T; 3];
pub type Vec4<T> = [T; 4];
pub type Mat3<T> = [[T; 3]; 3];
pub type Mat4<T> = [[T; 4]; 4];

#[inline]
pub fn dot<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<T: Real, const N: usize>(a: &[T; N]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real, const N: usize>(a: &[T; N]) -> T {
    norm_sq(a).sqrt()
}

#[inline]
pub fn scale<T: Real, const N: usize>(a: &[T; N], k: T) -> [T; N] {
    a.map(|x| x * k)
}

#[inline]
pub fn add<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| a[i] - b[i])
}

/// `a * ka + b * kb`
#[inline]
pub fn lincomb<T: Real, const N: usize>(a: &[T; N], ka: T, b: &[T; N], kb: T) -> [T; N] {
    std::array::from_fn(|i| a[i] * ka + b[i] * kb)
}

#[inline]
pub fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Largest absolute componentwise difference.
#[inline]
pub fn max_abs_diff<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

#[inline]
pub fn is_finite<T: Real, const N: usize>(a: &[T; N]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Determinant of a 3x3 matrix by cofactor expansion along the first row.
pub fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Signed angle from `a` to `b` measured about the unit `axis`.
pub fn signed_angle<T: Real>(a: &Vec3<T>, b: &Vec3<T>, axis: &Vec3<T>) -> T {
    dot(axis, &cross(a, b)).atan2(dot(a, b))
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(angle: T) -> T {
    let tau = T::TAU();
    let r = angle % tau;
    if r < T::zero() {
        r + tau
    } else {
        r
    }
}
