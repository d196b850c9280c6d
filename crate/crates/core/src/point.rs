//! Small fixed-dimension vector helpers.
//!
//! Points are plain `[f64; D]` arrays; the handful of operations the solvers
//! need live here as free functions to keep call sites readable without
//! pulling a vector-algebra dependency into every signature.

/// A point (or vector) in `D`-dimensional space.
pub type Point<const D: usize> = [f64; D];

#[inline]
pub fn sub<const D: usize>(a: Point<D>, b: Point<D>) -> Point<D> {
    std::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn add<const D: usize>(a: Point<D>, b: Point<D>) -> Point<D> {
    std::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn scale<const D: usize>(a: Point<D>, s: f64) -> Point<D> {
    std::array::from_fn(|i| a[i] * s)
}

/// `a + s * b`
#[inline]
pub fn add_scaled<const D: usize>(a: Point<D>, s: f64, b: Point<D>) -> Point<D> {
    std::array::from_fn(|i| a[i] + s * b[i])
}

#[inline]
pub fn dot<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        acc += a[i] * b[i];
    }
    acc
}

#[inline]
pub fn norm_sq<const D: usize>(a: Point<D>) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm<const D: usize>(a: Point<D>) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    norm_sq(sub(a, b))
}

#[inline]
pub fn dist<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    dist_sq(a, b).sqrt()
}

/// Returns `a / |a|`. The caller must ensure `a` is nonzero.
#[inline]
pub fn normalize<const D: usize>(a: Point<D>) -> Point<D> {
    scale(a, 1.0 / norm(a))
}
