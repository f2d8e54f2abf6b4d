//! Fixed-width spacetime vectors.
//!
//! Points, tangents and Jacobi data are carried as `[f64; 4]`: slot 0 is the
//! time component and slots `1..=rep` the spatial representation, where `rep`
//! is the metric's spatial representation dimension (`n` in coordinates, 3
//! for the ambient embedding of `S²`).  Unused slots stay zero.

pub type V4 = [f64; 4];

pub const ZERO: V4 = [0.0; 4];

#[inline]
pub fn add(a: &V4, b: &V4) -> V4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub(a: &V4, b: &V4) -> V4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn scale(a: &V4, c: f64) -> V4 {
    [c * a[0], c * a[1], c * a[2], c * a[3]]
}

#[inline]
pub fn axpy(y: &mut V4, c: f64, x: &V4) {
    for k in 0..4 {
        y[k] += c * x[k];
    }
}

/// Euclidean dot of the full 4-slot representation.
#[inline]
pub fn edot(a: &V4, b: &V4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

#[inline]
pub fn enorm(a: &V4) -> f64 {
    edot(a, a).sqrt()
}

/// Euclidean dot of the spatial slots only.
#[inline]
pub fn sdot(a: &V4, b: &V4) -> f64 {
    a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn from_time_and_space(t: f64, x: &[f64]) -> V4 {
    let mut v = ZERO;
    v[0] = t;
    v[1..1 + x.len()].copy_from_slice(x);
    v
}
