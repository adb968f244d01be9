//! Vector primitives shared by every module.
//!
//! All similarity values are clamped to `[-1, 1]` so that downstream
//! `acos` and threshold logic never sees a rounding overshoot.

use crate::error::{Error, Result};
use crate::group::LatentDirection;

/// Norms at or below this value are treated as zero.
pub const MIN_NORM: f64 = 1e-9;

/// Dot product with four interleaved accumulators.
///
/// The summation order is fixed, so results are bit-identical across runs
/// and thread counts.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Returns `v / ||v||`.
pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if !(n > MIN_NORM) {
        return Err(Error::ZeroVector { norm: n });
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Normalizes in place; leaves `v` untouched on error.
pub fn normalize_in_place(v: &mut [f64]) -> Result<()> {
    let n = norm(v);
    if !(n > MIN_NORM) {
        return Err(Error::ZeroVector { norm: n });
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(())
}

/// Cosine similarity of two unit vectors, i.e. their dot product clamped to
/// `[-1, 1]`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(unit_cosine(a, b))
}

/// Unchecked variant of [`cosine_similarity`] for hot loops.
#[inline]
pub fn unit_cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0)
}

/// Normalized projection `<e, v> / ||v||` of a unit embedding onto a
/// direction. Invariant under positive rescaling of `v`.
pub fn project_onto(e: &[f64], v: &LatentDirection) -> Result<f64> {
    let comps = v.components();
    if e.len() != comps.len() {
        return Err(Error::DimensionMismatch {
            expected: comps.len(),
            actual: e.len(),
        });
    }
    let n = norm(comps);
    if !(n > MIN_NORM) {
        return Err(Error::ZeroVector { norm: n });
    }
    Ok(dot(e, comps) / n)
}
