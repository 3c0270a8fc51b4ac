//! Trilinear interpolation with clamping.

use super::field::ScalarField;
use crate::error::{Error, Result};

/// Samples `f` at a continuous position by trilinear interpolation of the 8
/// surrounding voxel centers. Coordinates are clamped to `[0, n-1]` per axis,
/// so out-of-range positions return the nearest face value.
pub fn trilinear(f: &ScalarField, p: (f64, f64, f64)) -> Result<f64> {
    if !(p.0.is_finite() && p.1.is_finite() && p.2.is_finite()) {
        return Err(Error::Argument(format!("non-finite sample position {p:?}")));
    }
    Ok(trilinear_clamped(f, p))
}

/// Infallible variant for hot loops; the position must be finite.
pub(crate) fn trilinear_clamped(f: &ScalarField, p: (f64, f64, f64)) -> f64 {
    let (ni, nj, nk) = f.dims();
    let clamp = |x: f64, n: usize| x.clamp(0.0, (n - 1) as f64);
    let x = clamp(p.0, ni);
    let y = clamp(p.1, nj);
    let z = clamp(p.2, nk);
    let i0 = x.floor() as usize;
    let j0 = y.floor() as usize;
    let k0 = z.floor() as usize;
    let i1 = (i0 + 1).min(ni - 1);
    let j1 = (j0 + 1).min(nj - 1);
    let k1 = (k0 + 1).min(nk - 1);
    let fx = x - i0 as f64;
    let fy = y - j0 as f64;
    let fz = z - k0 as f64;

    let c000 = f.get(i0, j0, k0);
    let c001 = f.get(i0, j0, k1);
    let c010 = f.get(i0, j1, k0);
    let c011 = f.get(i0, j1, k1);
    let c100 = f.get(i1, j0, k0);
    let c101 = f.get(i1, j0, k1);
    let c110 = f.get(i1, j1, k0);
    let c111 = f.get(i1, j1, k1);

    let c00 = c000 * (1.0 - fz) + c001 * fz;
    let c01 = c010 * (1.0 - fz) + c011 * fz;
    let c10 = c100 * (1.0 - fz) + c101 * fz;
    let c11 = c110 * (1.0 - fz) + c111 * fz;
    let c0 = c00 * (1.0 - fy) + c01 * fy;
    let c1 = c10 * (1.0 - fy) + c11 * fy;
    c0 * (1.0 - fx) + c1 * fx
}
