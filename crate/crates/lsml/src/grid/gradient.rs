//! Central finite differences with selectable boundary handling.

use super::field::{ScalarField, VectorField};
use crate::error::{Error, Result};

/// How the first derivative is approximated at volume faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Forward/backward first differences at the faces.
    OneSided,
    /// Zero derivative at the faces.
    Zero,
}

/// Approximates the gradient by central differences at interior voxels.
///
/// Boundary voxels use one-sided differences or zero depending on `mode`.
/// Requires at least 3 voxels along every axis so the interior stencil is
/// well defined.
pub fn central_gradient(f: &ScalarField, mode: BoundaryMode) -> Result<VectorField> {
    let (ni, nj, nk) = f.dims();
    if ni < 3 || nj < 3 || nk < 3 {
        return Err(Error::Dimension(format!(
            "central_gradient needs >= 3 voxels per axis, got {ni}x{nj}x{nk}"
        )));
    }
    let mut di = ScalarField::zeros(f.dims())?;
    let mut dj = ScalarField::zeros(f.dims())?;
    let mut dk = ScalarField::zeros(f.dims())?;
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                let (a, b, c) = gradient_at(f, i, j, k, mode);
                di.set(i, j, k, a);
                dj.set(i, j, k, b);
                dk.set(i, j, k, c);
            }
        }
    }
    VectorField::new(di, dj, dk)
}

/// Per-voxel gradient with the same stencil rules as [`central_gradient`],
/// without allocating whole fields. Axes of size 1 yield 0; size-2 axes use
/// one-sided differences everywhere (or 0 in [`BoundaryMode::Zero`]).
pub fn gradient_at(
    f: &ScalarField,
    i: usize,
    j: usize,
    k: usize,
    mode: BoundaryMode,
) -> (f64, f64, f64) {
    let (ni, nj, nk) = f.dims();
    let diff = |n: usize, x: usize, get: &dyn Fn(usize) -> f64| -> f64 {
        if n == 1 {
            return 0.0;
        }
        if x > 0 && x + 1 < n {
            (get(x + 1) - get(x - 1)) / 2.0
        } else {
            match mode {
                BoundaryMode::Zero => 0.0,
                BoundaryMode::OneSided => {
                    if x == 0 {
                        get(1) - get(0)
                    } else {
                        get(n - 1) - get(n - 2)
                    }
                }
            }
        }
    };

    let gi = diff(ni, i, &|x| f.get(x, j, k));
    let gj = diff(nj, j, &|x| f.get(i, x, k));
    let gk = diff(nk, k, &|x| f.get(i, j, x));
    (gi, gj, gk)
}
