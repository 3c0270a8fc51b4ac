//! Exact Euclidean signed distance transform.
//!
//! Distances are measured between voxel centers: at a true voxel the value is
//! `+d` to the nearest false voxel, at a false voxel it is `-d` to the nearest
//! true voxel. Positive inside matches the sign convention used throughout the
//! level-set code. The squared transform is computed with the separable
//! lower-envelope algorithm of Felzenszwalb and Huttenlocher, which is exact
//! for squared Euclidean distances on integer grids.

use super::field::{BoolMask, ScalarField};
use crate::error::{Error, Result};

/// Signed Euclidean distance to the opposite-label voxel set.
///
/// Errors with a degenerate-mask error when `m` is all-true or all-false.
pub fn signed_distance(m: &BoolMask) -> Result<ScalarField> {
    let n_true = m.count_true();
    if n_true == 0 || n_true == m.len() {
        return Err(Error::DegenerateMask(
            "signed_distance requires both true and false voxels".into(),
        ));
    }
    // Squared distance to the nearest false voxel (0 at false voxels) and to
    // the nearest true voxel (0 at true voxels).
    let to_false = squared_edt(m, false);
    let to_true = squared_edt(m, true);
    let data = m
        .data()
        .iter()
        .zip(to_false.iter().zip(to_true.iter()))
        .map(|(&inside, (&df, &dt))| if inside { df.sqrt() } else { -dt.sqrt() })
        .collect();
    ScalarField::from_vec(m.dims(), data)
}

/// Squared Euclidean distance from every voxel to the nearest voxel whose
/// mask value equals `target`.
fn squared_edt(m: &BoolMask, target: bool) -> Vec<f64> {
    const INF: f64 = 1e30;
    let (ni, nj, nk) = m.dims();
    let mut dist: Vec<f64> = m
        .data()
        .iter()
        .map(|&v| if v == target { 0.0 } else { INF })
        .collect();

    let idx = |i: usize, j: usize, k: usize| (i * nj + j) * nk + k;

    let mut f = vec![0.0; ni.max(nj).max(nk)];
    let mut d = vec![0.0; f.len()];
    let mut v = vec![0usize; f.len()];
    let mut z = vec![0.0; f.len() + 1];

    // Pass along k, then j, then i; each pass turns per-line values into the
    // lower envelope of parabolas rooted at those values.
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                f[k] = dist[idx(i, j, k)];
            }
            edt_1d(&f[..nk], &mut d, &mut v, &mut z);
            for k in 0..nk {
                dist[idx(i, j, k)] = d[k];
            }
        }
    }
    for i in 0..ni {
        for k in 0..nk {
            for j in 0..nj {
                f[j] = dist[idx(i, j, k)];
            }
            edt_1d(&f[..nj], &mut d, &mut v, &mut z);
            for j in 0..nj {
                dist[idx(i, j, k)] = d[j];
            }
        }
    }
    for j in 0..nj {
        for k in 0..nk {
            for i in 0..ni {
                f[i] = dist[idx(i, j, k)];
            }
            edt_1d(&f[..ni], &mut d, &mut v, &mut z);
            for i in 0..ni {
                dist[idx(i, j, k)] = d[i];
            }
        }
    }
    dist
}

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 1 {
        d[0] = f[0];
        return;
    }
    let intersect = |q: usize, p: usize| -> f64 {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
    };
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = intersect(q, v[k]);
        // z[0] = -inf and s is finite, so k never underflows.
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}
