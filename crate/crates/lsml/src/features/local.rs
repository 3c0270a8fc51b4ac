//! Per-coordinate features.

use super::global::{GlobalShape, SliceAreas};
use crate::error::{Error, Result};
use crate::grid::{gradient_at, trilinear_clamped, BoundaryMode, Coord, ScalarField};

/// Number of samples taken along each ray direction.
pub const RAY_SAMPLES: usize = 10;

/// Shape features at one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalShape {
    /// Euclidean distance from the coordinate to the center of mass.
    pub dist_com: f64,
    /// Slice areas at the coordinate's `i`, `j`, `k` indices.
    pub slice_area: [f64; 3],
    /// Centered absolute slice-area changes at those indices.
    pub slice_darea: [f64; 3],
}

/// Image features at one coordinate, for one smoothing scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalImage {
    /// Image value at the coordinate.
    pub value: f64,
    /// Gradient magnitude at the coordinate (one-sided at faces).
    pub edge: f64,
    /// Samples along the inward normal at offsets `t * D_m / 10`, `t = 1..=10`.
    pub normal_in: [f64; RAY_SAMPLES],
    /// Samples along the outward normal, same offsets.
    pub normal_out: [f64; RAY_SAMPLES],
    /// Samples toward the center of mass, same offsets.
    pub ray_in: [f64; RAY_SAMPLES],
    /// Samples away from the center of mass, same offsets.
    pub ray_out: [f64; RAY_SAMPLES],
}

fn check_coord(dims: (usize, usize, usize), c: Coord) -> Result<()> {
    if c.0 >= dims.0 || c.1 >= dims.1 || c.2 >= dims.2 {
        return Err(Error::Argument(format!(
            "coordinate {c:?} outside {}x{}x{} grid",
            dims.0, dims.1, dims.2
        )));
    }
    Ok(())
}

/// Local shape record at `coord`, reading the precomputed global context.
pub fn local_shape(
    u: &ScalarField,
    gs: &GlobalShape,
    sa: &SliceAreas,
    coord: Coord,
) -> Result<LocalShape> {
    check_coord(u.dims(), coord)?;
    let (i, j, k) = coord;
    Ok(LocalShape {
        dist_com: dist_to_com(gs, coord),
        slice_area: [sa.ax[i], sa.ay[j], sa.az[k]],
        slice_darea: [sa.dax[i], sa.day[j], sa.daz[k]],
    })
}

fn dist_to_com(gs: &GlobalShape, c: Coord) -> f64 {
    ((c.0 as f64 - gs.com[0]).powi(2)
        + (c.1 as f64 - gs.com[1]).powi(2)
        + (c.2 as f64 - gs.com[2]).powi(2))
    .sqrt()
}

/// Local image record at `coord` for one smoothed image.
///
/// The inward normal is `+Du/||Du||` (toward the positive region, since `u`
/// is a signed distance that is positive inside). Both rays take
/// [`RAY_SAMPLES`] samples per direction at offsets `t * D_m / 10`; when the
/// normal is degenerate (`||Du|| < 1e-8`) it falls back to the
/// center-of-mass ray direction, and when `D_m < 1e-8` every sample equals
/// the image value at the coordinate.
pub fn local_image(
    u: &ScalarField,
    m_sigma: &ScalarField,
    gs: &GlobalShape,
    coord: Coord,
) -> Result<LocalImage> {
    check_coord(u.dims(), coord)?;
    crate::grid::same_dims(u.dims(), m_sigma.dims(), "local_image")?;
    let (i, j, k) = coord;

    let value = m_sigma.get(i, j, k);
    let (gi, gj, gk) = gradient_at(m_sigma, i, j, k, BoundaryMode::OneSided);
    let edge = (gi * gi + gj * gj + gk * gk).sqrt();

    let dm = dist_to_com(gs, coord);
    let mut out = LocalImage {
        value,
        edge,
        normal_in: [value; RAY_SAMPLES],
        normal_out: [value; RAY_SAMPLES],
        ray_in: [value; RAY_SAMPLES],
        ray_out: [value; RAY_SAMPLES],
    };
    if dm < 1e-8 {
        return Ok(out);
    }

    let ray_dir = [
        (gs.com[0] - i as f64) / dm,
        (gs.com[1] - j as f64) / dm,
        (gs.com[2] - k as f64) / dm,
    ];
    let (ui, uj, uk) = gradient_at(u, i, j, k, BoundaryMode::OneSided);
    let gnorm = (ui * ui + uj * uj + uk * uk).sqrt();
    let normal_dir = if gnorm < 1e-8 {
        ray_dir
    } else {
        [ui / gnorm, uj / gnorm, uk / gnorm]
    };

    let sample = |dir: [f64; 3], sign: f64, t: usize| -> f64 {
        let s = sign * (t as f64) * dm / RAY_SAMPLES as f64;
        trilinear_clamped(
            m_sigma,
            (
                i as f64 + s * dir[0],
                j as f64 + s * dir[1],
                k as f64 + s * dir[2],
            ),
        )
    };
    for t in 1..=RAY_SAMPLES {
        out.normal_in[t - 1] = sample(normal_dir, 1.0, t);
        out.normal_out[t - 1] = sample(normal_dir, -1.0, t);
        out.ray_in[t - 1] = sample(ray_dir, 1.0, t);
        out.ray_out[t - 1] = sample(ray_dir, -1.0, t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::global::{global_shape, slice_areas};
    use crate::grid::{signed_distance, BoolMask};

    fn ball(dims: usize, c: f64, r: f64) -> BoolMask {
        BoolMask::from_fn((dims, dims, dims), |i, j, k| {
            ((i as f64 - c).powi(2) + (j as f64 - c).powi(2) + (k as f64 - c).powi(2)).sqrt() <= r
        })
        .unwrap()
    }

    #[test]
    fn constant_image_all_samples_constant() {
        let u = signed_distance(&ball(21, 10.0, 6.0)).unwrap();
        let gs = global_shape(&u).unwrap();
        let img = crate::grid::ScalarField::filled((21, 21, 21), 2.5).unwrap();
        let li = local_image(&u, &img, &gs, (16, 10, 10)).unwrap();
        assert_eq!(li.value, 2.5);
        assert_eq!(li.edge, 0.0);
        for t in 0..RAY_SAMPLES {
            assert_eq!(li.normal_in[t], 2.5);
            assert_eq!(li.normal_out[t], 2.5);
            assert_eq!(li.ray_in[t], 2.5);
            assert_eq!(li.ray_out[t], 2.5);
        }
    }

    #[test]
    fn zero_length_ray_freezes_samples() {
        // coordinate at the center of mass of a symmetric ball
        let u = signed_distance(&ball(21, 10.0, 6.0)).unwrap();
        let gs = global_shape(&u).unwrap();
        assert_eq!(gs.com, [10.0, 10.0, 10.0]);
        let img = crate::grid::ScalarField::from_fn((21, 21, 21), |i, j, k| {
            (i + j + k) as f64
        })
        .unwrap();
        let li = local_image(&u, &img, &gs, (10, 10, 10)).unwrap();
        let v = img.get(10, 10, 10);
        for t in 0..RAY_SAMPLES {
            assert_eq!(li.normal_in[t], v);
            assert_eq!(li.normal_out[t], v);
            assert_eq!(li.ray_in[t], v);
            assert_eq!(li.ray_out[t], v);
        }
    }

    #[test]
    fn inward_normal_points_to_ball_center() {
        // Ball centered at the com; at the +i interface voxel the inward
        // normal heads toward smaller i, so with image = i the inward samples
        // strictly decrease.
        let u = signed_distance(&ball(31, 15.0, 10.0)).unwrap();
        let gs = global_shape(&u).unwrap();
        let img = crate::grid::ScalarField::from_fn((31, 31, 31), |i, _, _| i as f64).unwrap();
        let li = local_image(&u, &img, &gs, (25, 15, 15)).unwrap();
        let mut prev = li.value;
        for t in 0..RAY_SAMPLES {
            assert!(
                li.normal_in[t] < prev,
                "sample {t} did not decrease: {} >= {prev}",
                li.normal_in[t]
            );
            prev = li.normal_in[t];
        }
        // outward samples clamp at the volume face but must not decrease
        for t in 0..RAY_SAMPLES {
            assert!(li.normal_out[t] >= li.value);
        }
    }

    #[test]
    fn local_shape_reads_slice_tables() {
        let m = BoolMask::from_fn((11, 11, 11), |i, j, k| {
            (3..=7).contains(&i) && (3..=7).contains(&j) && (3..=7).contains(&k)
        })
        .unwrap();
        let u = signed_distance(&m).unwrap();
        let gs = global_shape(&u).unwrap();
        let sa = slice_areas(&u).unwrap();
        let ls = local_shape(&u, &gs, &sa, (5, 5, 5)).unwrap();
        assert_eq!(ls.dist_com, 0.0);
        assert_eq!(ls.slice_area, [25.0, 25.0, 25.0]);
        assert_eq!(ls.slice_darea, [0.0, 0.0, 0.0]);
        let edge = local_shape(&u, &gs, &sa, (2, 5, 5)).unwrap();
        assert_eq!(edge.slice_area[0], 0.0);
        assert_eq!(edge.slice_darea[0], 12.5);
    }

    #[test]
    fn out_of_range_coord_rejected() {
        let u = signed_distance(&ball(9, 4.0, 2.0)).unwrap();
        let gs = global_shape(&u).unwrap();
        let sa = slice_areas(&u).unwrap();
        assert!(local_shape(&u, &gs, &sa, (9, 0, 0)).is_err());
        let img = crate::grid::ScalarField::zeros((9, 9, 9)).unwrap();
        assert!(local_image(&u, &img, &gs, (0, 0, 9)).is_err());
    }
}
