//! Global shape and image features of a segmentation.
//!
//! The segmentation is the region where the level-set function is strictly
//! positive; `H` below is the exact unit step of that condition. Surface
//! sums use `||D H(u)||` with central differences (zero at volume faces),
//! image gradients use one-sided differences at the faces.

use crate::error::Result;
use crate::grid::{gradient_at, same_dims, BoundaryMode, Coord, ScalarField};

/// Geometric descriptors of the positive region.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalShape {
    /// Surface area of the zero level surface, `sum ||D H(u)||`.
    pub boundary_length: f64,
    /// Number of positive voxels.
    pub volume: f64,
    /// Isoperimetric ratio `36 pi V^2 / L^3` (0 when `L = 0`).
    pub isoperimetric: f64,
    /// Raw moments per order and axis: `p=1` then `p=2`, axes `i, j, k`.
    pub moments: [f64; 6],
    /// Center of mass (the `p=1` moments).
    pub com: [f64; 3],
    /// Mean distance from interface voxels to the center of mass.
    pub dist_mean: f64,
    /// Standard deviation of those distances.
    pub dist_std: f64,
    /// Maximum of those distances.
    pub dist_max: f64,
    /// Set when the positive region is empty; all stats are zero and `com`
    /// defaults to the volume center.
    pub degenerate: bool,
}

/// Image statistics over and around the positive region, for one smoothing
/// scale.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalImage {
    /// Mean image value over positive voxels.
    pub mean_inside: f64,
    /// Standard deviation of image values over positive voxels.
    pub std_inside: f64,
    /// Surface-averaged edge strength, `sum ||D m|| ||D H|| / L`.
    pub avg_edge: f64,
    /// Surface-averaged image value, `sum m ||D H|| / L`.
    pub mean_on_boundary: f64,
    /// Set when `V = 0` (inside stats zeroed) or `L = 0` (boundary stats
    /// zeroed).
    pub degenerate: bool,
}

/// Per-axis slice areas of the positive region and their centered absolute
/// changes. Boundary slices replicate edge values for the centered change.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceAreas {
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
    pub az: Vec<f64>,
    pub dax: Vec<f64>,
    pub day: Vec<f64>,
    pub daz: Vec<f64>,
}

/// Precomputed per-segmentation context shared by feature rows: the unit-step
/// field, its gradient-magnitude field, and the global shape descriptors.
#[derive(Debug, Clone)]
pub struct ShapeContext {
    pub(crate) h: ScalarField,
    pub(crate) dh_norm: ScalarField,
    pub shape: GlobalShape,
    pub slices: SliceAreas,
}

impl ShapeContext {
    pub fn new(u: &ScalarField) -> Result<Self> {
        let dims = u.dims();
        let h = ScalarField::from_vec(
            dims,
            u.data().iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect(),
        )?;
        let mut dh_norm = ScalarField::zeros(dims)?;
        let mut length = 0.0;
        for (i, j, k) in h.coords() {
            let (a, b, c) = gradient_at(&h, i, j, k, BoundaryMode::Zero);
            let n = (a * a + b * b + c * c).sqrt();
            dh_norm.set(i, j, k, n);
            length += n;
        }
        let shape = shape_from_h(&h, u, length);
        let slices = slice_areas_from_h(&h);
        Ok(Self { h, dh_norm, shape, slices })
    }
}

/// Computes the global shape descriptors of the positive region of `u`.
pub fn global_shape(u: &ScalarField) -> Result<GlobalShape> {
    Ok(ShapeContext::new(u)?.shape)
}

/// Computes the per-axis slice areas of the positive region of `u`.
pub fn slice_areas(u: &ScalarField) -> Result<SliceAreas> {
    Ok(ShapeContext::new(u)?.slices)
}

fn shape_from_h(h: &ScalarField, u: &ScalarField, length: f64) -> GlobalShape {
    let (ni, nj, nk) = h.dims();
    let mut volume = 0.0f64;
    let mut m1 = [0.0f64; 3];
    let mut m2 = [0.0f64; 3];
    for (i, j, k) in h.coords() {
        if h.get(i, j, k) > 0.0 {
            volume += 1.0;
            m1[0] += i as f64;
            m1[1] += j as f64;
            m1[2] += k as f64;
            m2[0] += (i * i) as f64;
            m2[1] += (j * j) as f64;
            m2[2] += (k * k) as f64;
        }
    }

    if volume == 0.0 {
        let com = [
            (ni as f64 - 1.0) / 2.0,
            (nj as f64 - 1.0) / 2.0,
            (nk as f64 - 1.0) / 2.0,
        ];
        return GlobalShape {
            boundary_length: 0.0,
            volume: 0.0,
            isoperimetric: 0.0,
            moments: [0.0; 6],
            com,
            dist_mean: 0.0,
            dist_std: 0.0,
            dist_max: 0.0,
            degenerate: true,
        };
    }

    for v in m1.iter_mut().chain(m2.iter_mut()) {
        *v /= volume;
    }
    let com = [m1[0], m1[1], m1[2]];
    let isoperimetric = if length > 0.0 {
        36.0 * std::f64::consts::PI * volume * volume / (length * length * length)
    } else {
        0.0
    };

    // Interface voxels: positive with a non-positive face neighbor, plus the
    // converse.
    let mut dist_sum = 0.0f64;
    let mut dist_max = 0.0f64;
    let mut dists: Vec<f64> = Vec::new();
    for (i, j, k) in u.coords() {
        if is_interface(u, (i, j, k)) {
            let d = ((i as f64 - com[0]).powi(2)
                + (j as f64 - com[1]).powi(2)
                + (k as f64 - com[2]).powi(2))
            .sqrt();
            dist_sum += d;
            dist_max = dist_max.max(d);
            dists.push(d);
        }
    }
    let (dist_mean, dist_std) = if dists.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = dist_sum / dists.len() as f64;
        let var = dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / dists.len() as f64;
        (mean, var.sqrt())
    };

    GlobalShape {
        boundary_length: length,
        volume,
        isoperimetric,
        moments: [m1[0], m1[1], m1[2], m2[0], m2[1], m2[2]],
        com,
        dist_mean,
        dist_std,
        dist_max,
        degenerate: false,
    }
}

/// True when the voxel sits on the sign interface: its positivity differs
/// from at least one face neighbor's.
pub(crate) fn is_interface(u: &ScalarField, c: Coord) -> bool {
    let (ni, nj, nk) = u.dims();
    let (i, j, k) = c;
    let pos = u.get(i, j, k) > 0.0;
    let differs = |a: usize, b: usize, c: usize| (u.get(a, b, c) > 0.0) != pos;
    (i > 0 && differs(i - 1, j, k))
        || (i + 1 < ni && differs(i + 1, j, k))
        || (j > 0 && differs(i, j - 1, k))
        || (j + 1 < nj && differs(i, j + 1, k))
        || (k > 0 && differs(i, j, k - 1))
        || (k + 1 < nk && differs(i, j, k + 1))
}

fn slice_areas_from_h(h: &ScalarField) -> SliceAreas {
    let (ni, nj, nk) = h.dims();
    let mut ax = vec![0.0f64; ni];
    let mut ay = vec![0.0f64; nj];
    let mut az = vec![0.0f64; nk];
    for (i, j, k) in h.coords() {
        if h.get(i, j, k) > 0.0 {
            ax[i] += 1.0;
            ay[j] += 1.0;
            az[k] += 1.0;
        }
    }
    let centered_abs_change = |a: &[f64]| -> Vec<f64> {
        let n = a.len();
        (0..n)
            .map(|x| {
                let lo = a[x.saturating_sub(1)];
                let hi = a[(x + 1).min(n - 1)];
                (hi - lo).abs() / 2.0
            })
            .collect()
    };
    let dax = centered_abs_change(&ax);
    let day = centered_abs_change(&ay);
    let daz = centered_abs_change(&az);
    SliceAreas { ax, ay, az, dax, day, daz }
}

/// Computes the global image statistics of `m_sigma` over the positive
/// region of `u`.
pub fn global_image(u: &ScalarField, m_sigma: &ScalarField) -> Result<GlobalImage> {
    same_dims(u.dims(), m_sigma.dims(), "global_image")?;
    let ctx = ShapeContext::new(u)?;
    Ok(global_image_with(&ctx, m_sigma))
}

pub(crate) fn global_image_with(ctx: &ShapeContext, m_sigma: &ScalarField) -> GlobalImage {
    let volume = ctx.shape.volume;
    let length = ctx.shape.boundary_length;

    let (mean_inside, std_inside) = if volume > 0.0 {
        let mut sum = 0.0f64;
        for (i, j, k) in ctx.h.coords() {
            if ctx.h.get(i, j, k) > 0.0 {
                sum += m_sigma.get(i, j, k);
            }
        }
        let mean = sum / volume;
        let mut var = 0.0f64;
        for (i, j, k) in ctx.h.coords() {
            if ctx.h.get(i, j, k) > 0.0 {
                var += (m_sigma.get(i, j, k) - mean).powi(2);
            }
        }
        (mean, (var / volume).sqrt())
    } else {
        (0.0, 0.0)
    };

    let (avg_edge, mean_on_boundary) = if length > 0.0 {
        let mut edge_sum = 0.0f64;
        let mut val_sum = 0.0f64;
        for (i, j, k) in ctx.h.coords() {
            let w = ctx.dh_norm.get(i, j, k);
            if w == 0.0 {
                continue;
            }
            let (a, b, c) = gradient_at(m_sigma, i, j, k, BoundaryMode::OneSided);
            edge_sum += (a * a + b * b + c * c).sqrt() * w;
            val_sum += m_sigma.get(i, j, k) * w;
        }
        (edge_sum / length, val_sum / length)
    } else {
        (0.0, 0.0)
    };

    GlobalImage {
        mean_inside,
        std_inside,
        avg_edge,
        mean_on_boundary,
        degenerate: volume == 0.0 || length == 0.0,
    }
}
