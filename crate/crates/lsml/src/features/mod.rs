//! Feature maps for the velocity models.
//!
//! Feature Map 1 is a small generic set: global shape descriptors plus image
//! statistics at a fine and a coarse smoothing scale (18 columns with the
//! default scales). Feature Map 2 extends it with "glocal" features — per
//! coordinate quantities computed against previously derived globals, most
//! notably image samples along the inward/outward normal and along the ray
//! to the center of mass (109 columns with the default scales).
//!
//! Rows are assembled per coordinate with all global quantities computed
//! once; the output is a pure function of the inputs, bitwise reproducible
//! regardless of internal parallelism.

mod global;
mod local;

pub use global::{global_image, global_shape, slice_areas, GlobalImage, GlobalShape, ShapeContext, SliceAreas};
pub use local::{local_image, local_shape, LocalImage, LocalShape, RAY_SAMPLES};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{gaussian_smooth, gradient_at, same_dims, BoundaryMode, Coord, ScalarField};

/// Default smoothing scales: fine (no smoothing) and coarse.
pub const DEFAULT_SIGMAS: [f64; 2] = [0.0, 3.0];

/// Which feature set a matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMap {
    Fm1,
    Fm2,
}

impl FeatureMap {
    /// Number of columns for `n_sigmas` smoothing scales.
    pub fn width(self, n_sigmas: usize) -> usize {
        let fm1 = 10 + 4 * n_sigmas;
        match self {
            FeatureMap::Fm1 => fm1,
            FeatureMap::Fm2 => fm1 + n_sigmas + 9 + 40 * n_sigmas,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMap::Fm1 => "fm1",
            FeatureMap::Fm2 => "fm2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fm1" => Ok(FeatureMap::Fm1),
            "fm2" => Ok(FeatureMap::Fm2),
            other => Err(Error::Argument(format!("unknown feature map '{other}'"))),
        }
    }
}

impl std::fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named column blocks of Feature Map 2 with their widths, in column order.
/// With the default two scales the widths decompose 109 as
/// 18+2+1+1+1+3+3+40+40.
pub fn fm2_blocks(n_sigmas: usize) -> Vec<(&'static str, usize)> {
    vec![
        ("fm1", FeatureMap::Fm1.width(n_sigmas)),
        ("boundary_mean", n_sigmas),
        ("dist_mean", 1),
        ("dist_std", 1),
        ("dist_max", 1),
        ("slice_area", 3),
        ("slice_darea", 3),
        ("normal", 20 * n_sigmas),
        ("ray", 20 * n_sigmas),
    ]
}

/// Stable column identifiers, e.g. `fm2.normal.s0.in.3`.
pub fn column_names(map: FeatureMap, sigmas: &[f64]) -> Vec<String> {
    let p = map.as_str();
    let mut names = Vec::with_capacity(map.width(sigmas.len()));
    names.push(format!("{p}.volume"));
    names.push(format!("{p}.length"));
    names.push(format!("{p}.iso"));
    for order in ["p1", "p2"] {
        for axis in ["i", "j", "k"] {
            names.push(format!("{p}.moment.{order}.{axis}"));
        }
    }
    names.push(format!("{p}.dist_com"));
    for stat in ["mean_inside", "std_inside", "value", "edge"] {
        for s in sigmas {
            names.push(format!("{p}.{stat}.s{s}"));
        }
    }
    if map == FeatureMap::Fm2 {
        for s in sigmas {
            names.push(format!("{p}.boundary_mean.s{s}"));
        }
        for stat in ["dist_mean", "dist_std", "dist_max"] {
            names.push(format!("{p}.{stat}"));
        }
        for axis in ["x", "y", "z"] {
            names.push(format!("{p}.slice_area.{axis}"));
        }
        for axis in ["x", "y", "z"] {
            names.push(format!("{p}.slice_darea.{axis}"));
        }
        for ray in ["normal", "ray"] {
            for s in sigmas {
                for dir in ["in", "out"] {
                    for t in 1..=RAY_SAMPLES {
                        names.push(format!("{p}.{ray}.s{s}.{dir}.{t}"));
                    }
                }
            }
        }
    }
    names
}

/// A feature matrix: one row per requested coordinate, columns in the fixed
/// order of [`column_names`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    map: FeatureMap,
    sigmas: Vec<f64>,
    coords: Vec<Coord>,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn map(&self) -> FeatureMap {
        self.map
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn n_rows(&self) -> usize {
        self.coords.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Flat row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV dump: `i,j,k` then the canonical column names.
    pub fn write_csv(&self, w: &mut impl std::io::Write) -> Result<()> {
        let names = column_names(self.map, &self.sigmas);
        write!(w, "i,j,k")?;
        for n in &names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (r, &(i, j, k)) in self.coords.iter().enumerate() {
            write!(w, "{i},{j},{k}")?;
            for v in self.row(r) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Precomputed state for assembling feature rows of one `(u, image)` pair:
/// smoothed images, global shape context, and per-scale image statistics.
pub struct Extractor<'a> {
    u: &'a ScalarField,
    smoothed: &'a [ScalarField],
    sigmas: &'a [f64],
    ctx: ShapeContext,
    images: Vec<GlobalImage>,
}

impl<'a> Extractor<'a> {
    /// `smoothed[i]` must be the image smoothed at `sigmas[i]`.
    pub fn new(u: &'a ScalarField, smoothed: &'a [ScalarField], sigmas: &'a [f64]) -> Result<Self> {
        if smoothed.is_empty() || smoothed.len() != sigmas.len() {
            return Err(Error::Argument(
                "one smoothed image per sigma is required".into(),
            ));
        }
        for m in smoothed {
            same_dims(u.dims(), m.dims(), "feature extraction")?;
        }
        let ctx = ShapeContext::new(u)?;
        let images = smoothed
            .iter()
            .map(|m| global::global_image_with(&ctx, m))
            .collect();
        Ok(Self { u, smoothed, sigmas, ctx, images })
    }

    pub fn shape(&self) -> &GlobalShape {
        &self.ctx.shape
    }

    fn fill_row(&self, map: FeatureMap, coord: Coord, out: &mut [f64]) -> Result<()> {
        let gs = &self.ctx.shape;
        let sa = &self.ctx.slices;
        let ls = local_shape(self.u, gs, sa, coord)?;
        let s = self.smoothed.len();

        out[0] = gs.volume;
        out[1] = gs.boundary_length;
        out[2] = gs.isoperimetric;
        out[3..9].copy_from_slice(&gs.moments);
        out[9] = ls.dist_com;
        for (si, gi) in self.images.iter().enumerate() {
            out[10 + si] = gi.mean_inside;
            out[10 + s + si] = gi.std_inside;
        }
        match map {
            FeatureMap::Fm1 => {
                let (i, j, k) = coord;
                for (si, m) in self.smoothed.iter().enumerate() {
                    out[10 + 2 * s + si] = m.get(i, j, k);
                    let (a, b, c) = gradient_at(m, i, j, k, BoundaryMode::OneSided);
                    out[10 + 3 * s + si] = (a * a + b * b + c * c).sqrt();
                }
            }
            FeatureMap::Fm2 => {
                let base = 10 + 4 * s;
                for (si, gi) in self.images.iter().enumerate() {
                    out[base + si] = gi.mean_on_boundary;
                }
                out[base + s] = gs.dist_mean;
                out[base + s + 1] = gs.dist_std;
                out[base + s + 2] = gs.dist_max;
                out[base + s + 3..base + s + 6].copy_from_slice(&ls.slice_area);
                out[base + s + 6..base + s + 9].copy_from_slice(&ls.slice_darea);
                let normal_base = base + s + 9;
                let ray_base = normal_base + 20 * s;
                for (si, m) in self.smoothed.iter().enumerate() {
                    let li = local_image(self.u, m, gs, coord)?;
                    out[10 + 2 * s + si] = li.value;
                    out[10 + 3 * s + si] = li.edge;
                    let nb = normal_base + 20 * si;
                    out[nb..nb + 10].copy_from_slice(&li.normal_in);
                    out[nb + 10..nb + 20].copy_from_slice(&li.normal_out);
                    let rb = ray_base + 20 * si;
                    out[rb..rb + 10].copy_from_slice(&li.ray_in);
                    out[rb + 10..rb + 20].copy_from_slice(&li.ray_out);
                }
            }
        }
        Ok(())
    }

    /// Assembles rows for `coords`, in order.
    pub fn assemble(&self, map: FeatureMap, coords: &[Coord]) -> Result<FeatureMatrix> {
        if coords.is_empty() {
            return Err(Error::Argument("assemble requires at least one coordinate".into()));
        }
        let n_cols = map.width(self.smoothed.len());
        let mut values = vec![0.0f64; coords.len() * n_cols];
        // Rows are independent; chunked fill keeps output identical for any
        // thread count.
        let results: Vec<Result<()>> = values
            .par_chunks_mut(n_cols)
            .zip(coords.par_iter())
            .map(|(row, &c)| self.fill_row(map, c, row))
            .collect();
        for r in results {
            r?;
        }
        Ok(FeatureMatrix {
            map,
            sigmas: self.sigmas.to_vec(),
            coords: coords.to_vec(),
            n_cols,
            values,
        })
    }
}

/// Smooths `m` once per scale, computes the globals once, and fills one
/// feature row per coordinate.
pub fn assemble(
    u: &ScalarField,
    m: &ScalarField,
    map: FeatureMap,
    coords: &[Coord],
    sigmas: &[f64],
) -> Result<FeatureMatrix> {
    let smoothed = smooth_scales(m, sigmas)?;
    Extractor::new(u, &smoothed, sigmas)?.assemble(map, coords)
}

/// The per-scale smoothed images used by [`assemble`].
pub fn smooth_scales(m: &ScalarField, sigmas: &[f64]) -> Result<Vec<ScalarField>> {
    if sigmas.is_empty() {
        return Err(Error::Argument("at least one sigma is required".into()));
    }
    sigmas.iter().map(|&s| gaussian_smooth(m, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{signed_distance, BoolMask};

    fn ball_mask(dims: usize, c: f64, r: f64) -> BoolMask {
        BoolMask::from_fn((dims, dims, dims), |i, j, k| {
            ((i as f64 - c).powi(2) + (j as f64 - c).powi(2) + (k as f64 - c).powi(2)).sqrt() <= r
        })
        .unwrap()
    }

    fn test_image(dims: usize) -> ScalarField {
        ScalarField::from_fn((dims, dims, dims), |i, j, k| {
            ((i * 13 + j * 7 + k * 3) % 17) as f64 * 0.25 - 1.0
        })
        .unwrap()
    }

    #[test]
    fn widths_match_the_tables() {
        assert_eq!(FeatureMap::Fm1.width(2), 18);
        assert_eq!(FeatureMap::Fm2.width(2), 109);
        let blocks = fm2_blocks(2);
        let widths: Vec<usize> = blocks.iter().map(|&(_, w)| w).collect();
        assert_eq!(widths, vec![18, 2, 1, 1, 1, 3, 3, 40, 40]);
        assert_eq!(widths.iter().sum::<usize>(), 109);
    }

    #[test]
    fn names_match_widths() {
        let sigmas = [0.0, 3.0];
        assert_eq!(column_names(FeatureMap::Fm1, &sigmas).len(), 18);
        let names = column_names(FeatureMap::Fm2, &sigmas);
        assert_eq!(names.len(), 109);
        assert_eq!(names[0], "fm2.volume");
        // 1-based column 30 is the first normal sample
        assert_eq!(names[29], "fm2.normal.s0.in.1");
        assert_eq!(names[31], "fm2.normal.s0.in.3");
        assert_eq!(names[69], "fm2.ray.s0.in.1");
        assert_eq!(names[108], "fm2.ray.s3.out.10");
    }

    #[test]
    fn duplicate_coords_give_identical_rows() {
        let u = signed_distance(&ball_mask(21, 10.0, 6.0)).unwrap();
        let m = test_image(21);
        let fm = assemble(&u, &m, FeatureMap::Fm2, &[(4, 10, 10), (4, 10, 10)], &[0.0, 3.0])
            .unwrap();
        assert_eq!(fm.row(0), fm.row(1));
    }

    #[test]
    fn global_columns_are_constant_across_rows() {
        let u = signed_distance(&ball_mask(21, 10.0, 6.0)).unwrap();
        let m = test_image(21);
        let coords: Vec<_> = crate::levelset::narrow_band(&u, 2.0).unwrap();
        let fm = assemble(&u, &m, FeatureMap::Fm2, &coords, &[0.0, 3.0]).unwrap();
        // 1-based global columns: 1-9, 11-14, 19-23
        let globals: Vec<usize> = (0..9)
            .chain(10..14)
            .chain(18..23)
            .collect();
        for r in 1..fm.n_rows() {
            for &c in &globals {
                assert_eq!(fm.row(r)[c], fm.row(0)[c], "column {c} varies");
            }
        }
    }

    #[test]
    fn ray_columns_equal_value_when_dm_is_zero() {
        // Ball centered on a grid point: the center voxel coincides with the
        // center of mass, so D_m = 0 there and all 80 sample columns equal
        // the sigma-matched image value.
        let u = signed_distance(&ball_mask(21, 10.0, 6.0)).unwrap();
        let m = test_image(21);
        let fm = assemble(&u, &m, FeatureMap::Fm2, &[(10, 10, 10)], &[0.0, 3.0]).unwrap();
        let row = fm.row(0);
        assert_eq!(row[9], 0.0, "D_m must vanish at the center");
        let value_s0 = row[14];
        let value_s3 = row[15];
        for block in [29, 69] {
            for t in 0..20 {
                assert_eq!(row[block + t], value_s0);
                assert_eq!(row[block + 20 + t], value_s3);
            }
        }
    }

    #[test]
    fn assemble_is_bitwise_deterministic() {
        let u = signed_distance(&ball_mask(19, 9.0, 5.0)).unwrap();
        let m = test_image(19);
        let coords: Vec<_> = crate::levelset::narrow_band(&u, 3.0).unwrap();
        let a = assemble(&u, &m, FeatureMap::Fm2, &coords, &[0.0, 2.0]).unwrap();
        let b = assemble(&u, &m, FeatureMap::Fm2, &coords, &[0.0, 2.0]).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn translation_shifts_only_moment_columns() {
        // Content far from the faces; small sigma so smoothing never touches
        // the border renormalization zone.
        let dims = 25;
        let sigmas = [0.0, 1.0];
        let offset = (2usize, 1usize, 3usize);
        let mask_a = ball_mask(dims, 9.0, 4.0);
        let mask_b = BoolMask::from_fn((dims, dims, dims), |i, j, k| {
            i >= offset.0
                && j >= offset.1
                && k >= offset.2
                && mask_a.get(i - offset.0, j - offset.1, k - offset.2)
        })
        .unwrap();
        let img_a = ScalarField::from_fn((dims, dims, dims), |i, j, k| {
            let (x, y, z) = (i as f64 - 9.0, j as f64 - 9.0, k as f64 - 9.0);
            (-(x * x + y * y + z * z) / 30.0).exp()
        })
        .unwrap();
        let img_b = ScalarField::from_fn((dims, dims, dims), |i, j, k| {
            if i >= offset.0 && j >= offset.1 && k >= offset.2 {
                img_a.get(i - offset.0, j - offset.1, k - offset.2)
            } else {
                0.0
            }
        })
        .unwrap();
        let ua = signed_distance(&mask_a).unwrap();
        let ub = signed_distance(&mask_b).unwrap();
        let coord_a = (13usize, 9usize, 9usize);
        let coord_b = (coord_a.0 + offset.0, coord_a.1 + offset.1, coord_a.2 + offset.2);
        let fa = assemble(&ua, &img_a, FeatureMap::Fm2, &[coord_a], &sigmas).unwrap();
        let fb = assemble(&ub, &img_b, FeatureMap::Fm2, &[coord_b], &sigmas).unwrap();
        let (ra, rb) = (fa.row(0), fb.row(0));
        let d = [offset.0 as f64, offset.1 as f64, offset.2 as f64];
        for c in 0..fa.n_cols() {
            match c {
                // p=1 moments shift by the offset
                3 | 4 | 5 => {
                    assert!((rb[c] - (ra[c] + d[c - 3])).abs() < 1e-9, "col {c}")
                }
                // p=2 moments transform as m2 + 2 d m1 + d^2
                6 | 7 | 8 => {
                    let expect = ra[c] + 2.0 * d[c - 6] * ra[c - 3] + d[c - 6] * d[c - 6];
                    assert!((rb[c] - expect).abs() < 1e-6, "col {c}: {} vs {expect}", rb[c]);
                }
                _ => assert!(
                    (ra[c] - rb[c]).abs() < 1e-9,
                    "col {c} changed: {} vs {}",
                    ra[c],
                    rb[c]
                ),
            }
        }
    }

    #[test]
    fn empty_coords_rejected() {
        let u = signed_distance(&ball_mask(9, 4.0, 2.0)).unwrap();
        let m = test_image(9);
        assert!(assemble(&u, &m, FeatureMap::Fm1, &[], &[0.0]).is_err());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let u = signed_distance(&ball_mask(9, 4.0, 2.0)).unwrap();
        let m = test_image(9);
        let fm = assemble(&u, &m, FeatureMap::Fm1, &[(4, 4, 4), (5, 4, 4)], &[0.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        fm.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("i,j,k,fm1.volume,fm1.length,fm1.iso"));
        assert_eq!(lines[0].split(',').count(), 3 + 18);
    }
}
