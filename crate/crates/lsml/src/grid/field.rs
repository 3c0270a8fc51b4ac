//! Dense 3D field containers.
//!
//! Fields are stored row-major with the `k` index fastest, i.e. the flat
//! index of voxel `(i, j, k)` on a `(ni, nj, nk)` grid is
//! `(i * nj + j) * nk + k`. Voxel spacing is 1.0 along every axis.

use crate::error::{Error, Result};

/// Voxel coordinate `(i, j, k)`.
pub type Coord = (usize, usize, usize);

/// Grid dimensions `(ni, nj, nk)`.
pub type Dims = (usize, usize, usize);

/// Dense 3D grid of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dims: Dims,
    data: Vec<f64>,
}

/// Dense 3D grid of booleans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMask {
    dims: Dims,
    data: Vec<bool>,
}

/// Per-axis components of a vector field, one [`ScalarField`] each.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub di: ScalarField,
    pub dj: ScalarField,
    pub dk: ScalarField,
}

fn check_dims(dims: Dims) -> Result<usize> {
    let (ni, nj, nk) = dims;
    if ni == 0 || nj == 0 || nk == 0 {
        return Err(Error::Dimension(format!(
            "dimensions must be positive, got {ni}x{nj}x{nk}"
        )));
    }
    ni.checked_mul(nj)
        .and_then(|v| v.checked_mul(nk))
        .ok_or_else(|| Error::Dimension(format!("dimensions overflow: {ni}x{nj}x{nk}")))
}

impl ScalarField {
    /// Field of the given dimensions filled with `value`.
    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self { dims, data: vec![value; len] })
    }

    /// All-zero field.
    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::filled(dims, 0.0)
    }

    /// Wraps raw data; its length must equal `ni * nj * nk` and every value
    /// must be finite.
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                dims.0,
                dims.1,
                dims.2
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Argument("field contains non-finite values".into()));
        }
        Ok(Self { dims, data })
    }

    /// Builds a field by evaluating `f` at every coordinate.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let len = check_dims(dims)?;
        let (ni, nj, nk) = dims;
        let mut data = Vec::with_capacity(len);
        for i in 0..ni {
            for j in 0..nj {
                for k in 0..nk {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::from_vec(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Coordinates in lexicographic `(i, j, k)` order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        coords_iter(self.dims)
    }

    /// True where the field is strictly positive.
    pub fn positive_region(&self) -> BoolMask {
        BoolMask {
            dims: self.dims,
            data: self.data.iter().map(|&v| v > 0.0).collect(),
        }
    }
}

impl BoolMask {
    pub fn filled(dims: Dims, value: bool) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self { dims, data: vec![value; len] })
    }

    pub fn from_vec(dims: Dims, data: Vec<bool>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "data length {} does not match {}x{}x{}",
                data.len(),
                dims.0,
                dims.1,
                dims.2
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let len = check_dims(dims)?;
        let (ni, nj, nk) = dims;
        let mut data = Vec::with_capacity(len);
        for i in 0..ni {
            for j in 0..nj {
                for k in 0..nk {
                    data.push(f(i, j, k));
                }
            }
        }
        Self::from_vec(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        let idx = self.index(i, j, k);
        self.data[idx] = value;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [bool] {
        &mut self.data
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        coords_iter(self.dims)
    }

    /// Number of true voxels.
    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// 0/1 indicator field.
    pub fn to_scalar(&self) -> ScalarField {
        ScalarField {
            dims: self.dims,
            data: self.data.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        }
    }
}

impl VectorField {
    /// Bundles three component fields; all must share dimensions.
    pub fn new(di: ScalarField, dj: ScalarField, dk: ScalarField) -> Result<Self> {
        if di.dims() != dj.dims() || di.dims() != dk.dims() {
            return Err(Error::Dimension(
                "vector field components have mismatched dimensions".into(),
            ));
        }
        Ok(Self { di, dj, dk })
    }

    pub fn dims(&self) -> Dims {
        self.di.dims()
    }

    /// Euclidean norm of the vector at `(i, j, k)`.
    pub fn norm(&self, i: usize, j: usize, k: usize) -> f64 {
        let a = self.di.get(i, j, k);
        let b = self.dj.get(i, j, k);
        let c = self.dk.get(i, j, k);
        (a * a + b * b + c * c).sqrt()
    }
}

fn coords_iter(dims: Dims) -> impl Iterator<Item = Coord> {
    let (ni, nj, nk) = dims;
    (0..ni).flat_map(move |i| (0..nj).flat_map(move |j| (0..nk).map(move |k| (i, j, k))))
}

/// Requires both dims to be equal; used by binary grid operations.
pub(crate) fn same_dims(a: Dims, b: Dims, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!(
            "{what}: {}x{}x{} vs {}x{}x{}",
            a.0, a.1, a.2, b.0, b.1, b.2
        )));
    }
    Ok(())
}
