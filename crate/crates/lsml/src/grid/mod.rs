//! Dense 3D field containers and shared numerical kernels.
//!
//! Everything here is a pure function of immutable inputs and safe to call
//! concurrently on shared fields. Voxel spacing is fixed at 1.0 per axis;
//! data is assumed resampled to an isotropic grid before it reaches these
//! kernels.

mod components;
mod distance;
mod field;
mod gradient;
mod interp;
pub mod io;
mod smooth;

pub use components::{component_nearest, connected_components, Component, LabelField};
pub use distance::signed_distance;
pub use field::{BoolMask, Coord, Dims, ScalarField, VectorField};
pub use gradient::{central_gradient, gradient_at, BoundaryMode};
pub use interp::trilinear;
pub use smooth::gaussian_smooth;

pub(crate) use field::same_dims;
pub(crate) use interp::trilinear_clamped;
