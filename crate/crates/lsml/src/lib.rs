//! Level-set segmentation with machine-learned velocity fields.
//!
//! A level-set function `u` evolves under `u_t = v * |grad u|`, where the
//! velocity `v` is not hand designed but regressed — per iteration — from
//! image and shape features against signed-distance targets. Training yields
//! a sequence of random-forest velocity models that is deployed by replaying
//! the same iteration on unseen volumes.
//!
//! Module map:
//! - [`grid`]: dense 3D fields and shared kernels (differences, smoothing,
//!   distance transform, components, interpolation, LSF1 files).
//! - [`levelset`]: upwind evolution, CFL step, redistancing, narrow band.
//! - [`features`]: the feature maps fed to the velocity models.
//! - [`forest`]: random-forest regression with out-of-bag bookkeeping and
//!   permutation importance.
//! - [`training`]: the iterative fitting loop, model persistence, and
//!   deployment on new volumes.
//! - [`init`]: seed-based segmentation initialization and its grid search.
//! - [`annotations`]: multi-reader contour rasterization, clustering, and
//!   consensus consolidation.
//! - [`synth`]: deterministic phantom generation for desk-scale benchmarks.
//! - [`eval`]: overlap metrics and report summaries.

pub mod annotations;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod grid;
pub mod init;
pub mod levelset;
pub mod synth;
pub mod training;

pub use error::{Error, Result};

/// Seed derivation used for nested deterministic streams: a splitmix64 step
/// of `seed + (n+1) * golden`, so distinct lanes never collide.
pub(crate) fn derive_seed(seed: u64, lane: u64) -> u64 {
    let mut z = seed
        .wrapping_add(lane.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: Vec<u64> = (0..1000).map(|i| super::derive_seed(42, i)).collect();
        let mut dedup = seeds.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(seeds.len(), dedup.len());
    }
}
