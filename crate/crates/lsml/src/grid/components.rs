//! Connected component labeling with 6-connectivity.

use super::field::{BoolMask, Coord, Dims};

/// One connected component of true voxels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Label assigned in the label field (1-based; 0 is background).
    pub label: u32,
    pub voxel_count: usize,
}

/// Voxel labels: 0 for false voxels, 1..=n for component membership.
#[derive(Debug, Clone)]
pub struct LabelField {
    dims: Dims,
    labels: Vec<u32>,
}

impl LabelField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        self.labels[(i * self.dims.1 + j) * self.dims.2 + k]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Mask of the voxels carrying `label`.
    pub fn mask_of(&self, label: u32) -> BoolMask {
        BoolMask::from_vec(self.dims, self.labels.iter().map(|&l| l == label).collect())
            .expect("label field length matches dims")
    }
}

/// Labels the face-connected components of `m`. Components are numbered in
/// order of their lexicographically smallest voxel, so the labeling is
/// deterministic.
pub fn connected_components(m: &BoolMask) -> (LabelField, Vec<Component>) {
    let (ni, nj, nk) = m.dims();
    let idx = |i: usize, j: usize, k: usize| (i * nj + j) * nk + k;
    let mut labels = vec![0u32; m.len()];
    let mut components = Vec::new();
    let mut stack: Vec<Coord> = Vec::new();

    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                if !m.get(i, j, k) || labels[idx(i, j, k)] != 0 {
                    continue;
                }
                let label = components.len() as u32 + 1;
                let mut count = 0usize;
                labels[idx(i, j, k)] = label;
                stack.push((i, j, k));
                while let Some((a, b, c)) = stack.pop() {
                    count += 1;
                    let mut visit = |x: usize, y: usize, z: usize| {
                        if m.get(x, y, z) && labels[idx(x, y, z)] == 0 {
                            labels[idx(x, y, z)] = label;
                            stack.push((x, y, z));
                        }
                    };
                    if a > 0 {
                        visit(a - 1, b, c);
                    }
                    if a + 1 < ni {
                        visit(a + 1, b, c);
                    }
                    if b > 0 {
                        visit(a, b - 1, c);
                    }
                    if b + 1 < nj {
                        visit(a, b + 1, c);
                    }
                    if c > 0 {
                        visit(a, b, c - 1);
                    }
                    if c + 1 < nk {
                        visit(a, b, c + 1);
                    }
                }
                components.push(Component { label, voxel_count: count });
            }
        }
    }
    (LabelField { dims: m.dims(), labels }, components)
}

/// Label of the component whose closest member voxel is nearest `point`
/// (Euclidean, voxel centers). Ties go to the smaller label; returns `None`
/// when there are no components.
pub fn component_nearest(labels: &LabelField, point: (f64, f64, f64)) -> Option<u32> {
    let (ni, nj, nk) = labels.dims();
    let mut best: Option<(f64, u32)> = None;
    for i in 0..ni {
        for j in 0..nj {
            for k in 0..nk {
                let label = labels.get(i, j, k);
                if label == 0 {
                    continue;
                }
                let d = (i as f64 - point.0).powi(2)
                    + (j as f64 - point.1).powi(2)
                    + (k as f64 - point.2).powi(2);
                let better = match best {
                    None => true,
                    Some((bd, bl)) => d < bd || (d == bd && label < bl),
                };
                if better {
                    best = Some((d, label));
                }
            }
        }
    }
    best.map(|(_, l)| l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_neighbors_are_one_component() {
        let m = BoolMask::from_fn((3, 3, 3), |i, j, k| (i, j, k) == (0, 0, 0) || (i, j, k) == (1, 0, 0))
            .unwrap();
        let (_, comps) = connected_components(&m);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].voxel_count, 2);
    }

    #[test]
    fn diagonal_voxels_are_two_components() {
        let m = BoolMask::from_fn((3, 3, 3), |i, j, k| (i, j, k) == (0, 0, 0) || (i, j, k) == (1, 1, 0))
            .unwrap();
        let (_, comps) = connected_components(&m);
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn nearest_component_to_query() {
        // Two separated 2x2x2 blocks; query at the center of block A.
        let m = BoolMask::from_fn((10, 4, 4), |i, j, k| {
            (i < 2 || (7..9).contains(&i)) && j < 2 && k < 2
        })
        .unwrap();
        let (labels, comps) = connected_components(&m);
        assert_eq!(comps.len(), 2);
        let near_a = component_nearest(&labels, (0.5, 0.5, 0.5)).unwrap();
        let near_b = component_nearest(&labels, (7.5, 0.5, 0.5)).unwrap();
        assert_ne!(near_a, near_b);
        assert!(labels.mask_of(near_a).get(0, 0, 0));
        assert!(labels.mask_of(near_b).get(7, 0, 0));
    }

    #[test]
    fn labels_partition_the_mask() {
        let m = BoolMask::from_fn((5, 5, 5), |i, j, k| (i + j + k) % 3 == 0).unwrap();
        let (labels, comps) = connected_components(&m);
        let mut union = 0usize;
        for c in &comps {
            union += labels.mask_of(c.label).count_true();
            assert_eq!(labels.mask_of(c.label).count_true(), c.voxel_count);
        }
        assert_eq!(union, m.count_true());
        for (idx, &l) in labels.labels().iter().enumerate() {
            assert_eq!(l != 0, m.data()[idx]);
        }
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = BoolMask::filled((3, 3, 3), false).unwrap();
        let (labels, comps) = connected_components(&m);
        assert!(comps.is_empty());
        assert_eq!(component_nearest(&labels, (1.0, 1.0, 1.0)), None);
    }
}
