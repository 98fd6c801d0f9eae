//! Shared inputs for the criterion benchmarks.

use lymphkit_core::phantom::PhantomSpec;
use lymphkit_core::{Mask, VolumeGrid};

pub const SPACING: [f64; 3] = [3.0, 0.93, 0.93];

/// Ground-truth mask and image of a seeded random phantom.
pub fn phantom(dims: [usize; 3], nodes: usize) -> (Mask, VolumeGrid) {
    let case = PhantomSpec::random(7, dims, SPACING, nodes)
        .and_then(|s| s.generate())
        .expect("benchmark phantom");
    (case.gt, case.image)
}

/// The ground truth shifted by one voxel along x, as a stand-in prediction.
pub fn shifted(mask: &Mask) -> Mask {
    let g = *mask.geometry();
    Mask::from_indices(
        g,
        mask.voxels()
            .filter(|v| v[2] + 1 < g.dims[2])
            .map(|[z, y, x]| [z, y, x + 1]),
    )
}
