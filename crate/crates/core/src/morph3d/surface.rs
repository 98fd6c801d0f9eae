use super::{Connectivity, Mask};
use crate::volgrid::Index3;

/// Foreground voxels with at least one face neighbour that is background or
/// outside the volume, in raster order.
pub fn surface_voxels(mask: &Mask) -> Vec<Index3> {
    let g = *mask.geometry();
    let faces = Connectivity::Six.offsets();
    mask.voxels()
        .filter(|&v| {
            faces.iter().any(|&o| match g.offset(v, o) {
                Some(n) => !mask.get(n),
                None => true,
            })
        })
        .collect()
}
