use serde::{Deserialize, Serialize};

use super::Mask;
use crate::error::{Error, Result};
use crate::volgrid::{Geometry, Index3, VolumeGrid};

/// Inclusive index box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Index3,
    pub hi: Index3,
    pub margin_mm: f64,
}

impl BoundingBox {
    pub fn full(dims: Index3) -> Self {
        BoundingBox {
            lo: [0; 3],
            hi: [dims[0] - 1, dims[1] - 1, dims[2] - 1],
            margin_mm: 0.0,
        }
    }

    pub fn dims(&self) -> Index3 {
        [
            self.hi[0] - self.lo[0] + 1,
            self.hi[1] - self.lo[1] + 1,
            self.hi[2] - self.lo[2] + 1,
        ]
    }

    pub fn voxel_count(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn contains(&self, idx: Index3) -> bool {
        (0..3).all(|a| self.lo[a] <= idx[a] && idx[a] <= self.hi[a])
    }

    fn check(&self, dims: Index3) -> Result<()> {
        if (0..3).any(|a| self.lo[a] > self.hi[a] || self.hi[a] >= dims[a]) {
            return Err(Error::BoxOutOfRange {
                lo: self.lo,
                hi: self.hi,
                dims,
            });
        }
        Ok(())
    }

    fn cropped_geometry(&self, g: &Geometry) -> Result<Geometry> {
        self.check(g.dims)?;
        let origin = g.position(self.lo);
        Geometry::new(self.dims(), g.spacing, origin)
    }
}

/// Voxels of margin per axis: `ceil(margin_mm / spacing)`.
///
/// Ratios within 1e-9 of an integer are snapped first so that e.g. a
/// margin of exactly two voxel spacings is not inflated by rounding.
pub fn margin_voxels(margin_mm: f64, spacing: [f64; 3]) -> Index3 {
    spacing.map(|s| {
        let r = margin_mm / s;
        let snapped = if (r - r.round()).abs() < 1e-9 {
            r.round()
        } else {
            r
        };
        snapped.ceil().max(0.0) as usize
    })
}

/// Smallest box holding every foreground voxel, grown by `margin_mm` per
/// axis and clamped to the volume.
pub fn bounding_box_of(mask: &Mask, margin_mm: f64) -> Result<BoundingBox> {
    if !(margin_mm >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "margin must be >= 0, got {margin_mm}"
        )));
    }
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for v in mask.voxels() {
        any = true;
        for a in 0..3 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    let pad = margin_voxels(margin_mm, mask.spacing());
    let dims = mask.dims();
    for a in 0..3 {
        lo[a] = lo[a].saturating_sub(pad[a]);
        hi[a] = (hi[a] + pad[a]).min(dims[a] - 1);
    }
    Ok(BoundingBox { lo, hi, margin_mm })
}

fn crop_values<T: Copy>(values: &[T], g: &Geometry, b: &BoundingBox) -> Vec<T> {
    let [nz, ny, nx] = b.dims();
    let mut out = Vec::with_capacity(nz * ny * nx);
    for z in b.lo[0]..=b.hi[0] {
        for y in b.lo[1]..=b.hi[1] {
            let start = g.index([z, y, b.lo[2]]);
            out.extend_from_slice(&values[start..start + nx]);
        }
    }
    out
}

/// Sub-volume inside `b`; the origin moves to the position of `b.lo`.
pub fn crop(grid: &VolumeGrid, b: &BoundingBox) -> Result<VolumeGrid> {
    let geometry = b.cropped_geometry(grid.geometry())?;
    VolumeGrid::new(
        geometry,
        grid.kind(),
        crop_values(grid.data(), grid.geometry(), b),
    )
}

pub fn crop_mask(mask: &Mask, b: &BoundingBox) -> Result<Mask> {
    let geometry = b.cropped_geometry(mask.geometry())?;
    Mask::new(geometry, crop_values(mask.bits(), mask.geometry(), b))
}
