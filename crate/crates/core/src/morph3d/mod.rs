//! Binary morphology and geometry on voxel lattices.

mod bbox;
mod components;
mod dilate;
mod distance;
mod surface;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volgrid::{Geometry, Index3, VolumeGrid, VolumeKind};

pub use bbox::{bounding_box_of, crop, crop_mask, BoundingBox};
pub use components::{connected_components, Component, ComponentSet};
pub use dilate::dilate;
pub use distance::{directed_surface_distances, squared_distance_map, DistanceBackend};
pub use surface::surface_voxels;

/// Voxel adjacency: face (6), face+edge (18) or face+edge+corner (26).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Six,
    Eighteen,
    #[default]
    TwentySix,
}

/// Dilation and labelling both use the unit neighbourhood of a connectivity.
pub type StructuringElement = Connectivity;

impl Connectivity {
    /// Neighbour offsets, excluding the origin, in raster order.
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let max_l1 = match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        };
        let mut out = Vec::with_capacity(26);
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let l1 = dz.abs() + dy.abs() + dx.abs();
                    if l1 > 0 && l1 <= max_l1 {
                        out.push([dz, dy, dx]);
                    }
                }
            }
        }
        out
    }

    pub fn value(self) -> u8 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 6, 18 or 26, got {other}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        c.value()
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let v: u8 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("connectivity {s:?}")))?;
        Connectivity::try_from(v)
    }
}

/// Binary voxel mask on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    geometry: Geometry,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(geometry: Geometry, bits: Vec<bool>) -> Result<Self> {
        geometry.validate()?;
        if bits.len() != geometry.len() {
            return Err(Error::PayloadLength {
                expected: geometry.len(),
                found: bits.len(),
            });
        }
        Ok(Mask { geometry, bits })
    }

    pub fn empty(geometry: Geometry) -> Self {
        Mask {
            bits: vec![false; geometry.len()],
            geometry,
        }
    }

    pub fn from_indices(geometry: Geometry, voxels: impl IntoIterator<Item = Index3>) -> Self {
        let mut m = Mask::empty(geometry);
        for v in voxels {
            m.set(v, true);
        }
        m
    }

    /// Strict conversion: every value must be exactly 0 or 1.
    pub fn from_grid(grid: &VolumeGrid) -> Result<Self> {
        if let Some(&bad) = grid.data().iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(Error::NotBinary(bad));
        }
        Ok(Mask {
            geometry: *grid.geometry(),
            bits: grid.data().iter().map(|&v| v == 1.0).collect(),
        })
    }

    /// Semantic foreground: any value above zero.
    pub fn foreground_of(grid: &VolumeGrid) -> Self {
        Mask {
            geometry: *grid.geometry(),
            bits: grid.data().iter().map(|&v| v > 0.0).collect(),
        }
    }

    pub fn to_grid(&self) -> VolumeGrid {
        VolumeGrid::new(
            self.geometry,
            VolumeKind::Label,
            self.bits.iter().map(|&b| b as u8 as f32).collect(),
        )
        .expect("mask geometry already validated")
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dims(&self) -> Index3 {
        self.geometry.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geometry.spacing
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    #[inline]
    pub fn get(&self, idx: Index3) -> bool {
        self.bits[self.geometry.index(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: Index3, value: bool) {
        let i = self.geometry.index(idx);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set voxels in raster order.
    pub fn voxels(&self) -> impl Iterator<Item = Index3> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.geometry.coords(i))
    }

    /// Voxel-wise combination of two masks with the same dims.
    pub fn zip_with(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Result<Mask> {
        self.geometry.ensure_same_dims(&other.geometry)?;
        Ok(Mask {
            geometry: self.geometry,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}
