//! Volume data model, file I/O, resampling and intensity preprocessing.
//!
//! Arrays are stored z-major: the flat index of voxel `(z, y, x)` is
//! `(z * ny + y) * nx + x`, so `x` varies fastest. Spacing and origin triples
//! follow the same `(z, y, x)` order and are expressed in millimetres. The
//! origin is the physical position of the centre of voxel `(0, 0, 0)`.

mod intensity;
mod io;
mod nifti;
mod rawvol;
mod resample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use intensity::{clip_and_standardize, IntensityWindow};
pub use io::{read_volume, write_volume, VolumeFormat};
pub use resample::{resample, Interpolation};

/// Voxel index triple `(z, y, x)`.
pub type Index3 = [usize; 3];

/// Shape and physical placement of a voxel lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: Index3,
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Geometry {
    pub fn new(dims: Index3, spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        let g = Geometry {
            dims,
            spacing,
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    /// Unit-origin geometry, handy for tests and phantoms.
    pub fn with_spacing(dims: Index3, spacing: [f64; 3]) -> Result<Self> {
        Self::new(dims, spacing, [0.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidGrid(format!(
                "dims must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be finite and > 0, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "origin must be finite, got {:?}",
                self.origin
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, [z, y, x]: Index3) -> usize {
        (z * self.dims[1] + y) * self.dims[2] + x
    }

    #[inline]
    pub fn coords(&self, i: usize) -> Index3 {
        let plane = self.dims[1] * self.dims[2];
        let z = i / plane;
        let rem = i % plane;
        [z, rem / self.dims[2], rem % self.dims[2]]
    }

    /// Offset neighbour lookup; `None` when the step leaves the volume.
    #[inline]
    pub fn offset(&self, [z, y, x]: Index3, [dz, dy, dx]: [isize; 3]) -> Option<Index3> {
        let nz = z as isize + dz;
        let ny = y as isize + dy;
        let nx = x as isize + dx;
        if nz < 0
            || ny < 0
            || nx < 0
            || nz >= self.dims[0] as isize
            || ny >= self.dims[1] as isize
            || nx >= self.dims[2] as isize
        {
            None
        } else {
            Some([nz as usize, ny as usize, nx as usize])
        }
    }

    pub fn voxel_volume_mm3(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Physical position of a voxel centre in mm.
    pub fn position(&self, idx: Index3) -> [f64; 3] {
        [
            self.origin[0] + idx[0] as f64 * self.spacing[0],
            self.origin[1] + idx[1] as f64 * self.spacing[1],
            self.origin[2] + idx[2] as f64 * self.spacing[2],
        ]
    }

    /// Length of the diagonal of the physical extent (`dims * spacing`).
    pub fn physical_diagonal_mm(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.spacing)
            .map(|(&n, &s)| (n as f64 * s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn ensure_same_dims(&self, other: &Geometry) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                found: other.dims,
            });
        }
        Ok(())
    }
}

/// What the voxel values of a grid mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeKind {
    Intensity,
    Label,
    Tristate,
}

impl VolumeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VolumeKind::Intensity => "intensity",
            VolumeKind::Label => "label",
            VolumeKind::Tristate => "tristate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "intensity" => Some(VolumeKind::Intensity),
            "label" => Some(VolumeKind::Label),
            "tristate" => Some(VolumeKind::Tristate),
            _ => None,
        }
    }

    pub fn is_integral(self) -> bool {
        !matches!(self, VolumeKind::Intensity)
    }
}

/// A 3D scalar array with physical placement.
///
/// Values are stored as `f32`; label and tristate grids hold small
/// non-negative integers, which `f32` represents exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    geometry: Geometry,
    kind: VolumeKind,
    data: Vec<f32>,
}

impl VolumeGrid {
    pub fn new(geometry: Geometry, kind: VolumeKind, data: Vec<f32>) -> Result<Self> {
        geometry.validate()?;
        if data.len() != geometry.len() {
            return Err(Error::PayloadLength {
                expected: geometry.len(),
                found: data.len(),
            });
        }
        if kind.is_integral() {
            if let Some(&bad) = data
                .iter()
                .find(|v| !(**v >= 0.0) || v.fract() != 0.0 || !v.is_finite())
            {
                return Err(Error::InvalidGrid(format!(
                    "{} volume holds non-integer or negative value {bad}",
                    kind.as_str()
                )));
            }
            if kind == VolumeKind::Tristate {
                if let Some(&bad) = data.iter().find(|v| **v > 2.0) {
                    return Err(Error::InvalidGrid(format!(
                        "tristate volume holds code {bad}"
                    )));
                }
            }
        }
        Ok(VolumeGrid {
            geometry,
            kind,
            data,
        })
    }

    pub fn filled(geometry: Geometry, kind: VolumeKind, value: f32) -> Result<Self> {
        Self::new(geometry, kind, vec![value; geometry.len()])
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

    pub fn origin(&self) -> [f64; 3] {
        self.geometry.origin
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, idx: Index3) -> f32 {
        self.data[self.geometry.index(idx)]
    }

    /// Same values, different interpretation. Re-validates label invariants.
    pub fn with_kind(self, kind: VolumeKind) -> Result<Self> {
        Self::new(self.geometry, kind, self.data)
    }

    /// Distinct values present in an integral grid, sorted.
    pub fn label_values(&self) -> Vec<u32> {
        let mut seen = std::collections::BTreeSet::new();
        for &v in &self.data {
            seen.insert(v as u32);
        }
        seen.into_iter().collect()
    }
}
