use std::path::Path;

use super::{nifti, rawvol, VolumeGrid};
use crate::error::{Error, Result};

/// On-disk encodings understood by [`read_volume`] / [`write_volume`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeFormat {
    Nifti,
    NiftiGz,
    /// `name.json` sidecar + `name.raw` payload.
    Raw,
}

impl VolumeFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        if name.ends_with(".nii.gz") {
            Some(VolumeFormat::NiftiGz)
        } else if name.ends_with(".nii") {
            Some(VolumeFormat::Nifti)
        } else if name.ends_with(".json") || name.ends_with(".raw") {
            Some(VolumeFormat::Raw)
        } else {
            None
        }
    }

    /// File extension including the leading dot.
    pub fn extension(self) -> &'static str {
        match self {
            VolumeFormat::Nifti => ".nii",
            VolumeFormat::NiftiGz => ".nii.gz",
            VolumeFormat::Raw => ".json",
        }
    }
}

fn unsupported(path: &Path) -> Error {
    Error::format(
        path,
        "unrecognised extension (expected .nii, .nii.gz, .json or .raw)",
    )
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<VolumeGrid> {
    let path = path.as_ref();
    match VolumeFormat::from_path(path).ok_or_else(|| unsupported(path))? {
        VolumeFormat::Nifti | VolumeFormat::NiftiGz => nifti::read(path),
        VolumeFormat::Raw => rawvol::read(path),
    }
}

/// Writes `grid` in the format implied by the extension of `path`.
///
/// NIfTI stores spacing and origin as `f32`; use the raw format when the
/// metadata must survive bit-exactly.
pub fn write_volume(grid: &VolumeGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match VolumeFormat::from_path(path).ok_or_else(|| unsupported(path))? {
        VolumeFormat::Nifti => nifti::write(grid, path, false),
        VolumeFormat::NiftiGz => nifti::write(grid, path, true),
        VolumeFormat::Raw => rawvol::write(grid, path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volgrid::{Geometry, VolumeKind};

    #[test]
    fn raw_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Geometry::new([4, 4, 4], [1.0, 1.0, 1.0], [0.1, -3.3, 1e-7]).unwrap();
        let v = VolumeGrid::new(
            g,
            VolumeKind::Intensity,
            (0..64).map(|i| i as f32 * 0.1).collect(),
        )
        .unwrap();
        let p = dir.path().join("ct.json");
        write_volume(&v, &p).unwrap();
        assert!(dir.path().join("ct.raw").exists());
        let back = read_volume(&p).unwrap();
        assert_eq!(back.data().len(), 64);
        assert_eq!(back, v);
        // either member of the pair opens the volume
        assert_eq!(read_volume(dir.path().join("ct.raw")).unwrap(), v);
    }

    #[test]
    fn gz_and_plain_nifti_agree() {
        let dir = tempfile::tempdir().unwrap();
        let g = Geometry::new([5, 6, 7], [3.0, 0.5, 0.5], [0.0; 3]).unwrap();
        let v = VolumeGrid::new(
            g,
            VolumeKind::Label,
            (0..g.len()).map(|i| (i % 5 == 0) as u8 as f32).collect(),
        )
        .unwrap();
        write_volume(&v, dir.path().join("a.nii")).unwrap();
        write_volume(&v, dir.path().join("a.nii.gz")).unwrap();
        let plain = read_volume(dir.path().join("a.nii")).unwrap();
        let gz = read_volume(dir.path().join("a.nii.gz")).unwrap();
        assert_eq!(plain, gz);
        let sum = |g: &VolumeGrid| g.data().iter().map(|&x| x as f64).sum::<f64>();
        assert_eq!(sum(&plain), sum(&v));
    }

    #[test]
    fn errors_on_missing_or_unknown() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_volume(dir.path().join("nope.nii")),
            Err(Error::Io { .. })
        ));
        assert!(matches!(
            read_volume(dir.path().join("x.mha")),
            Err(Error::Format { .. })
        ));
        std::fs::write(dir.path().join("bad.json"), "{}").unwrap();
        assert!(read_volume(dir.path().join("bad.json")).is_err());
    }

    #[test]
    fn raw_payload_length_checked() {
        let dir = tempfile::tempdir().unwrap();
        let g = Geometry::with_spacing([2, 2, 2], [1.0; 3]).unwrap();
        let v = VolumeGrid::filled(g, VolumeKind::Label, 1.0).unwrap();
        let p = dir.path().join("m.json");
        write_volume(&v, &p).unwrap();
        std::fs::write(dir.path().join("m.raw"), [0u8; 12]).unwrap();
        assert!(matches!(read_volume(&p), Err(Error::PayloadLength { .. })));
    }
}
