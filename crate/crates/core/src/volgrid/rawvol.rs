//! Raw payload + JSON sidecar, the toolkit's canonical lossless format.
//!
//! A volume `name` is stored as two files side by side:
//!
//! * `name.json`: UTF-8 JSON object with keys, in this order, `format`
//!   (`"lymphkit-raw"`), `version` (`1`), `dims` `[nz, ny, nx]`, `spacing`
//!   `[sz, sy, sx]` and `origin` `[oz, oy, ox]` in mm, `kind`
//!   (`"intensity" | "label" | "tristate"`), `dtype` (`"f32le"`) and
//!   `payload` (file name of the payload, relative to the sidecar). Floats are
//!   written in shortest round-trip decimal form. Pretty-printed with two-space
//!   indent and a trailing newline.
//! * `name.raw`: `nz * ny * nx` little-endian IEEE-754 `f32` values, z-major
//!   (`x` fastest), no header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use super::{Geometry, VolumeGrid, VolumeKind};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "lymphkit-raw";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    version: u32,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    kind: VolumeKind,
    dtype: String,
    payload: String,
}

/// Sidecar and payload paths for either member of the pair.
pub(crate) fn pair_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("json"), path.with_extension("raw"))
}

pub(crate) fn read(path: &Path) -> Result<VolumeGrid> {
    let (sidecar_path, _) = pair_paths(path);
    let text = std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let meta: Sidecar = serde_json::from_str(&text)
        .map_err(|e| Error::format(&sidecar_path, format!("sidecar: {e}")))?;
    if meta.format != FORMAT_TAG {
        return Err(Error::format(
            &sidecar_path,
            format!("format tag {:?}", meta.format),
        ));
    }
    if meta.version != FORMAT_VERSION {
        return Err(Error::format(
            &sidecar_path,
            format!("unsupported version {}", meta.version),
        ));
    }
    if meta.dtype != "f32le" {
        return Err(Error::format(
            &sidecar_path,
            format!("unsupported dtype {:?}", meta.dtype),
        ));
    }
    let geometry = Geometry::new(meta.dims, meta.spacing, meta.origin)?;

    let payload_path = sidecar_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&meta.payload);
    let mut bytes = Vec::new();
    File::open(&payload_path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::io(&payload_path, e))?;
    if bytes.len() != geometry.len() * 4 {
        return Err(Error::PayloadLength {
            expected: geometry.len(),
            found: bytes.len() / 4,
        });
    }
    let mut data = vec![0f32; geometry.len()];
    LittleEndian::read_f32_into(&bytes, &mut data);
    VolumeGrid::new(geometry, meta.kind, data)
}

pub(crate) fn write(grid: &VolumeGrid, path: &Path) -> Result<()> {
    let (sidecar_path, payload_path) = pair_paths(path);
    let payload_name = payload_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::format(path, "payload path has no UTF-8 file name"))?
        .to_owned();
    let g = grid.geometry();
    let meta = Sidecar {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        dims: g.dims,
        spacing: g.spacing,
        origin: g.origin,
        kind: grid.kind(),
        dtype: "f32le".into(),
        payload: payload_name,
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    text.push('\n');
    std::fs::write(&sidecar_path, text).map_err(|e| Error::io(&sidecar_path, e))?;

    let mut bytes = vec![0u8; grid.data().len() * 4];
    LittleEndian::write_f32_into(grid.data(), &mut bytes);
    let file = File::create(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&payload_path, e))
}
