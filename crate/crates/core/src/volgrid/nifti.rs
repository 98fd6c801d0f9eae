//! Single-file NIfTI-1 (`.nii`, `.nii.gz`) for axis-aligned volumes.
//!
//! Only the parts of the header needed for axis-aligned grids are honoured:
//! `dim`, `pixdim`, `datatype`, `scl_slope`/`scl_inter`, and the translation
//! column of the sform (falling back to the qform offsets). Rotations and axis
//! flips are ignored. The grid kind is recorded in `descrip` on write; files
//! without that tag are read as intensity (float data) or label (integer data).

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{Geometry, VolumeGrid, VolumeKind};
use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;
const VOX_OFFSET: usize = 352;
const MAGIC: &[u8; 4] = b"n+1\0";
const KIND_TAG: &str = "lymphkit kind=";

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_FLOAT32: i16 = 16;

mod off {
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const DESCRIP: usize = 148;
    pub const QFORM_CODE: usize = 252;
    pub const SFORM_CODE: usize = 254;
    pub const QOFFSET: usize = 268;
    pub const SROW_X: usize = 280;
    pub const SROW_Y: usize = 296;
    pub const SROW_Z: usize = 312;
    pub const MAGIC: usize = 344;
}

struct Fields<'a> {
    bytes: &'a [u8],
    big_endian: bool,
}

impl Fields<'_> {
    fn i16(&self, at: usize) -> i16 {
        if self.big_endian {
            BigEndian::read_i16(&self.bytes[at..])
        } else {
            LittleEndian::read_i16(&self.bytes[at..])
        }
    }

    fn f32(&self, at: usize) -> f32 {
        if self.big_endian {
            BigEndian::read_f32(&self.bytes[at..])
        } else {
            LittleEndian::read_f32(&self.bytes[at..])
        }
    }
}

fn load_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::with_capacity(raw.len() * 4);
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

pub(crate) fn read(path: &Path) -> Result<VolumeGrid> {
    let bytes = load_bytes(path)?;
    decode(&bytes, path)
}

pub(crate) fn decode(bytes: &[u8], path: &Path) -> Result<VolumeGrid> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::format(path, "shorter than a NIfTI-1 header"));
    }
    let big_endian = match (LittleEndian::read_i32(bytes), BigEndian::read_i32(bytes)) {
        (348, _) => false,
        (_, 348) => true,
        _ => return Err(Error::format(path, "sizeof_hdr is not 348")),
    };
    let h = Fields { bytes, big_endian };
    if &bytes[off::MAGIC..off::MAGIC + 4] != MAGIC {
        return Err(Error::format(
            path,
            "not a single-file NIfTI-1 volume (magic n+1)",
        ));
    }

    let ndim = h.i16(off::DIM);
    if !(1..=7).contains(&ndim) {
        return Err(Error::format(path, format!("dim[0] = {ndim}")));
    }
    let dim = |i: usize| h.i16(off::DIM + 2 * i);
    for i in 4..=(ndim as usize) {
        if dim(i) > 1 {
            return Err(Error::format(
                path,
                format!("only 3D volumes are supported, dim[{i}] = {}", dim(i)),
            ));
        }
    }
    let extent = |i: usize| -> Result<usize> {
        if i > ndim as usize {
            return Ok(1);
        }
        let d = dim(i);
        if d < 1 {
            return Err(Error::format(path, format!("dim[{i}] = {d}")));
        }
        Ok(d as usize)
    };
    let (nx, ny, nz) = (extent(1)?, extent(2)?, extent(3)?);
    let pix = |i: usize| -> f64 {
        let p = h.f32(off::PIXDIM + 4 * i).abs() as f64;
        if p > 0.0 {
            p
        } else {
            1.0
        }
    };
    let spacing = [pix(3), pix(2), pix(1)];

    let origin = if h.i16(off::SFORM_CODE) > 0 {
        [
            h.f32(off::SROW_Z + 12) as f64,
            h.f32(off::SROW_Y + 12) as f64,
            h.f32(off::SROW_X + 12) as f64,
        ]
    } else if h.i16(off::QFORM_CODE) > 0 {
        [
            h.f32(off::QOFFSET + 8) as f64,
            h.f32(off::QOFFSET + 4) as f64,
            h.f32(off::QOFFSET) as f64,
        ]
    } else {
        [0.0; 3]
    };
    let geometry = Geometry::new([nz, ny, nx], spacing, origin)?;

    let datatype = h.i16(off::DATATYPE);
    let width = match datatype {
        DT_UINT8 => 1,
        DT_INT16 => 2,
        DT_FLOAT32 => 4,
        other => return Err(Error::UnsupportedDatatype(other)),
    };
    let vox_offset = h.f32(off::VOX_OFFSET) as usize;
    let vox_offset = vox_offset.max(HEADER_SIZE);
    let n = geometry.len();
    let payload = bytes.get(vox_offset..).unwrap_or(&[]);
    if payload.len() != n * width {
        return Err(Error::PayloadLength {
            expected: n,
            found: payload.len() / width,
        });
    }
    let mut data: Vec<f32> = match datatype {
        DT_UINT8 => payload.iter().map(|&b| b as f32).collect(),
        DT_INT16 => payload
            .chunks_exact(2)
            .map(|c| {
                if big_endian {
                    BigEndian::read_i16(c) as f32
                } else {
                    LittleEndian::read_i16(c) as f32
                }
            })
            .collect(),
        _ => {
            let mut v = vec![0f32; n];
            if big_endian {
                BigEndian::read_f32_into(payload, &mut v);
            } else {
                LittleEndian::read_f32_into(payload, &mut v);
            }
            v
        }
    };

    let slope = h.f32(off::SCL_SLOPE);
    let inter = h.f32(off::SCL_INTER);
    let scaled = slope != 0.0 && slope.is_finite() && (slope != 1.0 || inter != 0.0);
    if scaled {
        for v in &mut data {
            *v = *v * slope + inter;
        }
    }

    let descrip = &bytes[off::DESCRIP..off::DESCRIP + 80];
    let descrip = String::from_utf8_lossy(descrip.split(|&b| b == 0).next().unwrap_or(&[]));
    let tagged = descrip
        .strip_prefix(KIND_TAG)
        .and_then(|k| VolumeKind::parse(k.trim()));
    let kind = match tagged {
        Some(k) => k,
        None if datatype == DT_FLOAT32 || scaled => VolumeKind::Intensity,
        None => {
            if data.iter().any(|&v| v < 0.0) {
                VolumeKind::Intensity
            } else {
                VolumeKind::Label
            }
        }
    };
    VolumeGrid::new(geometry, kind, data)
}

fn pick_datatype(grid: &VolumeGrid) -> i16 {
    if !grid.kind().is_integral() {
        return DT_FLOAT32;
    }
    let max = grid.data().iter().copied().fold(0f32, f32::max);
    if max <= u8::MAX as f32 {
        DT_UINT8
    } else if max <= i16::MAX as f32 {
        DT_INT16
    } else {
        DT_FLOAT32
    }
}

pub(crate) fn encode(grid: &VolumeGrid) -> Result<Vec<u8>> {
    let g = grid.geometry();
    let [nz, ny, nx] = g.dims;
    if [nz, ny, nx].iter().any(|&d| d > i16::MAX as usize) {
        return Err(Error::InvalidArgument(format!(
            "dims {:?} exceed the NIfTI-1 limit of {}",
            g.dims,
            i16::MAX
        )));
    }
    let datatype = pick_datatype(grid);
    let (width, bitpix) = match datatype {
        DT_UINT8 => (1, 8),
        DT_INT16 => (2, 16),
        _ => (4, 32),
    };
    let mut buf = vec![0u8; VOX_OFFSET + grid.data().len() * width];
    {
        let h = &mut buf[..VOX_OFFSET];
        LittleEndian::write_i32(&mut h[0..], HEADER_SIZE as i32);
        h[38] = b'r';
        let dims = [3i16, nx as i16, ny as i16, nz as i16, 1, 1, 1, 1];
        for (i, d) in dims.iter().enumerate() {
            LittleEndian::write_i16(&mut h[off::DIM + 2 * i..], *d);
        }
        LittleEndian::write_i16(&mut h[off::DATATYPE..], datatype);
        LittleEndian::write_i16(&mut h[off::BITPIX..], bitpix);
        let [sz, sy, sx] = g.spacing;
        let pixdim = [1.0f32, sx as f32, sy as f32, sz as f32, 1.0, 1.0, 1.0, 1.0];
        for (i, p) in pixdim.iter().enumerate() {
            LittleEndian::write_f32(&mut h[off::PIXDIM + 4 * i..], *p);
        }
        LittleEndian::write_f32(&mut h[off::VOX_OFFSET..], VOX_OFFSET as f32);
        LittleEndian::write_f32(&mut h[off::SCL_SLOPE..], 1.0);
        LittleEndian::write_f32(&mut h[off::SCL_INTER..], 0.0);
        // NIFTI_UNITS_MM
        h[off::XYZT_UNITS] = 2;
        let descrip = format!("{KIND_TAG}{}", grid.kind().as_str());
        h[off::DESCRIP..off::DESCRIP + descrip.len()].copy_from_slice(descrip.as_bytes());
        // NIFTI_XFORM_SCANNER_ANAT for both transforms
        LittleEndian::write_i16(&mut h[off::QFORM_CODE..], 1);
        LittleEndian::write_i16(&mut h[off::SFORM_CODE..], 1);
        let [oz, oy, ox] = g.origin;
        for (i, o) in [ox, oy, oz].iter().enumerate() {
            LittleEndian::write_f32(&mut h[off::QOFFSET + 4 * i..], *o as f32);
        }
        let rows = [
            (off::SROW_X, [sx, 0.0, 0.0, ox]),
            (off::SROW_Y, [0.0, sy, 0.0, oy]),
            (off::SROW_Z, [0.0, 0.0, sz, oz]),
        ];
        for (at, row) in rows {
            for (i, v) in row.iter().enumerate() {
                LittleEndian::write_f32(&mut h[at + 4 * i..], *v as f32);
            }
        }
        // pixdim[0] = qfac
        LittleEndian::write_f32(&mut h[off::PIXDIM..], 1.0);
        h[off::MAGIC..off::MAGIC + 4].copy_from_slice(MAGIC);
    }
    let payload = &mut buf[VOX_OFFSET..];
    match datatype {
        DT_UINT8 => {
            for (b, &v) in payload.iter_mut().zip(grid.data()) {
                *b = v as u8;
            }
        }
        DT_INT16 => {
            for (c, &v) in payload.chunks_exact_mut(2).zip(grid.data()) {
                LittleEndian::write_i16(c, v as i16);
            }
        }
        _ => LittleEndian::write_f32_into(grid.data(), payload),
    }
    Ok(buf)
}

pub(crate) fn write(grid: &VolumeGrid, path: &Path, gzip: bool) -> Result<()> {
    let bytes = encode(grid)?;
    let out = if gzip {
        let mut enc = GzEncoder::new(Vec::with_capacity(bytes.len() / 4), Compression::fast());
        enc.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        enc.finish().map_err(|e| Error::io(path, e))?
    } else {
        bytes
    };
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
