use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Geometry, VolumeGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    Trilinear,
}

/// Per-axis sampling table: source indices and the weight of the upper one.
struct AxisMap {
    lo: Vec<usize>,
    hi: Vec<usize>,
    w: Vec<f64>,
}

impl AxisMap {
    fn new(n_in: usize, n_out: usize, scale: f64, mode: Interpolation) -> Self {
        let last = (n_in - 1) as f64;
        let mut map = AxisMap {
            lo: Vec::with_capacity(n_out),
            hi: Vec::with_capacity(n_out),
            w: Vec::with_capacity(n_out),
        };
        for j in 0..n_out {
            // Low corners of both lattices coincide; positions outside the
            // source clamp to the edge voxel.
            let u = if scale == 1.0 {
                j as f64
            } else {
                (j as f64 + 0.5) * scale - 0.5
            };
            let u = u.clamp(0.0, last);
            match mode {
                Interpolation::Nearest => {
                    let i = ((u + 0.5).floor() as usize).min(n_in - 1);
                    map.lo.push(i);
                    map.hi.push(i);
                    map.w.push(0.0);
                }
                Interpolation::Trilinear => {
                    let i0 = u.floor() as usize;
                    let i1 = (i0 + 1).min(n_in - 1);
                    map.lo.push(i0);
                    map.hi.push(i1);
                    map.w.push(u - i0 as f64);
                }
            }
        }
        map
    }
}

/// Output lattice for resampling `src` to `target_spacing`.
pub fn resampled_geometry(src: &Geometry, target_spacing: [f64; 3]) -> Result<Geometry> {
    if target_spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target spacing must be > 0, got {target_spacing:?}"
        )));
    }
    let mut dims = [0usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        let extent = src.dims[a] as f64 * src.spacing[a];
        dims[a] = ((extent / target_spacing[a]).round() as usize).max(1);
        origin[a] = src.origin[a] - 0.5 * src.spacing[a] + 0.5 * target_spacing[a];
        if target_spacing[a] == src.spacing[a] {
            origin[a] = src.origin[a];
        }
    }
    Geometry::new(dims, target_spacing, origin)
}

/// Resample onto a lattice with `target_spacing`.
///
/// Output dims are `round(dims * spacing / target)` (at least 1). Label and
/// tristate grids must use [`Interpolation::Nearest`], which never invents
/// label values.
pub fn resample(
    grid: &VolumeGrid,
    target_spacing: [f64; 3],
    mode: Interpolation,
) -> Result<VolumeGrid> {
    if mode == Interpolation::Trilinear && grid.kind().is_integral() {
        return Err(Error::TrilinearOnLabels(grid.kind().as_str()));
    }
    let src = grid.geometry();
    let out = resampled_geometry(src, target_spacing)?;
    let maps: Vec<AxisMap> = (0..3)
        .map(|a| {
            AxisMap::new(
                src.dims[a],
                out.dims[a],
                target_spacing[a] / src.spacing[a],
                mode,
            )
        })
        .collect();

    let [_, sny, snx] = src.dims;
    let [_, ony, onx] = out.dims;
    let data = grid.data();
    let at = |z: usize, y: usize, x: usize| data[(z * sny + y) * snx + x] as f64;

    let mut values = vec![0f32; out.len()];
    values
        .par_chunks_mut(ony * onx)
        .enumerate()
        .for_each(|(oz, slab)| {
            let (z0, z1, wz) = (maps[0].lo[oz], maps[0].hi[oz], maps[0].w[oz]);
            for oy in 0..ony {
                let (y0, y1, wy) = (maps[1].lo[oy], maps[1].hi[oy], maps[1].w[oy]);
                for ox in 0..onx {
                    let (x0, x1, wx) = (maps[2].lo[ox], maps[2].hi[ox], maps[2].w[ox]);
                    let v = match mode {
                        Interpolation::Nearest => data[(z0 * sny + y0) * snx + x0],
                        Interpolation::Trilinear => {
                            let lerp = |a: f64, b: f64, t: f64| {
                                if t == 0.0 {
                                    a
                                } else {
                                    a + (b - a) * t
                                }
                            };
                            let c00 = lerp(at(z0, y0, x0), at(z0, y0, x1), wx);
                            let c01 = lerp(at(z0, y1, x0), at(z0, y1, x1), wx);
                            let c10 = lerp(at(z1, y0, x0), at(z1, y0, x1), wx);
                            let c11 = lerp(at(z1, y1, x0), at(z1, y1, x1), wx);
                            let c0 = lerp(c00, c01, wy);
                            let c1 = lerp(c10, c11, wy);
                            lerp(c0, c1, wz) as f32
                        }
                    };
                    slab[oy * onx + ox] = v;
                }
            }
        });
    VolumeGrid::new(out, grid.kind(), values)
}
