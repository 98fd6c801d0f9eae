use super::Mask;
use crate::error::{Error, Result};
use crate::volgrid::{Geometry, Index3};

/// How [`directed_surface_distances`] evaluates nearest distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceBackend {
    /// Pairwise scan for small inputs, distance transform otherwise.
    #[default]
    Auto,
    BruteForce,
    DistanceTransform,
}

/// Exact squared Euclidean distance (mm²) from every voxel centre to the
/// nearest set voxel of `mask`, honouring anisotropic spacing.
///
/// Separable lower-envelope transform (one 1D pass per axis). All entries are
/// `f64::INFINITY` when the mask is empty.
pub fn squared_distance_map(mask: &Mask) -> Vec<f64> {
    let g = *mask.geometry();
    let mut d: Vec<f64> = mask
        .bits()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let [nz, ny, nx] = g.dims;
    let mut scratch = Envelope::with_capacity(nz.max(ny).max(nx));
    let mut line_in = Vec::new();
    let mut line_out = Vec::new();

    let mut pass = |d: &mut [f64],
                    len: usize,
                    stride: usize,
                    starts: &mut dyn Iterator<Item = usize>,
                    w: f64| {
        for start in starts {
            line_in.clear();
            line_in.extend((0..len).map(|k| d[start + k * stride]));
            line_out.resize(len, 0.0);
            scratch.transform(&line_in, w, &mut line_out);
            for k in 0..len {
                d[start + k * stride] = line_out[k];
            }
        }
    };

    pass(
        &mut d,
        nx,
        1,
        &mut (0..nz * ny).map(|r| r * nx),
        g.spacing[2],
    );
    pass(
        &mut d,
        ny,
        nx,
        &mut (0..nz).flat_map(|z| (0..nx).map(move |x| z * ny * nx + x)),
        g.spacing[1],
    );
    pass(&mut d, nz, ny * nx, &mut (0..ny * nx), g.spacing[0]);
    d
}

/// Scratch buffers for the 1D lower envelope of parabolas.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    fn transform(&mut self, f: &[f64], w: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        let pos = |q: usize| q as f64 * w;
        for (q, &fq) in f.iter().enumerate() {
            if fq.is_infinite() {
                continue;
            }
            let mut s = f64::NEG_INFINITY;
            while let Some(&p) = self.sites.last() {
                let (xq, xp) = (pos(q), pos(p));
                s = ((fq + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
                if s <= *self.bounds.last().expect("bound per site") {
                    self.sites.pop();
                    self.bounds.pop();
                    s = f64::NEG_INFINITY;
                } else {
                    break;
                }
            }
            self.sites.push(q);
            self.bounds.push(s);
        }
        if self.sites.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }
        let mut j = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let x = pos(q);
            while j + 1 < self.sites.len() && self.bounds[j + 1] < x {
                j += 1;
            }
            let p = self.sites[j];
            let dx = x - pos(p);
            *o = dx * dx + f[p];
        }
    }
}

fn brute_force(from: &[Index3], to: &[Index3], spacing: [f64; 3]) -> Vec<f64> {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| {
                    (0..3)
                        .map(|k| ((a[k] as f64 - b[k] as f64) * spacing[k]).powi(2))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect()
}

fn via_transform(from: &[Index3], to: &[Index3], spacing: [f64; 3]) -> Vec<f64> {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for v in from.iter().chain(to) {
        for a in 0..3 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    let dims = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
    let local = |v: &Index3| [v[0] - lo[0], v[1] - lo[1], v[2] - lo[2]];
    let g = Geometry::with_spacing(dims, spacing).expect("spacing validated by caller");
    let target = Mask::from_indices(g, to.iter().map(local));
    let d2 = squared_distance_map(&target);
    from.iter().map(|v| d2[g.index(local(v))].sqrt()).collect()
}

/// For each voxel of `from`, the Euclidean distance in mm between voxel
/// centres to the nearest voxel of `to`.
pub fn directed_surface_distances(
    from: &[Index3],
    to: &[Index3],
    spacing: [f64; 3],
    backend: DistanceBackend,
) -> Result<Vec<f64>> {
    if to.is_empty() {
        return Err(Error::EmptySurface);
    }
    if spacing.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!("spacing {spacing:?}")));
    }
    if from.is_empty() {
        return Ok(Vec::new());
    }
    let backend = match backend {
        DistanceBackend::Auto => {
            let mut lo = [usize::MAX; 3];
            let mut hi = [0usize; 3];
            for v in from.iter().chain(to) {
                for a in 0..3 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            }
            let box_voxels: usize = (0..3).map(|a| hi[a] - lo[a] + 1).product();
            if from.len().saturating_mul(to.len()) <= box_voxels.saturating_mul(4) {
                DistanceBackend::BruteForce
            } else {
                DistanceBackend::DistanceTransform
            }
        }
        b => b,
    };
    Ok(match backend {
        DistanceBackend::BruteForce => brute_force(from, to, spacing),
        _ => via_transform(from, to, spacing),
    })
}
