//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is deliberately naive and shares no code with the
//! library beyond the plain data types.
#![allow(dead_code)]

use std::collections::VecDeque;

use lymphkit_core::{Connectivity, Geometry, Index3, Mask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPACING: [f64; 3] = [3.0, 0.93, 0.93];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random mask with dims in `1..=max_dim` and a random fill density.
pub fn random_mask(rng: &mut ChaCha8Rng, max_dim: usize, spacing: [f64; 3]) -> Mask {
    let dims = [
        rng.random_range(1..=max_dim),
        rng.random_range(1..=max_dim),
        rng.random_range(1..=max_dim),
    ];
    random_mask_with_dims(rng, dims, spacing)
}

pub fn random_mask_with_dims(rng: &mut ChaCha8Rng, dims: Index3, spacing: [f64; 3]) -> Mask {
    let g = Geometry::with_spacing(dims, spacing).unwrap();
    let density = rng.random_range(0.02..0.6);
    let bits = (0..g.len()).map(|_| rng.random_bool(density)).collect();
    Mask::new(g, bits).unwrap()
}

fn adjacent(a: Index3, b: Index3, conn: Connectivity) -> bool {
    let mut nonzero = 0;
    for k in 0..3 {
        let d = a[k] as i64 - b[k] as i64;
        if d.abs() > 1 {
            return false;
        }
        nonzero += (d != 0) as usize;
    }
    let max = match conn {
        Connectivity::Six => 1,
        Connectivity::Eighteen => 2,
        Connectivity::TwentySix => 3,
    };
    nonzero >= 1 && nonzero <= max
}

fn neighbours(v: Index3, dims: Index3, conn: Connectivity) -> Vec<Index3> {
    let mut out = Vec::new();
    for z in v[0].saturating_sub(1)..=(v[0] + 1).min(dims[0] - 1) {
        for y in v[1].saturating_sub(1)..=(v[1] + 1).min(dims[1] - 1) {
            for x in v[2].saturating_sub(1)..=(v[2] + 1).min(dims[2] - 1) {
                if adjacent(v, [z, y, x], conn) {
                    out.push([z, y, x]);
                }
            }
        }
    }
    out
}

/// Flood-fill labelling. Components sorted by decreasing size, ties by
/// their first voxel in raster order; voxels listed in raster order.
pub fn bfs_components(mask: &Mask, conn: Connectivity) -> Vec<Vec<Index3>> {
    let dims = mask.dims();
    let mut seen = vec![false; mask.bits().len()];
    let idx = |v: Index3| (v[0] * dims[1] + v[1]) * dims[2] + v[2];
    let mut comps = Vec::new();
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                let s = [z, y, x];
                if !mask.get(s) || seen[idx(s)] {
                    continue;
                }
                seen[idx(s)] = true;
                let mut queue = VecDeque::from([s]);
                let mut comp = Vec::new();
                while let Some(v) = queue.pop_front() {
                    comp.push(v);
                    for n in neighbours(v, dims, conn) {
                        if mask.get(n) && !seen[idx(n)] {
                            seen[idx(n)] = true;
                            queue.push_back(n);
                        }
                    }
                }
                comp.sort();
                comps.push(comp);
            }
        }
    }
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    comps
}

/// Repeated "any neighbour set" sweep.
pub fn sweep_dilate(mask: &Mask, conn: Connectivity, iterations: usize) -> Mask {
    let mut cur = mask.clone();
    let dims = mask.dims();
    for _ in 0..iterations {
        let mut next = cur.clone();
        for z in 0..dims[0] {
            for y in 0..dims[1] {
                for x in 0..dims[2] {
                    let v = [z, y, x];
                    if !cur.get(v) && neighbours(v, dims, conn).into_iter().any(|n| cur.get(n)) {
                        next.set(v, true);
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Foreground voxels with a background or out-of-volume face neighbour.
pub fn naive_surface(mask: &Mask) -> Vec<Index3> {
    let dims = mask.dims();
    let mut out = Vec::new();
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                let v = [z, y, x];
                if !mask.get(v) {
                    continue;
                }
                let faces = [
                    [-1i64, 0, 0],
                    [1, 0, 0],
                    [0, -1, 0],
                    [0, 1, 0],
                    [0, 0, -1],
                    [0, 0, 1],
                ];
                let exposed = faces.iter().any(|d| {
                    let n: Vec<i64> = (0..3).map(|k| v[k] as i64 + d[k]).collect();
                    if (0..3).any(|k| n[k] < 0 || n[k] >= dims[k] as i64) {
                        return true;
                    }
                    !mask.get([n[0] as usize, n[1] as usize, n[2] as usize])
                });
                if exposed {
                    out.push(v);
                }
            }
        }
    }
    out
}

pub fn pairwise_min_distances(from: &[Index3], to: &[Index3], spacing: [f64; 3]) -> Vec<f64> {
    from.iter()
        .map(|a| {
            let mut best = f64::INFINITY;
            for b in to {
                let mut s = 0.0;
                for k in 0..3 {
                    let d = (a[k] as f64 - b[k] as f64) * spacing[k];
                    s += d * d;
                }
                best = best.min(s);
            }
            best.sqrt()
        })
        .collect()
}

pub fn count_dice(p: &Mask, g: &Mask) -> f64 {
    let a = p.count();
    let b = g.count();
    let both = p.voxels().filter(|&v| g.get(v)).count();
    if a + b == 0 {
        1.0
    } else {
        2.0 * both as f64 / (a + b) as f64
    }
}

/// Pooled ASSD with an O(n·m) scan; `None` when either surface is empty.
pub fn brute_assd(p: &Mask, g: &Mask) -> Option<f64> {
    let sp = naive_surface(p);
    let sg = naive_surface(g);
    if sp.is_empty() || sg.is_empty() {
        return None;
    }
    let spacing = p.spacing();
    let f = pairwise_min_distances(&sp, &sg, spacing);
    let b = pairwise_min_distances(&sg, &sp, spacing);
    Some(f.iter().chain(&b).sum::<f64>() / (f.len() + b.len()) as f64)
}

/// Two-sided signed-rank p-value by listing every sign pattern.
pub fn enumerate_wilcoxon_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|&v| v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let ranks: Vec<f64> = d
        .iter()
        .map(|v| {
            let below = d.iter().filter(|w| w.abs() < v.abs()).count() as f64;
            let equal = d.iter().filter(|w| w.abs() == v.abs()).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let observed = plus.min(total - plus);
    let mut extreme = 0u64;
    for pattern in 0u64..(1 << n) {
        let wp: f64 = (0..n)
            .filter(|i| pattern >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if wp.min(total - wp) <= observed + 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Short axis over axial slices by brute force over all point pairs: the
/// long axis is the farthest pair; the short axis is the largest extent
/// perpendicular to any farthest pair. Adds the mean in-plane spacing.
pub fn brute_short_axis(voxels: &[Index3], spacing: [f64; 3]) -> f64 {
    let [_, sy, sx] = spacing;
    let mut zs: Vec<usize> = voxels.iter().map(|v| v[0]).collect();
    zs.sort();
    zs.dedup();
    let mut best = f64::NEG_INFINITY;
    for z in zs {
        let pts: Vec<[f64; 2]> = voxels
            .iter()
            .filter(|v| v[0] == z)
            .map(|v| [v[1] as f64 * sy, v[2] as f64 * sx])
            .collect();
        let mut long = 0.0f64;
        for p in &pts {
            for q in &pts {
                long = long.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        let mut short = 0.0f64;
        if long > 0.0 {
            for p in &pts {
                for q in &pts {
                    let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    if len < long * (1.0 - 1e-12) {
                        continue;
                    }
                    let n = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
                    let proj: Vec<f64> = pts.iter().map(|r| r[0] * n[0] + r[1] * n[1]).collect();
                    let ext = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - proj.iter().cloned().fold(f64::INFINITY, f64::min);
                    short = short.max(ext);
                }
            }
        }
        best = best.max(short);
    }
    best + 0.5 * (sy + sx)
}

/// Sphere of `radius_mm` centred on the voxel centre nearest the middle.
pub fn digitized_sphere(radius_mm: f64, spacing: [f64; 3]) -> Mask {
    let dims = spacing.map(|s| 2 * (radius_mm / s).ceil() as usize + 3);
    let g = Geometry::with_spacing(dims, spacing).unwrap();
    let centre = g.position(dims.map(|d| d / 2));
    let mut m = Mask::empty(g);
    for i in 0..g.len() {
        let v = g.coords(i);
        let p = g.position(v);
        let r2: f64 = (0..3).map(|k| (p[k] - centre[k]).powi(2)).sum();
        if r2 <= radius_mm * radius_mm {
            m.set(v, true);
        }
    }
    m
}
