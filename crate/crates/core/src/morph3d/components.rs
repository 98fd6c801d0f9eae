use serde::Serialize;

use super::{Connectivity, Mask};
use crate::report::{Table, TableRow};
use crate::volgrid::Index3;

/// One connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// 1-based; components are numbered by decreasing size.
    pub id: u32,
    /// Member voxels in raster order.
    pub voxels: Vec<Index3>,
    pub volume_mm3: f64,
    /// Filled in by [`crate::measure`].
    pub shortest_diameter_mm: Option<f64>,
}

impl Component {
    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// Inclusive `(lo, hi)` index corners.
    pub fn bounds(&self) -> (Index3, Index3) {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for v in &self.voxels {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    pub source_dims: Index3,
    pub spacing: [f64; 3],
    pub components: Vec<Component>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Component> {
        self.components.iter()
    }

    /// Per-voxel component id (0 = background), z-major.
    pub fn label_map(&self) -> Vec<u32> {
        let [_, ny, nx] = self.source_dims;
        let mut labels = vec![0u32; self.source_dims.iter().product()];
        for c in &self.components {
            for &[z, y, x] in &c.voxels {
                labels[(z * ny + y) * nx + x] = c.id;
            }
        }
        labels
    }

    /// Structured-text catalog, one row per component.
    pub fn catalog(&self) -> Vec<CatalogRow> {
        self.components
            .iter()
            .map(|c| {
                let (lo, hi) = c.bounds();
                CatalogRow {
                    id: c.id,
                    voxels: c.len(),
                    volume_mm3: c.volume_mm3,
                    shortest_diameter_mm: c.shortest_diameter_mm,
                    bbox_lo: lo,
                    bbox_hi: hi,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogRow {
    pub id: u32,
    pub voxels: usize,
    pub volume_mm3: f64,
    pub shortest_diameter_mm: Option<f64>,
    pub bbox_lo: Index3,
    pub bbox_hi: Index3,
}

impl TableRow for CatalogRow {
    fn header() -> Vec<&'static str> {
        vec![
            "id",
            "voxels",
            "volume_mm3",
            "shortest_diameter_mm",
            "bbox_lo",
            "bbox_hi",
        ]
    }

    fn cells(&self) -> Vec<String> {
        let triple = |t: Index3| format!("{},{},{}", t[0], t[1], t[2]);
        vec![
            self.id.to_string(),
            self.voxels.to_string(),
            self.volume_mm3.to_string(),
            self.shortest_diameter_mm
                .map_or_else(|| "NA".to_owned(), |d| d.to_string()),
            triple(self.bbox_lo),
            triple(self.bbox_hi),
        ]
    }
}

impl Table for ComponentSet {
    type Row = CatalogRow;
    fn rows(&self) -> Vec<CatalogRow> {
        self.catalog()
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        // The older (smaller) provisional label stays root.
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else if rb < ra {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Label connected foreground regions.
///
/// Two-pass raster labelling with union-find over the causal half of the
/// neighbourhood. Components are returned largest first (ties: earliest
/// voxel in raster order first), numbered `1..=k`.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> ComponentSet {
    let g = *mask.geometry();
    let causal: Vec<[isize; 3]> = connectivity
        .offsets()
        .into_iter()
        .filter(|o| *o < [0, 0, 0])
        .collect();

    const NONE: u32 = u32::MAX;
    let mut provisional = vec![NONE; g.len()];
    let mut sets = DisjointSet { parent: Vec::new() };
    for (i, &on) in mask.bits().iter().enumerate() {
        if !on {
            continue;
        }
        let here = g.coords(i);
        let mut label = NONE;
        for &o in &causal {
            if let Some(n) = g.offset(here, o) {
                let nl = provisional[g.index(n)];
                if nl == NONE {
                    continue;
                }
                if label == NONE {
                    label = nl;
                } else {
                    sets.union(label, nl);
                }
            }
        }
        if label == NONE {
            label = sets.parent.len() as u32;
            sets.parent.push(label);
        }
        provisional[i] = label;
    }

    // Roots are the minimum provisional label of their set, so ordering
    // groups by root is ordering by first raster voxel.
    let n_prov = sets.parent.len();
    let mut slot = vec![NONE; n_prov];
    let mut groups: Vec<Vec<Index3>> = Vec::new();
    for (i, &p) in provisional.iter().enumerate() {
        if p == NONE {
            continue;
        }
        let root = sets.find(p) as usize;
        if slot[root] == NONE {
            slot[root] = groups.len() as u32;
            groups.push(Vec::new());
        }
        groups[slot[root] as usize].push(g.coords(i));
    }
    // stable sort keeps raster order among equal sizes
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let voxel_volume = g.voxel_volume_mm3();
    ComponentSet {
        source_dims: g.dims,
        spacing: g.spacing,
        components: groups
            .into_iter()
            .enumerate()
            .map(|(k, voxels)| Component {
                id: k as u32 + 1,
                volume_mm3: voxels.len() as f64 * voxel_volume,
                voxels,
                shortest_diameter_mm: None,
            })
            .collect(),
    }
}
