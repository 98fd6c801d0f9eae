//! Seeded synthetic CT phantoms with known lymph nodes and anatomy.
//!
//! A phantom is a background volume with axis-aligned organ boxes and
//! ellipsoidal nodes. Everything random, including image noise and the
//! random cohort layouts, flows from the spec's seed through ChaCha8, so a
//! spec fully determines the output bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::postprocess_filter;
use crate::morph3d::{surface_voxels, Connectivity, Mask};
use crate::volgrid::{Geometry, Index3, VolumeGrid, VolumeKind};

pub const BACKGROUND_HU: f64 = -800.0;
pub const NODE_HU: f64 = 60.0;
pub const LUNG_HU: f64 = -850.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    /// Physical centre, in the same frame as voxel positions.
    pub center_mm: [f64; 3],
    /// Semi-axes along (z, y, x).
    pub radii_mm: [f64; 3],
    pub annotated: bool,
}

impl NodeSpec {
    pub fn sphere(center_mm: [f64; 3], radius_mm: f64, annotated: bool) -> Self {
        NodeSpec {
            center_mm,
            radii_mm: [radius_mm; 3],
            annotated,
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3)
            .map(|a| ((p[a] - self.center_mm[a]) / self.radii_mm[a]).powi(2))
            .sum::<f64>()
            <= 1.0
    }
}

/// Axis-aligned box of anatomy, inclusive index corners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganBox {
    pub label: u32,
    pub lo: Index3,
    pub hi: Index3,
    pub hu: f64,
}

impl OrganBox {
    pub fn contains(&self, v: Index3) -> bool {
        (0..3).all(|a| self.lo[a] <= v[a] && v[a] <= self.hi[a])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub dims: Index3,
    pub spacing: [f64; 3],
    #[serde(default)]
    pub origin: [f64; 3],
    pub seed: u64,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    /// Later boxes overwrite earlier ones where they overlap.
    #[serde(default)]
    pub organs: Vec<OrganBox>,
    #[serde(default)]
    pub noise_std: f64,
}

/// The volumes of one synthetic case.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomCase {
    pub image: VolumeGrid,
    /// Every node.
    pub gt: Mask,
    /// Annotated nodes only.
    pub weak: Mask,
    /// Multi-label anatomy, 0 outside all organs.
    pub anatomy: VolumeGrid,
}

impl PhantomSpec {
    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.dims, self.spacing, self.origin)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.geometry()?;
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        let far = g.position([self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1]);
        for (i, n) in self.nodes.iter().enumerate() {
            if n.radii_mm.iter().any(|&r| !(r > 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "node {i}: radii must be > 0"
                )));
            }
            for a in 0..3 {
                let lo = g.origin[a] - 0.5 * g.spacing[a];
                let hi = far[a] + 0.5 * g.spacing[a];
                if !(lo..=hi).contains(&n.center_mm[a]) {
                    return Err(Error::InvalidArgument(format!(
                        "node {i}: centre {:?} outside the volume",
                        n.center_mm
                    )));
                }
            }
        }
        for o in &self.organs {
            if o.label == 0 {
                return Err(Error::InvalidArgument("organ label 0 is reserved".into()));
            }
            if (0..3).any(|a| o.lo[a] > o.hi[a] || o.hi[a] >= self.dims[a]) {
                return Err(Error::BoxOutOfRange {
                    lo: o.lo,
                    hi: o.hi,
                    dims: self.dims,
                });
            }
        }
        Ok(())
    }

    /// Renders the phantom. Nodes are drawn over organs in the image but do
    /// not change the anatomy labels.
    pub fn generate(&self) -> Result<PhantomCase> {
        self.validate()?;
        let g = self.geometry()?;
        let mut anatomy = vec![0f32; g.len()];
        let mut hu = vec![BACKGROUND_HU; g.len()];
        for o in &self.organs {
            for z in o.lo[0]..=o.hi[0] {
                for y in o.lo[1]..=o.hi[1] {
                    for x in o.lo[2]..=o.hi[2] {
                        let i = g.index([z, y, x]);
                        anatomy[i] = o.label as f32;
                        hu[i] = o.hu;
                    }
                }
            }
        }
        let mut gt = Mask::empty(g);
        let mut weak = Mask::empty(g);
        for n in &self.nodes {
            for v in node_voxels(&g, n) {
                gt.set(v, true);
                hu[g.index(v)] = NODE_HU;
                if n.annotated {
                    weak.set(v, true);
                }
            }
        }
        if self.noise_std > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let noise = Normal::new(0.0, self.noise_std).expect("validated std");
            for v in &mut hu {
                *v += noise.sample(&mut rng);
            }
        }
        Ok(PhantomCase {
            image: VolumeGrid::new(
                g,
                VolumeKind::Intensity,
                hu.iter().map(|&v| v as f32).collect(),
            )?,
            gt,
            weak,
            anatomy: VolumeGrid::new(g, VolumeKind::Label, anatomy)?,
        })
    }

    /// Random mediastinum-like layout: two lungs split into lobes (labels
    /// 13 to 17), heart and aorta boxes, and `n_nodes` non-overlapping
    /// spherical nodes between them with diameters of 3 to 18 mm.
    pub fn random(seed: u64, dims: Index3, spacing: [f64; 3], n_nodes: usize) -> Result<Self> {
        let g = Geometry::with_spacing(dims, spacing)?;
        if dims.iter().any(|&d| d < 8) {
            return Err(Error::InvalidArgument(format!(
                "random phantoms need at least 8 voxels per axis, got {dims:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        // Body occupies the inner 3/4 of each axis; the shell is air.
        let [z0, y0, x0] = dims.map(|d| d / 8);
        let [z1, y1, x1] = dims.map(|d| d - d / 8 - 1);
        let lung_w = (x1 - x0 + 1) / 4;
        let zs = (z0 + z1) / 2;
        let ys = (y0 + y1) / 2;
        let (xm, xw) = ((x0 + x1) / 2, (x1 - x0) / 8);
        let organs = vec![
            // right lung: upper, middle, lower lobes
            OrganBox {
                label: 13,
                lo: [z0, y0, x0],
                hi: [zs, y1, x0 + lung_w - 1],
                hu: LUNG_HU,
            },
            OrganBox {
                label: 14,
                lo: [zs + 1, y0, x0],
                hi: [z1, ys, x0 + lung_w - 1],
                hu: LUNG_HU,
            },
            OrganBox {
                label: 15,
                lo: [zs + 1, ys + 1, x0],
                hi: [z1, y1, x0 + lung_w - 1],
                hu: LUNG_HU,
            },
            // left lung: upper, lower lobes
            OrganBox {
                label: 16,
                lo: [z0, y0, x1 + 1 - lung_w],
                hi: [zs, y1, x1],
                hu: LUNG_HU,
            },
            OrganBox {
                label: 17,
                lo: [zs + 1, y0, x1 + 1 - lung_w],
                hi: [z1, y1, x1],
                hu: LUNG_HU,
            },
            // heart, anterior and caudal
            OrganBox {
                label: 51,
                lo: [(z0 + 2 * z1) / 3, y0, xm - xw],
                hi: [z1, (3 * y0 + y1) / 4, xm + xw],
                hu: rng.random_range(40.0..60.0),
            },
            // aorta, posterior and narrow
            OrganBox {
                label: 52,
                lo: [z0, (y0 + 7 * y1) / 8, xm - xw / 2],
                hi: [z1, y1, xm + xw / 2],
                hu: rng.random_range(250.0..300.0),
            },
        ];

        let free = |v: Index3| !organs.iter().any(|o| o.contains(v));
        let mut nodes: Vec<NodeSpec> = Vec::with_capacity(n_nodes);
        let mut attempts = 0;
        while nodes.len() < n_nodes && attempts < 500 * n_nodes.max(1) {
            attempts += 1;
            let r = rng.random_range(1.5..9.0);
            let c = [
                rng.random_range(z0 as f64..z1 as f64) * spacing[0],
                rng.random_range(y0 as f64..y1 as f64) * spacing[1],
                rng.random_range(x0 as f64..x1 as f64) * spacing[2],
            ];
            let cand = NodeSpec::sphere(c, r, rng.random_bool(0.35));
            let clear = nodes.iter().all(|n| {
                let d: f64 = (0..3)
                    .map(|a| (n.center_mm[a] - c[a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                d > n.radii_mm[0] + r + 2.0 * spacing[0]
            });
            if !clear {
                continue;
            }
            let vox = node_voxels(&g, &cand);
            let inside = vox
                .iter()
                .all(|v| (0..3).all(|a| [z0, y0, x0][a] < v[a] && v[a] < [z1, y1, x1][a]));
            if vox.is_empty() || !inside || !vox.iter().all(|&v| free(v)) {
                continue;
            }
            nodes.push(cand);
        }
        if nodes.len() < n_nodes {
            return Err(Error::InvalidArgument(format!(
                "could only place {} of {n_nodes} nodes in {dims:?}",
                nodes.len()
            )));
        }
        Ok(PhantomSpec {
            dims,
            spacing,
            origin: [0.0; 3],
            seed,
            nodes,
            organs,
            noise_std: 20.0,
        })
    }
}

/// Voxels whose centres fall inside the node ellipsoid.
pub fn node_voxels(g: &Geometry, n: &NodeSpec) -> Vec<Index3> {
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let c = (n.center_mm[a] - g.origin[a]) / g.spacing[a];
        let r = n.radii_mm[a] / g.spacing[a];
        lo[a] = (c - r).floor().max(0.0) as usize;
        hi[a] = ((c + r).ceil().max(0.0) as usize).min(g.dims[a] - 1);
    }
    let mut out = Vec::new();
    for z in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for x in lo[2]..=hi[2] {
                if n.contains(g.position([z, y, x])) {
                    out.push([z, y, x]);
                }
            }
        }
    }
    out
}

/// A stand-in segmentation model for evaluation tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model")]
pub enum SimulatedModel {
    /// Finds exactly the nodes whose short axis reaches `min_short_mm`.
    LargeOnly { min_short_mm: f64 },
    /// Finds every node but drops each surface voxel with probability
    /// `dropout`.
    AllSizes { dropout: f64 },
}

impl SimulatedModel {
    pub fn tag(&self) -> &'static str {
        match self {
            SimulatedModel::LargeOnly { .. } => "large-only",
            SimulatedModel::AllSizes { .. } => "all-sizes",
        }
    }
}

pub fn simulate_prediction(
    gt: &Mask,
    model: SimulatedModel,
    connectivity: Connectivity,
    seed: u64,
) -> Result<Mask> {
    match model {
        SimulatedModel::LargeOnly { min_short_mm } => {
            Ok(postprocess_filter(gt, min_short_mm, connectivity))
        }
        SimulatedModel::AllSizes { dropout } => {
            if !(0.0..=1.0).contains(&dropout) {
                return Err(Error::InvalidArgument(format!(
                    "dropout must lie in [0, 1], got {dropout}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = gt.clone();
            for v in surface_voxels(gt) {
                if rng.random_bool(dropout) {
                    out.set(v, false);
                }
            }
            Ok(out)
        }
    }
}
