//! Turning incomplete foreground annotations into training supervision.
//!
//! Every strategy is expressed on one tri-state map: each voxel is known
//! foreground, known background, or unknown. Unknown voxels are exactly the
//! ones excluded from the loss. Strategies only ever move voxels from
//! UNKNOWN to BACKGROUND, so supervision grows monotonically and expert
//! foreground is never overwritten.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph3d::{dilate, BoundingBox, Mask, StructuringElement};
use crate::report::TableRow;
use crate::volgrid::{Geometry, VolumeGrid, VolumeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Supervision {
    Unknown = 0,
    Background = 1,
    Foreground = 2,
}

impl Supervision {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Supervision::Unknown),
            1 => Some(Supervision::Background),
            2 => Some(Supervision::Foreground),
            _ => None,
        }
    }
}

/// Per-voxel supervision on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationState {
    geometry: Geometry,
    state: Vec<Supervision>,
}

impl AnnotationState {
    pub fn new(geometry: Geometry, state: Vec<Supervision>) -> Result<Self> {
        geometry.validate()?;
        if state.len() != geometry.len() {
            return Err(Error::PayloadLength {
                expected: geometry.len(),
                found: state.len(),
            });
        }
        Ok(AnnotationState { geometry, state })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn states(&self) -> &[Supervision] {
        &self.state
    }

    pub fn count(&self, s: Supervision) -> usize {
        self.state.iter().filter(|&&v| v == s).count()
    }

    pub fn mask_of(&self, s: Supervision) -> Mask {
        Mask::new(self.geometry, self.state.iter().map(|&v| v == s).collect())
            .expect("state matches its geometry")
    }

    /// Voxels that contribute to the loss: everything not UNKNOWN.
    pub fn loss_mask(&self) -> Mask {
        Mask::new(
            self.geometry,
            self.state
                .iter()
                .map(|&v| v != Supervision::Unknown)
                .collect(),
        )
        .expect("state matches its geometry")
    }

    pub fn to_grid(&self) -> VolumeGrid {
        VolumeGrid::new(
            self.geometry,
            VolumeKind::Tristate,
            self.state.iter().map(|&s| s.code() as f32).collect(),
        )
        .expect("codes are valid tristate values")
    }

    pub fn from_grid(grid: &VolumeGrid) -> Result<Self> {
        let state = grid
            .data()
            .iter()
            .map(|&v| {
                Supervision::from_code(v as u8)
                    .filter(|_| v.fract() == 0.0 && v >= 0.0)
                    .ok_or_else(|| Error::InvalidGrid(format!("tristate code {v}")))
            })
            .collect::<Result<_>>()?;
        AnnotationState::new(*grid.geometry(), state)
    }

    pub fn crop(&self, b: &BoundingBox) -> Result<Self> {
        let grid = crate::morph3d::crop(&self.to_grid(), b)?;
        AnnotationState::from_grid(&grid)
    }

    /// Sets every voxel selected by `rule` that is currently UNKNOWN to BACKGROUND.
    fn fill_unknown(&self, mut rule: impl FnMut(usize) -> bool) -> Self {
        let state = self
            .state
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                if s == Supervision::Unknown && rule(i) {
                    Supervision::Background
                } else {
                    s
                }
            })
            .collect();
        AnnotationState {
            geometry: self.geometry,
            state,
        }
    }
}

/// Annotated voxels become FOREGROUND, everything else UNKNOWN.
pub fn from_weak_labels(weak: &Mask) -> AnnotationState {
    AnnotationState {
        geometry: *weak.geometry(),
        state: weak
            .bits()
            .iter()
            .map(|&b| {
                if b {
                    Supervision::Foreground
                } else {
                    Supervision::Unknown
                }
            })
            .collect(),
    }
}

/// Noisy-label training: every unknown voxel is declared background.
pub fn strategy_noisy_label(state: &AnnotationState) -> AnnotationState {
    state.fill_unknown(|_| true)
}

/// Loss masking leaves the states as they are; unknown voxels simply carry a
/// zero loss weight in the exported mask.
pub fn strategy_loss_masking(state: &AnnotationState) -> AnnotationState {
    state.clone()
}

/// Foreground instance coating: a hull of `margin_voxels` dilation steps
/// around the annotated foreground is marked background where unknown.
pub fn strategy_instance_coating(
    state: &AnnotationState,
    margin_voxels: usize,
    se: StructuringElement,
) -> Result<AnnotationState> {
    if margin_voxels == 0 {
        return Err(Error::InvalidArgument(
            "coating margin must be at least one voxel".into(),
        ));
    }
    let fg = state.mask_of(Supervision::Foreground);
    if fg.is_empty() {
        return Ok(state.clone());
    }
    let grown = dilate(&fg, se, margin_voxels)?;
    let hull = grown.bits();
    Ok(state.fill_unknown(|i| hull[i]))
}

/// Which anatomy labels count as background evidence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnatomySubset(Option<BTreeSet<u32>>);

impl AnatomySubset {
    pub fn all() -> Self {
        AnatomySubset(None)
    }

    pub fn only(labels: impl IntoIterator<Item = u32>) -> Self {
        AnatomySubset(Some(labels.into_iter().collect()))
    }

    pub fn contains(&self, label: u32) -> bool {
        label > 0 && self.0.as_ref().is_none_or(|s| s.contains(&label))
    }
}

/// Anatomical pseudo labelling: unknown voxels inside any selected anatomy
/// structure become background. Expert foreground is never overwritten.
pub fn strategy_pseudo_labeling(
    state: &AnnotationState,
    anatomy: &VolumeGrid,
    subset: &AnatomySubset,
) -> Result<AnnotationState> {
    state.geometry.ensure_same_dims(anatomy.geometry())?;
    let labels = anatomy.data();
    Ok(state.fill_unknown(|i| subset.contains(labels[i] as u32)))
}

/// Supervised-voxel statistics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelStats {
    pub total_voxels: usize,
    pub labeled_voxels: usize,
    pub ratio_percent: f64,
}

pub fn voxel_stats(state: &AnnotationState) -> VoxelStats {
    let total = state.state.len();
    let labeled = total - state.count(Supervision::Unknown);
    VoxelStats {
        total_voxels: total,
        labeled_voxels: labeled,
        ratio_percent: labeled as f64 / total as f64 * 100.0,
    }
}

/// Stats line tagged with the case and pipeline stage that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub case_id: String,
    pub stage: String,
    pub strategy: String,
    pub total_voxels: usize,
    pub labeled_voxels: usize,
    pub ratio_percent: f64,
}

impl StageStats {
    pub fn new(case_id: &str, stage: &str, strategy: &str, stats: VoxelStats) -> Self {
        StageStats {
            case_id: case_id.into(),
            stage: stage.into(),
            strategy: strategy.into(),
            total_voxels: stats.total_voxels,
            labeled_voxels: stats.labeled_voxels,
            ratio_percent: stats.ratio_percent,
        }
    }
}

impl TableRow for StageStats {
    fn header() -> Vec<&'static str> {
        vec![
            "case_id",
            "stage",
            "strategy",
            "total_voxels",
            "labeled_voxels",
            "ratio_percent",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.case_id.clone(),
            self.stage.clone(),
            self.strategy.clone(),
            self.total_voxels.to_string(),
            self.labeled_voxels.to_string(),
            self.ratio_percent.to_string(),
        ]
    }
}

/// `(target, loss_mask)`: target is 1 on FOREGROUND, the mask is 1 wherever
/// the state is known.
pub fn export_training_pair(state: &AnnotationState) -> (VolumeGrid, VolumeGrid) {
    (
        state.mask_of(Supervision::Foreground).to_grid(),
        state.loss_mask().to_grid(),
    )
}

/// Inverse of [`export_training_pair`].
pub fn import_training_pair(
    target: &VolumeGrid,
    loss_mask: &VolumeGrid,
) -> Result<AnnotationState> {
    target.geometry().ensure_same_dims(loss_mask.geometry())?;
    let t = Mask::from_grid(target)?;
    let m = Mask::from_grid(loss_mask)?;
    let state = t
        .bits()
        .iter()
        .zip(m.bits())
        .map(|(&fg, &known)| match (fg, known) {
            (true, true) => Ok(Supervision::Foreground),
            (false, true) => Ok(Supervision::Background),
            (false, false) => Ok(Supervision::Unknown),
            (true, false) => Err(Error::InvalidGrid(
                "target foreground outside the loss mask".into(),
            )),
        })
        .collect::<Result<_>>()?;
    AnnotationState::new(*target.geometry(), state)
}
