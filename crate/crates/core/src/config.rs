//! Pipeline parameters shared by every processing stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{EnlargementRule, DEFAULT_FILTER_MM};
use crate::morph3d::Connectivity;
use crate::volgrid::IntensityWindow;
use crate::weaklab::AnatomySubset;

/// Lung lobe labels of the common whole-body anatomy label map.
pub const LUNG_LOBE_LABELS: [u32; 5] = [13, 14, 15, 16, 17];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// (z, y, x) in mm.
    pub target_spacing: [f64; 3],
    pub window: IntensityWindow,
    pub coating_margin_voxels: usize,
    pub connectivity: Connectivity,
    pub filter_threshold_mm: f64,
    pub bin_width_mm: f64,
    pub enlargement_threshold_mm: f64,
    /// Extra margin around the lung bounding box when cropping.
    pub roi_margin_mm: f64,
    pub lung_labels: Vec<u32>,
    /// Anatomy labels used as background evidence; absent means all.
    pub pseudo_labels: AnatomySubset,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            target_spacing: [3.0, 0.93, 0.93],
            window: IntensityWindow::MEDIASTINAL,
            coating_margin_voxels: 1,
            connectivity: Connectivity::TwentySix,
            filter_threshold_mm: DEFAULT_FILTER_MM,
            bin_width_mm: 2.5,
            enlargement_threshold_mm: EnlargementRule::RECIST.threshold_mm,
            roi_margin_mm: 0.0,
            lung_labels: LUNG_LOBE_LABELS.to_vec(),
            pseudo_labels: AnatomySubset::all(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be > 0, got {v}"
                )))
            }
        };
        for s in self.target_spacing {
            positive("target_spacing", s)?;
        }
        positive("bin_width_mm", self.bin_width_mm)?;
        positive("enlargement_threshold_mm", self.enlargement_threshold_mm)?;
        if !(self.filter_threshold_mm >= 0.0) {
            return Err(Error::InvalidArgument(
                "filter_threshold_mm must be >= 0".into(),
            ));
        }
        if !(self.roi_margin_mm >= 0.0) {
            return Err(Error::InvalidArgument("roi_margin_mm must be >= 0".into()));
        }
        if self.coating_margin_voxels == 0 {
            return Err(Error::InvalidArgument(
                "coating_margin_voxels must be >= 1".into(),
            ));
        }
        IntensityWindow::new(self.window.lo(), self.window.hi())?;
        Ok(())
    }

    pub fn enlargement_rule(&self) -> Result<EnlargementRule> {
        EnlargementRule::new(self.enlargement_threshold_mm)
    }
}
