use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{VolumeGrid, VolumeKind};
use crate::error::{Error, Result};

/// Hounsfield clipping window, `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct IntensityWindow {
    lo: f64,
    hi: f64,
}

impl IntensityWindow {
    /// Soft-tissue mediastinal window used for the submission model.
    pub const MEDIASTINAL: IntensityWindow = IntensityWindow {
        lo: -150.0,
        hi: 350.0,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "intensity window needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(IntensityWindow { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Default for IntensityWindow {
    fn default() -> Self {
        Self::MEDIASTINAL
    }
}

impl TryFrom<[f64; 2]> for IntensityWindow {
    type Error = Error;
    fn try_from([lo, hi]: [f64; 2]) -> Result<Self> {
        IntensityWindow::new(lo, hi)
    }
}

impl From<IntensityWindow> for [f64; 2] {
    fn from(w: IntensityWindow) -> Self {
        [w.lo, w.hi]
    }
}

/// Clamp to the window, then shift and scale to zero mean and unit
/// (population) standard deviation over the whole volume.
///
/// A volume whose clamped values are all equal maps to all zeros.
pub fn clip_and_standardize(grid: &VolumeGrid, window: IntensityWindow) -> Result<VolumeGrid> {
    if grid.kind() != VolumeKind::Intensity {
        return Err(Error::InvalidArgument(format!(
            "clip_and_standardize needs an intensity volume, got {}",
            grid.kind().as_str()
        )));
    }
    let clamp = |v: f32| (v as f64).clamp(window.lo, window.hi);
    let n = grid.data().len() as f64;

    // Chunked sums keep the reduction order fixed regardless of thread count.
    let chunk_sums = |f: &(dyn Fn(f64) -> f64 + Sync)| -> f64 {
        grid.data()
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&v| f(clamp(v))).sum::<f64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    };

    let (min, max) = grid
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let c = clamp(v);
            (lo.min(c), hi.max(c))
        });

    let data = if min == max {
        vec![0.0f32; grid.data().len()]
    } else {
        let mean = chunk_sums(&|c| c) / n;
        let var = chunk_sums(&|c| (c - mean) * (c - mean)) / n;
        let std = var.sqrt();
        grid.data()
            .par_iter()
            .map(|&v| ((clamp(v) - mean) / std) as f32)
            .collect()
    };
    VolumeGrid::new(*grid.geometry(), VolumeKind::Intensity, data)
}

const CHUNK: usize = 1 << 16;
