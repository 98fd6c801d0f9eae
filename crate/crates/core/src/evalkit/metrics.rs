use serde::{Deserialize, Serialize};

use super::CaseMetrics;
use crate::error::Result;
use crate::morph3d::{directed_surface_distances, surface_voxels, DistanceBackend, Mask};

/// `2|P∩G| / (|P|+|G|)`; two empty masks agree perfectly and score 1.
pub fn dice(pred: &Mask, gt: &Mask) -> Result<f64> {
    pred.geometry().ensure_same_dims(gt.geometry())?;
    let (mut p, mut g, mut both) = (0usize, 0usize, 0usize);
    for (&a, &b) in pred.bits().iter().zip(gt.bits()) {
        p += a as usize;
        g += b as usize;
        both += (a && b) as usize;
    }
    if p + g == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (p + g) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assd {
    pub assd_mm: f64,
    /// Set when at least one mask was empty and no surface distance exists.
    pub fallback_used: bool,
}

/// Average symmetric surface distance, pooled over both directions: the sum
/// of all pred→gt and gt→pred surface distances divided by the total number
/// of surface voxels.
///
/// If exactly one mask is empty the result is the physical diagonal of the
/// volume, flagged; two empty masks give 0, also flagged.
pub fn assd(pred: &Mask, gt: &Mask) -> Result<Assd> {
    assd_with(pred, gt, DistanceBackend::Auto)
}

pub fn assd_with(pred: &Mask, gt: &Mask, backend: DistanceBackend) -> Result<Assd> {
    pred.geometry().ensure_same_dims(gt.geometry())?;
    let sp = surface_voxels(pred);
    let sg = surface_voxels(gt);
    match (sp.is_empty(), sg.is_empty()) {
        (true, true) => {
            return Ok(Assd {
                assd_mm: 0.0,
                fallback_used: true,
            })
        }
        (true, false) | (false, true) => {
            return Ok(Assd {
                assd_mm: pred.geometry().physical_diagonal_mm(),
                fallback_used: true,
            })
        }
        _ => {}
    }
    let spacing = pred.spacing();
    let forward = directed_surface_distances(&sp, &sg, spacing, backend)?;
    let backward = directed_surface_distances(&sg, &sp, spacing, backend)?;
    // summed per direction so that swapping the arguments is exact
    let total = forward.iter().sum::<f64>() + backward.iter().sum::<f64>();
    Ok(Assd {
        assd_mm: total / (forward.len() + backward.len()) as f64,
        fallback_used: false,
    })
}

pub fn evaluate_case(case_id: &str, pred: &Mask, gt: &Mask) -> Result<CaseMetrics> {
    let d = dice(pred, gt)?;
    let a = assd(pred, gt)?;
    Ok(CaseMetrics {
        case_id: case_id.to_string(),
        dice: d,
        assd_mm: a.assd_mm,
        assd_fallback_used: a.fallback_used,
    })
}
