use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{bin_index, shortest_diameter};
use crate::morph3d::{connected_components, Connectivity, Mask};
use crate::report::TableRow;

/// Which mask's components are scored against the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapDirection {
    /// `|g ∩ P| / |g|` per ground-truth component: a sensitivity proxy.
    GtOnPred,
    /// `|p ∩ G| / |p|` per predicted component: a precision proxy.
    PredOnGt,
}

impl OverlapDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            OverlapDirection::GtOnPred => "gt_on_pred",
            OverlapDirection::PredOnGt => "pred_on_gt",
        }
    }
}

impl fmt::Display for OverlapDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapBin {
    pub lo_mm: f64,
    pub mean_overlap: f64,
    pub n: usize,
}

/// Per-component overlap fractions averaged within short-axis bins. Only
/// populated bins are listed, in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapBinCurve {
    pub direction: OverlapDirection,
    pub bin_width_mm: f64,
    pub bins: Vec<OverlapBin>,
}

impl OverlapBinCurve {
    /// Builds a curve from `(short axis, overlap)` samples.
    pub fn from_samples(
        direction: OverlapDirection,
        bin_width_mm: f64,
        samples: &[(f64, f64)],
    ) -> Result<Self> {
        if !(bin_width_mm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bin width must be > 0, got {bin_width_mm}"
            )));
        }
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for &(d, v) in samples {
            let e = acc.entry(bin_index(d, bin_width_mm)).or_default();
            e.0 += v;
            e.1 += 1;
        }
        Ok(OverlapBinCurve {
            direction,
            bin_width_mm,
            bins: acc
                .into_iter()
                .map(|(k, (sum, n))| OverlapBin {
                    lo_mm: k as f64 * bin_width_mm,
                    mean_overlap: sum / n as f64,
                    n,
                })
                .collect(),
        })
    }

    /// Pools several curves of the same direction and width, e.g. over a
    /// cohort. Means are re-weighted by component counts.
    pub fn merge(curves: &[OverlapBinCurve]) -> Result<Option<Self>> {
        let Some(first) = curves.first() else {
            return Ok(None);
        };
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for c in curves {
            if c.direction != first.direction || c.bin_width_mm != first.bin_width_mm {
                return Err(Error::InvalidArgument(
                    "cannot merge curves of different direction or bin width".into(),
                ));
            }
            for b in &c.bins {
                let k = (b.lo_mm / c.bin_width_mm).round() as usize;
                let e = acc.entry(k).or_default();
                e.0 += b.mean_overlap * b.n as f64;
                e.1 += b.n;
            }
        }
        Ok(Some(OverlapBinCurve {
            direction: first.direction,
            bin_width_mm: first.bin_width_mm,
            bins: acc
                .into_iter()
                .map(|(k, (sum, n))| OverlapBin {
                    lo_mm: k as f64 * first.bin_width_mm,
                    mean_overlap: sum / n as f64,
                    n,
                })
                .collect(),
        }))
    }

    pub fn rows(&self) -> Vec<CurveRow> {
        self.bins
            .iter()
            .map(|b| CurveRow {
                direction: self.direction,
                bin_lo: b.lo_mm,
                bin_hi: b.lo_mm + self.bin_width_mm,
                mean: b.mean_overlap,
                n: b.n,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub direction: OverlapDirection,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub mean: f64,
    pub n: usize,
}

impl TableRow for CurveRow {
    fn header() -> Vec<&'static str> {
        vec!["direction", "bin_lo", "bin_hi", "mean", "n"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.direction.to_string(),
            self.bin_lo.to_string(),
            self.bin_hi.to_string(),
            self.mean.to_string(),
            self.n.to_string(),
        ]
    }
}

/// `(short axis, |c ∩ other| / |c|)` for every component `c` of `of`.
fn component_overlaps(of: &Mask, other: &Mask, connectivity: Connectivity) -> Vec<(f64, f64)> {
    let cs = connected_components(of, connectivity);
    cs.components
        .iter()
        .map(|c| {
            let d = shortest_diameter(c, cs.spacing)
                .expect("components are non-empty")
                .shortest_diameter_mm;
            let hit = c.voxels.iter().filter(|&&v| other.get(v)).count();
            (d, hit as f64 / c.len() as f64)
        })
        .collect()
}

/// Returns the `(gt_on_pred, pred_on_gt)` curves.
pub fn overlap_curves(
    pred: &Mask,
    gt: &Mask,
    bin_width_mm: f64,
    connectivity: Connectivity,
) -> Result<(OverlapBinCurve, OverlapBinCurve)> {
    pred.geometry().ensure_same_dims(gt.geometry())?;
    let sens = OverlapBinCurve::from_samples(
        OverlapDirection::GtOnPred,
        bin_width_mm,
        &component_overlaps(gt, pred, connectivity),
    )?;
    let prec = OverlapBinCurve::from_samples(
        OverlapDirection::PredOnGt,
        bin_width_mm,
        &component_overlaps(pred, gt, connectivity),
    )?;
    Ok((sens, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volgrid::Geometry;

    fn two_blobs() -> (Geometry, Mask) {
        let g = Geometry::with_spacing([3, 20, 20], [3.0, 0.93, 0.93]).unwrap();
        let mut m = Mask::empty(g);
        m.set([1, 2, 2], true);
        for y in 8..19 {
            for x in 8..19 {
                m.set([1, y, x], true);
            }
        }
        (g, m)
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let (_, m) = two_blobs();
        let (s, p) = overlap_curves(&m, &m, 2.5, Connectivity::TwentySix).unwrap();
        assert_eq!(s.bins.len(), 2);
        for c in [&s, &p] {
            assert!(c.bins.iter().all(|b| b.mean_overlap == 1.0));
        }
        assert_eq!(s.bins[0].lo_mm, 0.0);
        // square of side 11: short axis is the other diagonal, 9.3·√2 + 0.93
        assert_eq!(s.bins[1].lo_mm, 12.5);
    }

    #[test]
    fn empty_prediction() {
        let (g, m) = two_blobs();
        let (s, p) = overlap_curves(&Mask::empty(g), &m, 2.5, Connectivity::TwentySix).unwrap();
        assert!(s.bins.iter().all(|b| b.mean_overlap == 0.0));
        assert_eq!(s.bins.iter().map(|b| b.n).sum::<usize>(), 2);
        assert!(p.bins.is_empty());
    }

    #[test]
    fn partial_cover_fraction() {
        let g = Geometry::with_spacing([1, 1, 4], [1.0; 3]).unwrap();
        let gt = Mask::from_indices(g, (0..4).map(|x| [0, 0, x]));
        let pred = Mask::from_indices(g, [[0, 0, 0]]);
        let (s, p) = overlap_curves(&pred, &gt, 2.5, Connectivity::Six).unwrap();
        assert_eq!(s.bins[0].mean_overlap, 0.25);
        assert_eq!(p.bins[0].mean_overlap, 1.0);
    }

    #[test]
    fn merge_weights_by_count() {
        let a =
            OverlapBinCurve::from_samples(OverlapDirection::GtOnPred, 2.5, &[(1.0, 1.0)]).unwrap();
        let b = OverlapBinCurve::from_samples(
            OverlapDirection::GtOnPred,
            2.5,
            &[(1.0, 0.0), (2.0, 0.0), (11.0, 1.0)],
        )
        .unwrap();
        let m = OverlapBinCurve::merge(&[a, b]).unwrap().unwrap();
        assert_eq!(m.bins.len(), 2);
        assert!((m.bins[0].mean_overlap - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.bins[0].n, 3);
        assert_eq!(m.bins[1].lo_mm, 10.0);
    }

    #[test]
    fn rows_have_bin_edges() {
        let c =
            OverlapBinCurve::from_samples(OverlapDirection::PredOnGt, 2.5, &[(12.3, 0.5)]).unwrap();
        let r = c.rows();
        assert_eq!((r[0].bin_lo, r[0].bin_hi, r[0].n), (10.0, 12.5, 1));
        assert_eq!(r[0].cells()[0], "pred_on_gt");
    }
}
