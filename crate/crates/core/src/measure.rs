//! RECIST-style short-axis measurement of connected components.
//!
//! Each axial slice of a component is reduced to the 2D set of its voxel
//! centres in mm. The long axis is the largest pairwise distance in that
//! set; the short axis is the extent of the set measured perpendicular to the
//! long axis. Both extents grow by one mean in-plane spacing so a single
//! voxel has a non-zero size. The component is reported on the slice with
//! the largest short axis (lowest slice index on ties).
//!
//! When several point pairs attain the long-axis length (discs, squares) the
//! short axis is the largest perpendicular extent among those directions, so
//! the result does not depend on enumeration order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph3d::{connected_components, Component, ComponentSet, Connectivity, Mask};
use crate::report::TableRow;

/// Relative tolerance for treating two long-axis candidates as equally long.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterMeasurement {
    pub component_id: u32,
    pub shortest_diameter_mm: f64,
    pub slice_index: usize,
    pub long_axis_mm: f64,
}

/// Enlarged iff `shortest_diameter_mm >= threshold_mm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnlargementRule {
    pub threshold_mm: f64,
}

impl EnlargementRule {
    pub const RECIST: EnlargementRule = EnlargementRule { threshold_mm: 10.0 };

    pub fn new(threshold_mm: f64) -> Result<Self> {
        if !(threshold_mm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "enlargement threshold must be > 0, got {threshold_mm}"
            )));
        }
        Ok(EnlargementRule { threshold_mm })
    }
}

impl Default for EnlargementRule {
    fn default() -> Self {
        Self::RECIST
    }
}

/// In-slice axes of one axial slice, before footprint compensation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceAxes {
    pub long_mm: f64,
    pub short_mm: f64,
}

fn cross(o: [i64; 2], a: [i64; 2], b: [i64; 2]) -> i64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull vertices (collinear points dropped) of lattice points.
fn convex_hull(mut pts: Vec<[i64; 2]>) -> Vec<[i64; 2]> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<[i64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[i64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.is_empty() {
        // all points collinear: keep the two extremes
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Long and short axis of lattice points `(y, x)` at in-plane spacing
/// `(sy, sx)`. Scaling axes preserves convexity, so the hull is built in
/// index space and only its vertices are examined.
pub fn slice_axes(points: &[[usize; 2]], sy: f64, sx: f64) -> SliceAxes {
    let hull = convex_hull(points.iter().map(|p| [p[0] as i64, p[1] as i64]).collect());
    // relative to the hull corner, so translated inputs give identical bits
    let y0 = hull.iter().map(|p| p[0]).min().unwrap_or(0);
    let x0 = hull.iter().map(|p| p[1]).min().unwrap_or(0);
    let phys: Vec<[f64; 2]> = hull
        .iter()
        .map(|p| [(p[0] - y0) as f64 * sy, (p[1] - x0) as f64 * sx])
        .collect();
    if phys.len() < 2 {
        return SliceAxes {
            long_mm: 0.0,
            short_mm: 0.0,
        };
    }
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let mut max_d2 = 0.0f64;
    for i in 0..phys.len() {
        for j in i + 1..phys.len() {
            max_d2 = max_d2.max(d2(phys[i], phys[j]));
        }
    }
    let mut short = 0.0f64;
    for i in 0..phys.len() {
        for j in i + 1..phys.len() {
            if d2(phys[i], phys[j]) < max_d2 * (1.0 - TIE_TOLERANCE) {
                continue;
            }
            short = short.max(perpendicular_extent(&phys, phys[i], phys[j]));
        }
    }
    SliceAxes {
        long_mm: max_d2.sqrt(),
        short_mm: short,
    }
}

/// Extent of `pts` along the normal of the segment `a`-`b`.
pub fn perpendicular_extent(pts: &[[f64; 2]], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (uy, ux) = (b[0] - a[0], b[1] - a[1]);
    let len = (uy * uy + ux * ux).sqrt();
    let (ny, nx) = (-ux / len, uy / len);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let t = p[0] * ny + p[1] * nx;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    hi - lo
}

/// Short-axis diameter of a component, maximised over axial slices.
pub fn shortest_diameter(component: &Component, spacing: [f64; 3]) -> Result<DiameterMeasurement> {
    if component.voxels.is_empty() {
        return Err(Error::EmptyComponent);
    }
    let [_, sy, sx] = spacing;
    let footprint = 0.5 * (sy + sx);

    let mut voxels = component.voxels.clone();
    voxels.sort_unstable();
    let mut best: Option<DiameterMeasurement> = None;
    for slice in voxels.chunk_by(|a, b| a[0] == b[0]) {
        let pts: Vec<[usize; 2]> = slice.iter().map(|v| [v[1], v[2]]).collect();
        let axes = slice_axes(&pts, sy, sx);
        let candidate = DiameterMeasurement {
            component_id: component.id,
            shortest_diameter_mm: axes.short_mm + footprint,
            slice_index: slice[0][0],
            long_axis_mm: axes.long_mm + footprint,
        };
        match best {
            Some(b) if candidate.shortest_diameter_mm <= b.shortest_diameter_mm => {}
            _ => best = Some(candidate),
        }
    }
    Ok(best.expect("non-empty component has a slice"))
}

/// Measures every component and stores the diameter back into the set.
pub fn measure_components(cs: &mut ComponentSet) -> Vec<DiameterMeasurement> {
    let spacing = cs.spacing;
    cs.components
        .iter_mut()
        .map(|c| {
            let m = shortest_diameter(c, spacing).expect("components are non-empty");
            c.shortest_diameter_mm = Some(m.shortest_diameter_mm);
            m
        })
        .collect()
}

pub fn classify_enlarged(m: &DiameterMeasurement, rule: EnlargementRule) -> bool {
    m.shortest_diameter_mm >= rule.threshold_mm
}

/// Erases every connected component whose short axis is below
/// `min_short_diameter_mm`. Surviving voxels are untouched.
pub fn postprocess_filter(
    pred: &Mask,
    min_short_diameter_mm: f64,
    connectivity: Connectivity,
) -> Mask {
    let cs = connected_components(pred, connectivity);
    let mut out = pred.clone();
    for c in &cs.components {
        let m = shortest_diameter(c, cs.spacing).expect("components are non-empty");
        if m.shortest_diameter_mm < min_short_diameter_mm {
            for &v in &c.voxels {
                out.set(v, false);
            }
        }
    }
    out
}

/// Default short-axis cut-off for the submission post-processing.
pub const DEFAULT_FILTER_MM: f64 = 9.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

impl TableRow for HistogramBin {
    fn header() -> Vec<&'static str> {
        vec!["bin_lo", "bin_hi", "count"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.bin_lo.to_string(),
            self.bin_hi.to_string(),
            self.count.to_string(),
        ]
    }
}

/// Index `k` of the half-open bin `[k*w, (k+1)*w)` holding `value >= 0`.
pub fn bin_index(value: f64, width: f64) -> usize {
    let mut k = (value / width).floor().max(0.0) as usize;
    while (k as f64 + 1.0) * width <= value {
        k += 1;
    }
    while k > 0 && k as f64 * width > value {
        k -= 1;
    }
    k
}

/// Contiguous half-open bins from 0 up to the last populated one.
pub fn histogram(values: &[f64], bin_width_mm: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width_mm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width must be > 0, got {bin_width_mm}"
        )));
    }
    let Some(last) = values.iter().map(|&v| bin_index(v, bin_width_mm)).max() else {
        return Ok(Vec::new());
    };
    let mut counts = vec![0usize; last + 1];
    for &v in values {
        counts[bin_index(v, bin_width_mm)] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            bin_lo: k as f64 * bin_width_mm,
            bin_hi: (k + 1) as f64 * bin_width_mm,
            count,
        })
        .collect())
}

/// Histogram of component short axes; unmeasured components are measured.
pub fn diameter_histogram(cs: &ComponentSet, bin_width_mm: f64) -> Result<Vec<HistogramBin>> {
    let diameters: Vec<f64> = cs
        .components
        .iter()
        .map(|c| match c.shortest_diameter_mm {
            Some(d) => Ok(d),
            None => shortest_diameter(c, cs.spacing).map(|m| m.shortest_diameter_mm),
        })
        .collect::<Result<_>>()?;
    histogram(&diameters, bin_width_mm)
}

/// Volume and component counts of a labelled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetLnStats {
    pub volumes: usize,
    pub components: usize,
    pub enlarged: usize,
}

impl DatasetLnStats {
    /// Adds one label volume; returns the measured short axes of its components.
    pub fn add_case(
        &mut self,
        labels: &Mask,
        rule: EnlargementRule,
        connectivity: Connectivity,
    ) -> Vec<f64> {
        let mut cs = connected_components(labels, connectivity);
        let ms = measure_components(&mut cs);
        self.volumes += 1;
        self.components += ms.len();
        self.enlarged += ms.iter().filter(|m| classify_enlarged(m, rule)).count();
        ms.into_iter().map(|m| m.shortest_diameter_mm).collect()
    }
}

/// Counts over a list of `(label volume, rule)` cases.
pub fn dataset_ln_stats<'a>(
    cases: impl IntoIterator<Item = (&'a Mask, EnlargementRule)>,
    connectivity: Connectivity,
) -> DatasetLnStats {
    let mut stats = DatasetLnStats::default();
    for (mask, rule) in cases {
        stats.add_case(mask, rule, connectivity);
    }
    stats
}

/// One row of a measurement catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRow {
    pub component_id: u32,
    pub voxels: usize,
    pub volume_mm3: f64,
    pub shortest_diameter_mm: f64,
    pub long_axis_mm: f64,
    pub slice: usize,
    pub enlarged: bool,
}

impl TableRow for MeasurementRow {
    fn header() -> Vec<&'static str> {
        vec![
            "component_id",
            "voxels",
            "volume_mm3",
            "shortest_diameter_mm",
            "long_axis_mm",
            "slice",
            "enlarged",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.component_id.to_string(),
            self.voxels.to_string(),
            self.volume_mm3.to_string(),
            self.shortest_diameter_mm.to_string(),
            self.long_axis_mm.to_string(),
            self.slice.to_string(),
            self.enlarged.to_string(),
        ]
    }
}

/// Components of `mask` with their measurements, largest first.
pub fn measurement_catalog(
    mask: &Mask,
    rule: EnlargementRule,
    connectivity: Connectivity,
) -> Vec<MeasurementRow> {
    let mut cs = connected_components(mask, connectivity);
    let ms = measure_components(&mut cs);
    cs.components
        .iter()
        .zip(ms)
        .map(|(c, m)| MeasurementRow {
            component_id: c.id,
            voxels: c.len(),
            volume_mm3: c.volume_mm3,
            shortest_diameter_mm: m.shortest_diameter_mm,
            long_axis_mm: m.long_axis_mm,
            slice: m.slice_index,
            enlarged: classify_enlarged(&m, rule),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPACING: [f64; 3] = [3.0, 0.93, 0.93];

    fn component(voxels: Vec<[usize; 3]>) -> Component {
        Component {
            id: 1,
            volume_mm3: 0.0,
            voxels,
            shortest_diameter_mm: None,
        }
    }

    #[test]
    fn single_voxel_is_one_footprint() {
        let m = shortest_diameter(&component(vec![[4, 5, 6]]), SPACING).unwrap();
        assert!((m.shortest_diameter_mm - 0.93).abs() < 1e-12);
        assert!((m.long_axis_mm - 0.93).abs() < 1e-12);
        assert_eq!(m.slice_index, 4);
    }

    #[test]
    fn row_along_x() {
        let c = component((0..11).map(|x| [0, 0, x]).collect());
        let m = shortest_diameter(&c, SPACING).unwrap();
        assert!((m.long_axis_mm - 10.23).abs() < 1e-9);
        assert!((m.shortest_diameter_mm - 0.93).abs() < 1e-12);
    }

    #[test]
    fn rectangle_short_axis_is_perpendicular_to_diagonal() {
        // 3 x 5 block, unit spacing: diagonal (2,4) is the unique long axis.
        let pts: Vec<[usize; 2]> = (0..3).flat_map(|y| (0..5).map(move |x| [y, x])).collect();
        let a = slice_axes(&pts, 1.0, 1.0);
        assert!((a.long_mm - 20f64.sqrt()).abs() < 1e-12);
        // corners (0,4) and (2,0) project furthest from the (0,0)-(2,4) axis
        let expect = 2.0 * 8.0 / 20f64.sqrt();
        assert!((a.short_mm - expect).abs() < 1e-12);
    }

    #[test]
    fn square_ties_pick_largest_perpendicular_extent() {
        let pts: Vec<[usize; 2]> = (0..4).flat_map(|y| (0..4).map(move |x| [y, x])).collect();
        let a = slice_axes(&pts, 1.0, 1.0);
        assert!((a.long_mm - 18f64.sqrt()).abs() < 1e-12);
        assert!((a.short_mm - 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn slice_with_largest_short_axis_wins_and_ties_go_low() {
        let mut v = vec![];
        for z in [1usize, 3] {
            for y in 0..3 {
                for x in 0..3 {
                    v.push([z, y, x]);
                }
            }
        }
        v.push([0, 0, 0]);
        let m = shortest_diameter(&component(v), [1.0; 3]).unwrap();
        assert_eq!(m.slice_index, 1);
    }

    #[test]
    fn empty_component_errors() {
        assert!(matches!(
            shortest_diameter(&component(vec![]), SPACING),
            Err(Error::EmptyComponent)
        ));
    }

    #[test]
    fn enlargement_is_inclusive() {
        let m = |d| DiameterMeasurement {
            component_id: 1,
            shortest_diameter_mm: d,
            slice_index: 0,
            long_axis_mm: d,
        };
        assert!(classify_enlarged(&m(10.0), EnlargementRule::RECIST));
        assert!(!classify_enlarged(&m(9.99), EnlargementRule::RECIST));
        assert!(EnlargementRule::new(0.0).is_err());
    }

    #[test]
    fn histogram_bins() {
        assert!(histogram(&[], 2.5).unwrap().is_empty());
        let h = histogram(&[12.3], 2.5).unwrap();
        assert_eq!(h.len(), 5);
        assert_eq!(
            h[4],
            HistogramBin {
                bin_lo: 10.0,
                bin_hi: 12.5,
                count: 1
            }
        );
        assert!(h[..4].iter().all(|b| b.count == 0));
        // boundaries are half-open
        let h = histogram(&[0.0, 2.5, 2.4999, 10.0], 2.5).unwrap();
        assert_eq!(
            h.iter().map(|b| b.count).collect::<Vec<_>>(),
            vec![2, 1, 0, 0, 1]
        );
        assert!(histogram(&[1.0], 0.0).is_err());
    }

    #[test]
    fn hull_handles_degenerate_sets() {
        assert_eq!(convex_hull(vec![[1, 1]]), vec![[1, 1]]);
        assert_eq!(
            convex_hull(vec![[0, 0], [0, 1], [0, 2], [0, 3]]),
            vec![[0, 0], [0, 3]]
        );
        let sq = convex_hull(vec![[0, 0], [0, 2], [2, 0], [2, 2], [1, 1], [0, 1]]);
        assert_eq!(sq.len(), 4);
    }
}
