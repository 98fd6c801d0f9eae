use std::collections::VecDeque;

use super::{Mask, StructuringElement};
use crate::error::{Error, Result};

/// Binary dilation by `iterations` unit steps of the structuring element.
///
/// A voxel is set iff it lies within `iterations` neighbourhood steps of an
/// input voxel; outside the volume counts as background. Implemented as a
/// depth-limited multi-source BFS, so cost scales with the dilated shell
/// rather than with `volume * iterations`.
pub fn dilate(mask: &Mask, se: StructuringElement, iterations: usize) -> Result<Mask> {
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "dilation needs at least one iteration".into(),
        ));
    }
    let g = *mask.geometry();
    let offsets = se.offsets();
    let mut out = mask.bits().to_vec();
    let mut frontier: VecDeque<usize> = mask
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect();

    for _ in 0..iterations {
        if frontier.is_empty() {
            break;
        }
        let mut next = VecDeque::new();
        for i in frontier {
            let here = g.coords(i);
            for &o in &offsets {
                if let Some(n) = g.offset(here, o) {
                    let j = g.index(n);
                    if !out[j] {
                        out[j] = true;
                        next.push_back(j);
                    }
                }
            }
        }
        frontier = next;
    }
    Mask::new(g, out)
}
