use lymphkit_core::measure::postprocess_filter;
use lymphkit_core::morph3d::connected_components;
use lymphkit_core::report::render_rows;
use lymphkit_core::volgrid::VolumeFormat;
use lymphkit_core::Mask;
use serde::Serialize;

use super::{table_row, Context};
use crate::args::PostprocessArgs;
use crate::error::{CliError, CliResult};
use crate::layout;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostprocessRow {
    pub threshold_mm: f64,
    pub components_in: usize,
    pub components_kept: usize,
    pub voxels_removed: usize,
}
table_row!(PostprocessRow {
    threshold_mm,
    components_in,
    components_kept,
    voxels_removed
});

pub fn run(ctx: &Context, args: &PostprocessArgs) -> CliResult<String> {
    let cfg = &ctx.config;
    if VolumeFormat::from_path(&args.output).is_none() {
        return Err(CliError::Usage(format!(
            "{}: unknown volume extension",
            args.output.display()
        )));
    }
    let mask = Mask::foreground_of(&layout::read(&args.input)?);
    let kept = postprocess_filter(&mask, cfg.filter_threshold_mm, cfg.connectivity);
    layout::write(&kept.to_grid(), &args.output)?;
    let row = PostprocessRow {
        threshold_mm: cfg.filter_threshold_mm,
        components_in: connected_components(&mask, cfg.connectivity).len(),
        components_kept: connected_components(&kept, cfg.connectivity).len(),
        voxels_removed: mask.count() - kept.count(),
    };
    Ok(render_rows(&[row], ctx.format))
}
