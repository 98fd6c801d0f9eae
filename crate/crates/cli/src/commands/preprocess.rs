use lymphkit_core::morph3d::{bounding_box_of, crop, BoundingBox};
use lymphkit_core::report::render_rows;
use lymphkit_core::volgrid::{clip_and_standardize, resample, Interpolation};
use lymphkit_core::weaklab::{from_weak_labels, strategy_pseudo_labeling, voxel_stats, StageStats};
use lymphkit_core::{Mask, PipelineConfig, VolumeGrid};
use serde::Serialize;

use super::{par_map, Context};
use crate::args::CasesArgs;
use crate::error::{CliError, CliResult};
use crate::layout::{self, discover_cases, CaseDir, ANATOMY, IMAGE, LABELS_GT, LABELS_WEAK};

pub const STATS_STEM: &str = "preprocess-stats";

#[derive(Serialize)]
struct Record<'a> {
    case_id: &'a str,
    source_dims: [usize; 3],
    source_spacing: [f64; 3],
    resampled_dims: [usize; 3],
    roi: Option<BoundingBox>,
    config: &'a PipelineConfig,
}

pub fn run(ctx: &Context, args: &CasesArgs) -> CliResult<String> {
    let cases = discover_cases(&args.cases)?;
    let rows: Vec<StageStats> = par_map(&cases, |c| preprocess_case(ctx, c))?
        .into_iter()
        .flatten()
        .collect();
    Ok(render_rows(&rows, ctx.format))
}

fn read_optional(case: &CaseDir, sub: &str) -> CliResult<Option<VolumeGrid>> {
    case.volume(sub)?.map(|p| layout::read(&p)).transpose()
}

/// Resample, lung-box crop, window and standardise one case. Stage stats
/// follow the raw / ROI crop / pseudo-label progression.
fn preprocess_case(ctx: &Context, case: &CaseDir) -> CliResult<Vec<StageStats>> {
    let cfg = &ctx.config;
    let id = case.id.as_str();
    let stage = |s: &str| CliError::stage(format!("{id}: {s}"));

    let image = layout::read(&case.require(IMAGE)?)?;
    let weak = layout::read(&case.require(LABELS_WEAK)?)?;
    let gt = read_optional(case, LABELS_GT)?;
    let anatomy = read_optional(case, ANATOMY)?;
    for g in [Some(&weak), gt.as_ref(), anatomy.as_ref()]
        .into_iter()
        .flatten()
    {
        image
            .geometry()
            .ensure_same_dims(g.geometry())
            .map_err(CliError::input(format!("{id}: volume shapes")))?;
    }
    let source = *image.geometry();

    let nearest = |g: &VolumeGrid| {
        resample(g, cfg.target_spacing, Interpolation::Nearest).map_err(stage("resample"))
    };
    let mut image = resample(&image, cfg.target_spacing, Interpolation::Trilinear)
        .map_err(stage("resample"))?;
    let mut weak = nearest(&weak)?;
    let mut gt = gt.as_ref().map(nearest).transpose()?;
    let mut anatomy = anatomy.as_ref().map(nearest).transpose()?;
    let resampled_dims = image.dims();

    let mut state = from_weak_labels(&Mask::foreground_of(&weak));
    let mut rows = vec![StageStats::new(id, "raw", "weak", voxel_stats(&state))];
    let mut roi = None;

    if let Some(anat) = anatomy.as_mut() {
        let lung = Mask::new(
            *anat.geometry(),
            anat.data()
                .iter()
                .map(|&v| v > 0.0 && cfg.lung_labels.contains(&(v as u32)))
                .collect(),
        )
        .map_err(stage("roi-crop"))?;
        let bbox =
            bounding_box_of(&lung, cfg.roi_margin_mm).map_err(stage("roi-crop: lung mask"))?;
        let cut = |g: &VolumeGrid| crop(g, &bbox).map_err(stage("roi-crop"));
        image = cut(&image)?;
        weak = cut(&weak)?;
        gt = gt.as_ref().map(cut).transpose()?;
        *anat = cut(anat)?;
        state = state.crop(&bbox).map_err(stage("roi-crop"))?;
        rows.push(StageStats::new(id, "roi-crop", "weak", voxel_stats(&state)));

        let pseudo = strategy_pseudo_labeling(&state, anat, &cfg.pseudo_labels)
            .map_err(stage("pseudo-label"))?;
        rows.push(StageStats::new(
            id,
            "pseudo-label",
            "pseudo",
            voxel_stats(&pseudo),
        ));
        roi = Some(bbox);
    }

    let image = clip_and_standardize(&image, cfg.window).map_err(stage("standardize"))?;

    let out = case.derived();
    layout::clear_dir(&out)?;
    let fmt = ctx.volume_format;
    layout::write(&image, &layout::volume_path(&out, IMAGE, fmt))?;
    layout::write(&weak, &layout::volume_path(&out, LABELS_WEAK, fmt))?;
    if let Some(g) = &gt {
        layout::write(g, &layout::volume_path(&out, LABELS_GT, fmt))?;
    }
    if let Some(a) = &anatomy {
        layout::write(a, &layout::volume_path(&out, ANATOMY, fmt))?;
    }
    layout::write_report(&out, STATS_STEM, &rows, ctx.format)?;
    layout::write_json(
        &out.join("preprocess.json"),
        &Record {
            case_id: id,
            source_dims: source.dims,
            source_spacing: source.spacing,
            resampled_dims,
            roi,
            config: cfg,
        },
    )?;
    Ok(rows)
}
