use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lymphkit_core::evalkit::{
    cohort_report, evaluate_case, overlap_curves, CaseMetrics, OverlapBinCurve,
};
use lymphkit_core::measure::postprocess_filter;
use lymphkit_core::report::render_rows;
use lymphkit_core::Mask;

use super::{par_map, Context};
use crate::args::EvalArgs;
use crate::error::{CliError, CliResult};
use crate::layout::{self, discover_cases, volume_files, volume_stem, CaseDir, LABELS_GT};

pub const CASES_STEM: &str = "cases";
pub const SUMMARY_STEM: &str = "summary";
pub const CURVES_STEM: &str = "curves";

/// Case id to volume path for a flat directory of volumes.
fn flat_volumes(dir: &Path) -> CliResult<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for p in volume_files(dir)? {
        let stem = volume_stem(&p).expect("volume_files filters by format");
        if let Some(prev) = out.insert(stem.clone(), p) {
            return Err(CliError::Usage(format!(
                "{}: case {stem} appears twice ({})",
                dir.display(),
                prev.display()
            )));
        }
    }
    Ok(out)
}

/// Ground truth from labels-gt/ of a case or dataset, or from a flat
/// directory of volumes.
fn gt_volumes(dir: &Path) -> CliResult<BTreeMap<String, PathBuf>> {
    let flat = flat_volumes(dir)?;
    if !flat.is_empty() && !CaseDir::is_case(dir) {
        return Ok(flat);
    }
    discover_cases(&[dir.to_path_buf()])?
        .into_iter()
        .map(|c| Ok((c.id.clone(), c.require(LABELS_GT)?)))
        .collect()
}

pub fn run(ctx: &Context, args: &EvalArgs) -> CliResult<String> {
    let cfg = &ctx.config;
    let preds = flat_volumes(&args.pred)?;
    let gts = gt_volumes(&args.gt)?;
    if preds.is_empty() {
        return Err(CliError::Missing(args.pred.clone()));
    }
    if let Some(id) = gts.keys().find(|k| !preds.contains_key(*k)) {
        return Err(CliError::Usage(format!("no prediction for case {id}")));
    }
    if let Some(id) = preds.keys().find(|k| !gts.contains_key(*k)) {
        return Err(CliError::Usage(format!("no ground truth for case {id}")));
    }
    let model = match &args.model {
        Some(m) => m.clone(),
        None => args
            .pred
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "model".into()),
    };

    let ids: Vec<&String> = preds.keys().collect();
    let per_case = par_map(&ids, |id| {
        let stage = |s: &str| CliError::stage(format!("{id}: {s}"));
        let mut pred = Mask::foreground_of(&layout::read(&preds[*id])?);
        let gt = Mask::foreground_of(&layout::read(&gts[*id])?);
        if args.postprocess {
            pred = postprocess_filter(&pred, cfg.filter_threshold_mm, cfg.connectivity);
        }
        let metrics = evaluate_case(id, &pred, &gt).map_err(stage("metrics"))?;
        let curves = overlap_curves(&pred, &gt, cfg.bin_width_mm, cfg.connectivity)
            .map_err(stage("overlap curves"))?;
        Ok((metrics, curves))
    })?;

    let (cases, curves): (Vec<CaseMetrics>, Vec<_>) = per_case.into_iter().unzip();
    let summary = cohort_report(&model, &cases).map_err(CliError::stage("summary"))?;
    let (sens, prec): (Vec<OverlapBinCurve>, Vec<OverlapBinCurve>) = curves.into_iter().unzip();
    let mut curve_rows = Vec::new();
    for set in [sens, prec] {
        if let Some(c) = OverlapBinCurve::merge(&set).map_err(CliError::stage("overlap curves"))? {
            curve_rows.extend(c.rows());
        }
    }

    layout::write_report(&args.out, CASES_STEM, &cases, ctx.format)?;
    layout::write_report(
        &args.out,
        SUMMARY_STEM,
        std::slice::from_ref(&summary),
        ctx.format,
    )?;
    layout::write_report(&args.out, CURVES_STEM, &curve_rows, ctx.format)?;
    Ok(render_rows(&[summary], ctx.format))
}

/// Per-case report inside an eval output directory.
pub fn cases_report_in(dir: &Path) -> CliResult<PathBuf> {
    let found: Vec<PathBuf> = ["tsv", "jsonl"]
        .iter()
        .map(|ext| dir.join(format!("{CASES_STEM}.{ext}")))
        .filter(|p| p.is_file())
        .collect();
    match found.len() {
        1 => Ok(found.into_iter().next().expect("one entry")),
        0 => Err(CliError::Missing(dir.join(format!("{CASES_STEM}.tsv")))),
        _ => Err(CliError::Usage(format!(
            "{}: both table and json-lines case reports present",
            dir.display()
        ))),
    }
}
