use lymphkit_core::report::render_rows;
use lymphkit_core::weaklab::{
    export_training_pair, from_weak_labels, strategy_instance_coating, strategy_loss_masking,
    strategy_noisy_label, strategy_pseudo_labeling, voxel_stats, AnnotationState, StageStats,
};
use lymphkit_core::{Mask, PipelineConfig, VolumeGrid};
use serde::Serialize;

use super::{par_map, Context};
use crate::args::{StrategyArg, StrategyArgs};
use crate::error::{CliError, CliResult};
use crate::layout::{self, discover_cases, CaseDir, ANATOMY, LABELS_WEAK};

pub const TARGET: &str = "target";
pub const LOSS_MASK: &str = "loss-mask";

#[derive(Serialize)]
struct Provenance<'a> {
    case_id: &'a str,
    strategies: Vec<&'static str>,
    weak_labels: String,
    anatomy: Option<String>,
    config: &'a PipelineConfig,
}

pub fn run(ctx: &Context, args: &StrategyArgs) -> CliResult<String> {
    let name = match &args.name {
        Some(n) => n.clone(),
        None => args
            .strategy
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join("+"),
    };
    if name.is_empty() || name.starts_with('.') || name.contains(['/', '\\']) {
        return Err(CliError::Usage(format!("invalid output name {name:?}")));
    }
    let cases = discover_cases(&args.cases.cases)?;
    let rows: Vec<StageStats> = par_map(&cases, |c| apply_case(ctx, c, &args.strategy, &name))?
        .into_iter()
        .flatten()
        .collect();
    Ok(render_rows(&rows, ctx.format))
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned()
}

fn apply(
    ctx: &Context,
    state: &AnnotationState,
    s: StrategyArg,
    anatomy: Option<&VolumeGrid>,
) -> lymphkit_core::Result<AnnotationState> {
    let cfg = &ctx.config;
    match s {
        StrategyArg::Noisy => Ok(strategy_noisy_label(state)),
        StrategyArg::Mask => Ok(strategy_loss_masking(state)),
        StrategyArg::Coat => {
            strategy_instance_coating(state, cfg.coating_margin_voxels, cfg.connectivity)
        }
        StrategyArg::Pseudo => strategy_pseudo_labeling(
            state,
            anatomy.expect("checked before applying"),
            &cfg.pseudo_labels,
        ),
    }
}

fn apply_case(
    ctx: &Context,
    case: &CaseDir,
    strategies: &[StrategyArg],
    name: &str,
) -> CliResult<Vec<StageStats>> {
    let id = case.id.as_str();
    let weak_path = case.derived_volume(LABELS_WEAK)?.ok_or_else(|| {
        CliError::Usage(format!(
            "{id}: no preprocessed weak labels; run preprocess first"
        ))
    })?;
    let anatomy_path = case.derived_volume(ANATOMY)?;
    if strategies.contains(&StrategyArg::Pseudo) && anatomy_path.is_none() {
        return Err(CliError::Usage(format!(
            "{id}: pseudo labeling needs a preprocessed anatomy volume"
        )));
    }
    let weak = layout::read(&weak_path)?;
    let anatomy = anatomy_path.as_deref().map(layout::read).transpose()?;

    let mut state = from_weak_labels(&Mask::foreground_of(&weak));
    let mut rows = vec![StageStats::new(id, "input", "weak", voxel_stats(&state))];
    let mut chain: Vec<&'static str> = Vec::new();
    for &s in strategies {
        state = apply(ctx, &state, s, anatomy.as_ref())
            .map_err(CliError::stage(format!("{id}: strategy {}", s.name())))?;
        chain.push(s.name());
        rows.push(StageStats::new(
            id,
            &chain.join("+"),
            s.name(),
            voxel_stats(&state),
        ));
    }

    let out = case.derived().join(name);
    layout::clear_dir(&out)?;
    let (target, loss_mask) = export_training_pair(&state);
    let fmt = ctx.volume_format;
    layout::write(&target, &layout::volume_path(&out, TARGET, fmt))?;
    layout::write(&loss_mask, &layout::volume_path(&out, LOSS_MASK, fmt))?;
    layout::write_report(&out, "stats", &rows, ctx.format)?;
    layout::write_json(
        &out.join("provenance.json"),
        &Provenance {
            case_id: id,
            strategies: chain,
            weak_labels: file_name(&weak_path),
            anatomy: anatomy_path.as_deref().map(file_name),
            config: &ctx.config,
        },
    )?;
    Ok(rows)
}
