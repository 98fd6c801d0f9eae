use lymphkit_core::measure::{histogram, DatasetLnStats};
use lymphkit_core::report::render_rows;
use lymphkit_core::Mask;
use serde::Serialize;

use super::{par_map, table_row, Context};
use crate::args::{LabelSource, StatsArgs};
use crate::error::{CliError, CliResult};
use crate::layout::{self, discover_cases, LABELS_GT, LABELS_WEAK};

/// Node counts of one labelled dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetRow {
    pub dataset: String,
    pub volumes: usize,
    pub components: usize,
    pub enlarged: usize,
    pub enlarged_percent: f64,
}
table_row!(DatasetRow {
    dataset,
    volumes,
    components,
    enlarged,
    enlarged_percent
});

pub fn run(ctx: &Context, args: &StatsArgs) -> CliResult<String> {
    let cfg = &ctx.config;
    let rule = cfg
        .enlargement_rule()
        .map_err(CliError::input("configuration"))?;
    let sub = match args.labels {
        LabelSource::Gt => LABELS_GT,
        LabelSource::Weak => LABELS_WEAK,
    };
    let cases = discover_cases(std::slice::from_ref(&args.dataset))?;
    let per_case = par_map(&cases, |c| {
        let labels = Mask::foreground_of(&layout::read(&c.require(sub)?)?);
        let mut s = DatasetLnStats::default();
        let diameters = s.add_case(&labels, rule, cfg.connectivity);
        Ok((s, diameters))
    })?;

    let mut total = DatasetLnStats::default();
    let mut diameters = Vec::new();
    for (s, d) in per_case {
        total.volumes += s.volumes;
        total.components += s.components;
        total.enlarged += s.enlarged;
        diameters.extend(d);
    }
    let row = DatasetRow {
        dataset: args
            .dataset
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| args.dataset.display().to_string()),
        volumes: total.volumes,
        components: total.components,
        enlarged: total.enlarged,
        enlarged_percent: if total.components == 0 {
            0.0
        } else {
            total.enlarged as f64 / total.components as f64 * 100.0
        },
    };
    let hist = histogram(&diameters, cfg.bin_width_mm).map_err(CliError::input("histogram"))?;

    if let Some(out) = &args.out {
        layout::write_report(out, "stats", std::slice::from_ref(&row), ctx.format)?;
        layout::write_report(out, "histogram", &hist, ctx.format)?;
    }
    let mut text = render_rows(&[row], ctx.format);
    text.push('\n');
    text.push_str(&render_rows(&hist, ctx.format));
    Ok(text)
}
