use lymphkit_core::measure::measurement_catalog;
use lymphkit_core::report::render_rows;
use lymphkit_core::Mask;

use super::Context;
use crate::args::MeasureArgs;
use crate::error::{CliError, CliResult};
use crate::layout;

pub fn run(ctx: &Context, args: &MeasureArgs) -> CliResult<String> {
    let cfg = &ctx.config;
    let rule = cfg
        .enlargement_rule()
        .map_err(CliError::input("configuration"))?;
    let grid = layout::read(&args.volume)?;
    let mask = match args.label {
        Some(l) => Mask::new(
            *grid.geometry(),
            grid.data().iter().map(|&v| v == l as f32).collect(),
        )
        .map_err(CliError::input("label selection"))?,
        None => Mask::foreground_of(&grid),
    };
    let rows = measurement_catalog(&mask, rule, cfg.connectivity);
    let text = render_rows(&rows, ctx.format);
    if let Some(out) = &args.out {
        layout::write_text(out, &text)?;
    }
    Ok(text)
}
