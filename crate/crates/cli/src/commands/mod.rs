mod compare;
mod eval;
mod measure;
mod phantom;
mod postprocess;
mod preprocess;
mod stats;
mod strategy;

use lymphkit_core::report::ReportFormat;
use lymphkit_core::volgrid::VolumeFormat;
use lymphkit_core::PipelineConfig;
use rayon::prelude::*;

use crate::args::{Command, GlobalArgs};
use crate::error::CliResult;

pub use compare::CompareRow;
pub use phantom::PhantomRow;
pub use postprocess::PostprocessRow;
pub use stats::DatasetRow;

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: PipelineConfig,
    pub format: ReportFormat,
    pub volume_format: VolumeFormat,
}

impl Context {
    pub fn new(global: &GlobalArgs) -> CliResult<Self> {
        Ok(Context {
            config: global.pipeline_config()?,
            format: global.format.into(),
            volume_format: global.volume_format.into(),
        })
    }
}

/// Runs one command and returns the text destined for stdout.
pub fn dispatch(ctx: &Context, command: &Command) -> CliResult<String> {
    match command {
        Command::Phantom(a) => phantom::run(ctx, a),
        Command::Preprocess(a) => preprocess::run(ctx, a),
        Command::Strategy(a) => strategy::run(ctx, a),
        Command::Eval(a) => eval::run(ctx, a),
        Command::Compare(a) => compare::run(ctx, a),
        Command::Stats(a) => stats::run(ctx, a),
        Command::Measure(a) => measure::run(ctx, a),
        Command::Postprocess(a) => postprocess::run(ctx, a),
    }
}

/// Maps `f` over `items` in parallel; results keep the input order and the
/// first failure in that order wins.
fn par_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> CliResult<R> + Sync + Send,
) -> CliResult<Vec<R>> {
    let results: Vec<CliResult<R>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}

/// `TableRow` for plain structs whose fields all implement `Display`.
macro_rules! table_row {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl lymphkit_core::report::TableRow for $ty {
            fn header() -> Vec<&'static str> {
                vec![$(stringify!($field)),*]
            }
            fn cells(&self) -> Vec<String> {
                vec![$(self.$field.to_string()),*]
            }
        }
    };
}
use table_row;
