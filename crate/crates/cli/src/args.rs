use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lymphkit_core::report::ReportFormat;
use lymphkit_core::volgrid::{IntensityWindow, VolumeFormat};
use lymphkit_core::{Connectivity, PipelineConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "lymphkit",
    version,
    about = "Weak-label lymph node segmentation toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration (TOML, or JSON when the name ends in .json).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for per-case parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Encoding of report files and stdout tables.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,

    /// Encoding of written volumes.
    #[arg(long, global = true, value_enum, default_value_t = VolumeFormatArg::NiiGz)]
    pub volume_format: VolumeFormatArg,

    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

/// Flags that replace single fields of the loaded configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigOverrides {
    /// Target voxel spacing z,y,x in mm.
    #[arg(long, global = true, value_delimiter = ',', value_name = "Z,Y,X")]
    pub target_spacing: Option<Vec<f64>>,

    /// HU clipping window lo,hi.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        value_name = "LO,HI",
        allow_hyphen_values = true
    )]
    pub window: Option<Vec<f64>>,

    /// Background hull width in voxels for instance coating.
    #[arg(long, global = true, value_name = "VOXELS")]
    pub coating_margin: Option<usize>,

    /// Voxel connectivity: 6, 18 or 26.
    #[arg(long, global = true)]
    pub connectivity: Option<Connectivity>,

    /// Minimum short axis kept by postprocessing, mm.
    #[arg(long, global = true, value_name = "MM")]
    pub filter_threshold: Option<f64>,

    /// Short-axis bin width for histograms and overlap curves, mm.
    #[arg(long, global = true, value_name = "MM")]
    pub bin_width: Option<f64>,

    /// Short axis at or above which a node counts as enlarged, mm.
    #[arg(long, global = true, value_name = "MM")]
    pub enlargement_threshold: Option<f64>,

    /// Margin added around the lung bounding box when cropping, mm.
    #[arg(long, global = true, value_name = "MM")]
    pub roi_margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    JsonLines,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::JsonLines => ReportFormat::JsonLines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VolumeFormatArg {
    #[value(name = "nii.gz")]
    NiiGz,
    Nii,
    Raw,
}

impl From<VolumeFormatArg> for VolumeFormat {
    fn from(f: VolumeFormatArg) -> Self {
        match f {
            VolumeFormatArg::NiiGz => VolumeFormat::NiftiGz,
            VolumeFormatArg::Nii => VolumeFormat::Nifti,
            VolumeFormatArg::Raw => VolumeFormat::Raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Unknown voxels become background.
    Noisy,
    /// Unknown voxels are excluded from the loss.
    Mask,
    /// Annotated instances get a background hull.
    Coat,
    /// Anatomy voxels become background.
    Pseudo,
}

impl StrategyArg {
    pub fn name(self) -> &'static str {
        match self {
            StrategyArg::Noisy => "noisy",
            StrategyArg::Mask => "mask",
            StrategyArg::Coat => "coat",
            StrategyArg::Pseudo => "pseudo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelSource {
    Gt,
    Weak,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic phantom cases.
    Phantom(PhantomArgs),
    /// Resample, crop and standardise cases into their derived/ directory.
    Preprocess(CasesArgs),
    /// Build training target and loss mask from preprocessed weak labels.
    Strategy(StrategyArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Paired Wilcoxon tests between per-case reports.
    Compare(CompareArgs),
    /// Node counts and short-axis histogram of a dataset.
    Stats(StatsArgs),
    /// Per-component measurement catalog of a label volume.
    Measure(MeasureArgs),
    /// Drop components whose short axis is below the filter threshold.
    Postprocess(PostprocessArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Output directory: the case itself with --spec, else the dataset root.
    #[arg(long)]
    pub out: PathBuf,
    /// Explicit phantom description (TOML or JSON).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["cohort", "nodes", "dims", "spacing"])]
    pub spec: Option<PathBuf>,
    /// Number of random cases.
    #[arg(long, default_value_t = 1)]
    pub cohort: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Nodes per random case.
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 96, 96], value_name = "Z,Y,X")]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0f64, 0.8, 0.8], value_name = "Z,Y,X")]
    pub spacing: Vec<f64>,
    /// Also write simulated model predictions under OUT/predictions/.
    #[arg(long)]
    pub predictions: bool,
}

#[derive(Debug, Args)]
pub struct CasesArgs {
    /// Case directories, or dataset directories holding cases.
    #[arg(required = true)]
    pub cases: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    #[command(flatten)]
    pub cases: CasesArgs,
    /// Strategy, or a comma-separated sequence applied in order.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub strategy: Vec<StrategyArg>,
    /// Output subdirectory of derived/ (default: the strategy names joined by '+').
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predicted label volumes named after their case.
    #[arg(long)]
    pub pred: PathBuf,
    /// Dataset of cases with labels-gt/, or a directory of label volumes.
    #[arg(long)]
    pub gt: PathBuf,
    /// Report directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Model name used in the summary (default: name of the prediction dir).
    #[arg(long)]
    pub model: Option<String>,
    /// Apply the short-axis filter to predictions first.
    #[arg(long)]
    pub postprocess: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Per-case reports or eval directories, optionally as NAME=PATH.
    #[arg(num_args = 2.., required = true)]
    pub reports: Vec<String>,
    /// Also write the results into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = LabelSource::Gt)]
    pub labels: LabelSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub volume: PathBuf,
    /// Only measure voxels carrying this label (default: any nonzero).
    #[arg(long)]
    pub label: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PostprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
}

impl GlobalArgs {
    /// Loads `--config` (or defaults), applies flag overrides and validates.
    pub fn pipeline_config(&self) -> CliResult<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => load_config(path)?,
            None => PipelineConfig::default(),
        };
        let o = &self.overrides;
        if let Some(s) = &o.target_spacing {
            c.target_spacing = triple("--target-spacing", s)?;
        }
        if let Some(w) = &o.window {
            let [lo, hi] = <[f64; 2]>::try_from(w.as_slice())
                .map_err(|_| CliError::Usage("--window takes LO,HI".into()))?;
            c.window = IntensityWindow::new(lo, hi).map_err(CliError::input("--window"))?;
        }
        if let Some(v) = o.coating_margin {
            c.coating_margin_voxels = v;
        }
        if let Some(v) = o.connectivity {
            c.connectivity = v;
        }
        if let Some(v) = o.filter_threshold {
            c.filter_threshold_mm = v;
        }
        if let Some(v) = o.bin_width {
            c.bin_width_mm = v;
        }
        if let Some(v) = o.enlargement_threshold {
            c.enlargement_threshold_mm = v;
        }
        if let Some(v) = o.roi_margin {
            c.roi_margin_mm = v;
        }
        c.validate().map_err(CliError::input("configuration"))?;
        Ok(c)
    }
}

/// Checks that a comma-separated flag carried exactly three values.
pub fn triple<T: Copy>(flag: &str, values: &[T]) -> CliResult<[T; 3]> {
    <[T; 3]>::try_from(values).map_err(|_| CliError::Usage(format!("{flag} takes Z,Y,X")))
}

/// Parses a TOML or JSON document according to the file extension.
pub fn load_structured<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|_| CliError::Missing(path.into()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> CliResult<PipelineConfig> {
    load_structured(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Cli {
        Cli::try_parse_from(argv).unwrap()
    }

    #[test]
    fn defaults_without_flags() {
        let cli = parse(&["lymphkit", "stats", "ds"]);
        assert_eq!(
            cli.global.pipeline_config().unwrap(),
            PipelineConfig::default()
        );
        assert_eq!(cli.global.format, FormatArg::Table);
        assert_eq!(cli.global.volume_format, VolumeFormatArg::NiiGz);
    }

    #[test]
    fn overrides_apply_after_subcommand_too() {
        let cli = parse(&[
            "lymphkit",
            "stats",
            "ds",
            "--target-spacing",
            "2,1,1",
            "--window=-100,200",
            "--connectivity",
            "6",
            "--coating-margin",
            "2",
            "--roi-margin",
            "5",
        ]);
        let c = cli.global.pipeline_config().unwrap();
        assert_eq!(c.target_spacing, [2.0, 1.0, 1.0]);
        assert_eq!((c.window.lo(), c.window.hi()), (-100.0, 200.0));
        assert_eq!(c.connectivity, Connectivity::Six);
        assert_eq!(c.coating_margin_voxels, 2);
        assert_eq!(c.roi_margin_mm, 5.0);
    }

    #[test]
    fn bad_values_are_input_errors() {
        for argv in [
            &["lymphkit", "--target-spacing", "2,1", "stats", "ds"][..],
            &["lymphkit", "--coating-margin", "0", "stats", "ds"],
            &["lymphkit", "--filter-threshold=-1", "stats", "ds"],
        ] {
            let err = parse(argv).global.pipeline_config().unwrap_err();
            assert_eq!(err.exit_code(), crate::error::EXIT_INPUT, "{argv:?}");
        }
    }

    #[test]
    fn strategy_sequences() {
        let cli = parse(&["lymphkit", "strategy", "c", "--strategy", "coat,pseudo"]);
        let Command::Strategy(a) = cli.command else {
            panic!("not a strategy command")
        };
        assert_eq!(a.strategy, [StrategyArg::Coat, StrategyArg::Pseudo]);
    }
}
