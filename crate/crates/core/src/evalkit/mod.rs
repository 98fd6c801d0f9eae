//! Segmentation metrics, size-binned overlap analysis, cohort summaries and
//! paired signed-rank tests.

mod cohort;
mod metrics;
mod overlap;
mod wilcoxon;

pub use cohort::{cohort_report, pair_by_case, parse_case_metrics, CaseMetrics, CohortSummary};
pub use metrics::{assd, assd_with, dice, evaluate_case, Assd};
pub use overlap::{overlap_curves, CurveRow, OverlapBin, OverlapBinCurve, OverlapDirection};
pub use wilcoxon::{
    exact_cutoff, wilcoxon_matrix, wilcoxon_signed_rank, WilcoxonMatrix, WilcoxonMethod,
    WilcoxonResult,
};
