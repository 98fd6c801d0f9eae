use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{mean_pm_std, parse_tsv, TableRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub case_id: String,
    pub dice: f64,
    pub assd_mm: f64,
    pub assd_fallback_used: bool,
}

impl TableRow for CaseMetrics {
    fn header() -> Vec<&'static str> {
        vec!["case_id", "dice", "assd_mm", "assd_fallback_used"]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.case_id.clone(),
            self.dice.to_string(),
            self.assd_mm.to_string(),
            self.assd_fallback_used.to_string(),
        ]
    }
}

/// Mean and population standard deviation of both metrics over a cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub model: String,
    pub n_cases: usize,
    pub dice_mean: f64,
    pub dice_std: f64,
    pub assd_mean: f64,
    pub assd_std: f64,
    pub fallback_count: usize,
}

impl CohortSummary {
    /// `dice` and `assd` as `mean ± std` strings.
    pub fn display_columns(&self, digits: usize) -> (String, String) {
        (
            mean_pm_std(self.dice_mean, self.dice_std, digits),
            mean_pm_std(self.assd_mean, self.assd_std, digits),
        )
    }
}

impl TableRow for CohortSummary {
    fn header() -> Vec<&'static str> {
        vec![
            "model",
            "n_cases",
            "dice_mean",
            "dice_std",
            "assd_mean",
            "assd_std",
            "fallback_count",
        ]
    }
    fn cells(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.n_cases.to_string(),
            self.dice_mean.to_string(),
            self.dice_std.to_string(),
            self.assd_mean.to_string(),
            self.assd_std.to_string(),
            self.fallback_count.to_string(),
        ]
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates per-case metrics. Cases are folded in case-id order so the
/// result does not depend on the order in which they were computed.
pub fn cohort_report(model: &str, cases: &[CaseMetrics]) -> Result<CohortSummary> {
    if cases.is_empty() {
        return Err(Error::EmptyInput("cohort"));
    }
    let mut sorted: Vec<&CaseMetrics> = cases.iter().collect();
    sorted.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    let (dice_mean, dice_std) = mean_std(sorted.iter().map(|c| c.dice));
    let (assd_mean, assd_std) = mean_std(sorted.iter().map(|c| c.assd_mm));
    Ok(CohortSummary {
        model: model.to_string(),
        n_cases: cases.len(),
        dice_mean,
        dice_std,
        assd_mean,
        assd_std,
        fallback_count: cases.iter().filter(|c| c.assd_fallback_used).count(),
    })
}

/// Reads a per-case report in either the table or the JSON-lines encoding.
pub fn parse_case_metrics(text: &str) -> Result<Vec<CaseMetrics>> {
    let bad = |reason: String| Error::InvalidArgument(format!("case report: {reason}"));
    if text.trim_start().starts_with('{') {
        return text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| bad(e.to_string())))
            .collect();
    }
    let (header, rows) = parse_tsv(text).ok_or_else(|| bad("empty".into()))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    };
    let (ci, di, ai, fi) = (
        col("case_id")?,
        col("dice")?,
        col("assd_mm")?,
        col("assd_fallback_used")?,
    );
    rows.iter()
        .map(|r| {
            let cell = |i: usize| r.get(i).copied().ok_or_else(|| bad("short row".into()));
            Ok(CaseMetrics {
                case_id: cell(ci)?.to_string(),
                dice: cell(di)?.parse().map_err(|_| bad("dice".into()))?,
                assd_mm: cell(ai)?.parse().map_err(|_| bad("assd_mm".into()))?,
                assd_fallback_used: cell(fi)?
                    .parse()
                    .map_err(|_| bad("assd_fallback_used".into()))?,
            })
        })
        .collect()
}

/// Matches two reports on case id. Both must cover the same cases; pairs
/// come back sorted by case id.
pub fn pair_by_case<'a>(
    a: &'a [CaseMetrics],
    b: &'a [CaseMetrics],
) -> Result<Vec<(&'a CaseMetrics, &'a CaseMetrics)>> {
    let mut sa: Vec<&CaseMetrics> = a.iter().collect();
    let mut sb: Vec<&CaseMetrics> = b.iter().collect();
    sa.sort_by(|x, y| x.case_id.cmp(&y.case_id));
    sb.sort_by(|x, y| x.case_id.cmp(&y.case_id));
    if sa.len() != sb.len() || sa.iter().zip(&sb).any(|(x, y)| x.case_id != y.case_id) {
        return Err(Error::InvalidArgument(
            "reports do not cover the same case ids".into(),
        ));
    }
    if sa.windows(2).any(|w| w[0].case_id == w[1].case_id) {
        return Err(Error::InvalidArgument("duplicate case id in report".into()));
    }
    Ok(sa.into_iter().zip(sb).collect())
}
