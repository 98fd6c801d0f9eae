use std::path::{Path, PathBuf};

use lymphkit_core::evalkit::{
    pair_by_case, parse_case_metrics, wilcoxon_matrix, wilcoxon_signed_rank, CaseMetrics,
    WilcoxonMethod,
};
use lymphkit_core::report::render_rows;
use serde::Serialize;

use super::eval::cases_report_in;
use super::{table_row, Context};
use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::layout;

/// One paired test between two models on one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub metric: &'static str,
    pub model_a: String,
    pub model_b: String,
    pub n_cases: usize,
    pub n_effective: usize,
    pub w: f64,
    pub p_two_sided: f64,
    pub method: &'static str,
}
table_row!(CompareRow {
    metric,
    model_a,
    model_b,
    n_cases,
    n_effective,
    w,
    p_two_sided,
    method
});

type Metric = (&'static str, fn(&CaseMetrics) -> f64);

const METRICS: [Metric; 2] = [("dice", |m| m.dice), ("assd_mm", |m| m.assd_mm)];

fn method_name(m: WilcoxonMethod) -> &'static str {
    match m {
        WilcoxonMethod::Exact => "exact",
        WilcoxonMethod::NormalApprox => "normal_approx",
    }
}

fn dir_name(p: &Path) -> String {
    p.canonicalize()
        .ok()
        .and_then(|c| c.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| p.display().to_string())
}

/// `NAME=PATH` or `PATH`; a bare path is named after its eval directory.
fn resolve(arg: &str) -> CliResult<(String, PathBuf)> {
    let (name, path) = match arg.split_once('=') {
        Some((n, p)) if !n.is_empty() => (Some(n.to_string()), PathBuf::from(p)),
        _ => (None, PathBuf::from(arg)),
    };
    if path.is_dir() {
        let file = cases_report_in(&path)?;
        return Ok((name.unwrap_or_else(|| dir_name(&path)), file));
    }
    if !path.is_file() {
        return Err(CliError::Missing(path));
    }
    let name = name.unwrap_or_else(|| {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
        parent.map(dir_name).unwrap_or_else(|| arg.to_string())
    });
    Ok((name, path))
}

pub fn run(ctx: &Context, args: &CompareArgs) -> CliResult<String> {
    let mut reports: Vec<(String, Vec<CaseMetrics>)> = Vec::new();
    for arg in &args.reports {
        let (name, path) = resolve(arg)?;
        if reports.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Usage(format!("model name {name} given twice")));
        }
        let text = std::fs::read_to_string(&path).map_err(|_| CliError::Missing(path.clone()))?;
        let mut cases =
            parse_case_metrics(&text).map_err(CliError::input(path.display().to_string()))?;
        cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        reports.push((name, cases));
    }

    let mut rows = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let (na, a) = &reports[i];
            let (nb, b) = &reports[j];
            let pairs = pair_by_case(a, b).map_err(CliError::input(format!("{na} vs {nb}")))?;
            for (metric, get) in METRICS {
                let xa: Vec<f64> = pairs.iter().map(|(x, _)| get(x)).collect();
                let xb: Vec<f64> = pairs.iter().map(|(_, y)| get(y)).collect();
                let r = wilcoxon_signed_rank(&xa, &xb)
                    .map_err(CliError::input(format!("{na} vs {nb}: {metric}")))?;
                rows.push(CompareRow {
                    metric,
                    model_a: na.clone(),
                    model_b: nb.clone(),
                    n_cases: pairs.len(),
                    n_effective: r.n_effective,
                    w: r.w,
                    p_two_sided: r.p_two_sided,
                    method: method_name(r.method),
                });
            }
        }
    }
    // Rows are metric-major in the written report.
    rows.sort_by_key(|r| METRICS.iter().position(|(m, _)| *m == r.metric));

    if let Some(out) = &args.out {
        layout::write_report(out, "wilcoxon", &rows, ctx.format)?;
        for (metric, get) in METRICS {
            // Pairing already checked that all reports share one sorted id list.
            let samples: Vec<(String, Vec<f64>)> = reports
                .iter()
                .map(|(n, cs)| (n.clone(), cs.iter().map(get).collect()))
                .collect();
            let m = wilcoxon_matrix(metric, &samples).map_err(CliError::input(metric))?;
            let path = out.join(format!("matrix-{metric}.{}", ctx.format.extension()));
            layout::write_text(&path, &m.render(ctx.format))?;
        }
    }
    Ok(render_rows(&rows, ctx.format))
}
