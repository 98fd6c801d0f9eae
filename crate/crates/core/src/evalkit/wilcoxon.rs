use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::report::ReportFormat;

/// Largest effective sample size handled by the exact null distribution.
pub const fn exact_cutoff() -> usize {
    25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// `min(W+, W-)`; half-integral when ranks are tied.
    pub w: f64,
    pub p_two_sided: f64,
    pub method: WilcoxonMethod,
}

/// Paired two-sided Wilcoxon signed-rank test on `a - b`.
///
/// Zero differences are dropped and tied magnitudes share their average
/// rank. Up to [`exact_cutoff`] pairs the p-value comes from the exact
/// permutation distribution of `W+` under random signs; beyond that a
/// tie-corrected normal approximation with continuity correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("paired samples"));
    }
    let mut d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|&v| v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n_effective: 0,
            w: 0.0,
            p_two_sided: 1.0,
            method: WilcoxonMethod::Exact,
        });
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite paired difference".into(),
        ));
    }
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));

    // Ranks are doubled so that average ranks of ties stay integral.
    let mut rank2 = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[j + 1].abs() == d[i].abs() {
            j += 1;
        }
        for r in &mut rank2[i..=j] {
            *r = (i + j + 2) as u64;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    let total2: u64 = rank2.iter().sum();
    let plus2: u64 = d
        .iter()
        .zip(&rank2)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w2 = plus2.min(total2 - plus2);
    let w = w2 as f64 / 2.0;

    if n <= exact_cutoff() {
        // counts[s]: number of sign patterns whose doubled W+ equals s.
        let mut counts = vec![0u64; total2 as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &rank2 {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] != 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let tail: u64 = counts[..=w2 as usize].iter().sum();
        let p = 2.0 * tail as f64 / (1u64 << n) as f64;
        return Ok(WilcoxonResult {
            n_effective: n,
            w,
            p_two_sided: p.min(1.0),
            method: WilcoxonMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let z = ((mean - w).abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(WilcoxonResult {
        n_effective: n,
        w,
        p_two_sided: (2.0 * std_normal.cdf(-z)).min(1.0),
        method: WilcoxonMethod::NormalApprox,
    })
}

/// Square table of pairwise two-sided p-values between models for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonMatrix {
    pub metric: String,
    pub models: Vec<String>,
    /// `p[i][j]` compares model `i` with model `j`; the diagonal is 1.
    pub p: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct MatrixCell<'a> {
    metric: &'a str,
    row: &'a str,
    col: &'a str,
    p_two_sided: f64,
}

impl WilcoxonMatrix {
    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Table => {
                out.push_str(&self.metric);
                for m in &self.models {
                    out.push('\t');
                    out.push_str(m);
                }
                out.push('\n');
                for (m, row) in self.models.iter().zip(&self.p) {
                    out.push_str(m);
                    for v in row {
                        out.push('\t');
                        out.push_str(&v.to_string());
                    }
                    out.push('\n');
                }
            }
            ReportFormat::JsonLines => {
                for (i, row) in self.p.iter().enumerate() {
                    for (j, &p) in row.iter().enumerate() {
                        let cell = MatrixCell {
                            metric: &self.metric,
                            row: &self.models[i],
                            col: &self.models[j],
                            p_two_sided: p,
                        };
                        out.push_str(&serde_json::to_string(&cell).expect("cells serialize"));
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}

/// All pairwise tests between equally long, identically ordered samples.
pub fn wilcoxon_matrix(metric: &str, samples: &[(String, Vec<f64>)]) -> Result<WilcoxonMatrix> {
    let k = samples.len();
    let mut p = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = wilcoxon_signed_rank(&samples[i].1, &samples[j].1)?;
            p[i][j] = r.p_two_sided;
            p[j][i] = r.p_two_sided;
        }
    }
    Ok(WilcoxonMatrix {
        metric: metric.to_string(),
        models: samples.iter().map(|(m, _)| m.clone()).collect(),
        p,
    })
}
