use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::prover::{SuccessCriterion, TraceStatus};
use crate::Triple;

use super::{EvalError, RunConfig};

pub const CSV_COLUMNS: [&str; 12] = [
    "bucket",
    "K",
    "N",
    "strategy",
    "variant",
    "noise_rate",
    "attempts",
    "reach_rate",
    "verified_rate",
    "mean_steps",
    "mean_ms_per_step",
    "injected_facts",
];

/// Outcome of one prompt of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptVerdict {
    pub reach: bool,
    pub verified: bool,
    pub steps: usize,
    pub status: TraceStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub bucket: String,
    pub index: usize,
    pub query: Triple,
    /// Prompts actually run, in ensemble order.
    pub prompts: Vec<PromptVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl QueryRecord {
    fn prefix(&self, k: usize) -> &[PromptVerdict] {
        &self.prompts[..k.min(self.prompts.len())]
    }

    pub fn reach_at(&self, k: usize) -> bool {
        self.prefix(k).iter().any(|p| p.reach)
    }

    pub fn verified_at(&self, k: usize) -> bool {
        self.prefix(k).iter().any(|p| p.verified)
    }

    pub fn success_at(&self, k: usize, criterion: SuccessCriterion) -> bool {
        match criterion {
            SuccessCriterion::Reach => self.reach_at(k),
            SuccessCriterion::Verified => self.verified_at(k),
        }
    }

    /// Steps of the first successful prompt within `k`, else of the last one run.
    pub fn steps_at(&self, k: usize, criterion: SuccessCriterion) -> Option<usize> {
        let prefix = self.prefix(k);
        let ok = |p: &&PromptVerdict| match criterion {
            SuccessCriterion::Reach => p.reach,
            SuccessCriterion::Verified => p.verified,
        };
        prefix.iter().find(ok).or(prefix.last()).map(|p| p.steps)
    }
}

/// One CSV row: a bucket at one ensemble size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub bucket: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub strategy: String,
    pub variant: String,
    pub noise_rate: f64,
    pub attempts: usize,
    pub reach_successes: usize,
    pub verified_successes: usize,
    /// `None` when there were no attempts.
    pub reach_rate: Option<f64>,
    pub verified_rate: Option<f64>,
    pub mean_steps: Option<f64>,
    pub mean_ms_per_step: Option<f64>,
    pub injected_facts: usize,
}

impl MetricsRow {
    pub fn rate(&self, criterion: SuccessCriterion) -> Option<f64> {
        match criterion {
            SuccessCriterion::Reach => self.reach_rate,
            SuccessCriterion::Verified => self.verified_rate,
        }
    }

    pub(crate) fn csv_fields(&self) -> Vec<String> {
        vec![
            self.bucket.clone(),
            self.k.to_string(),
            self.n.to_string(),
            self.strategy.clone(),
            self.variant.clone(),
            fmt4(Some(self.noise_rate)),
            self.attempts.to_string(),
            fmt4(self.reach_rate),
            fmt4(self.verified_rate),
            fmt4(self.mean_steps),
            fmt4(self.mean_ms_per_step),
            self.injected_facts.to_string(),
        ]
    }
}

pub(crate) fn fmt4(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "NA".to_string(),
    }
}

/// Per-bucket facts about the KB a run used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub name: String,
    pub queries: usize,
    pub kb_facts: usize,
    pub injected_facts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: RunConfig,
    pub rows: Vec<MetricsRow>,
    pub buckets: Vec<BucketSummary>,
    pub queries: Vec<QueryRecord>,
    /// Wall-clock total in milliseconds; only recorded with timing on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_ms: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Aggregates query records into rows, one per bucket and K.
pub(crate) fn build_rows(
    cfg: &RunConfig,
    buckets: &[BucketSummary],
    queries: &[QueryRecord],
) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for bucket in buckets {
        let records: Vec<&QueryRecord> = queries.iter().filter(|q| q.bucket == bucket.name).collect();
        let timed: Vec<&&QueryRecord> = records.iter().filter(|q| q.elapsed_ms.is_some()).collect();
        let total_ms: f64 = timed.iter().filter_map(|q| q.elapsed_ms).sum();
        let total_steps: usize = timed
            .iter()
            .flat_map(|q| q.prompts.iter().map(|p| p.steps))
            .sum();
        let ms_per_step = (cfg.timing && total_steps > 0).then(|| total_ms / total_steps as f64);
        for &k in &cfg.k_values {
            let attempts = records.len();
            let reach = records.iter().filter(|q| q.reach_at(k)).count();
            let verified = records.iter().filter(|q| q.verified_at(k)).count();
            let steps: Vec<usize> = records.iter().filter_map(|q| q.steps_at(k, cfg.success)).collect();
            rows.push(MetricsRow {
                bucket: bucket.name.clone(),
                k,
                n: cfg.prompt.n,
                strategy: cfg.prompt.strategy.to_string(),
                variant: cfg.prompt.variant.to_string(),
                noise_rate: cfg.noise.rate,
                attempts,
                reach_successes: reach,
                verified_successes: verified,
                reach_rate: ratio(reach, attempts),
                verified_rate: ratio(verified, attempts),
                mean_steps: (!steps.is_empty())
                    .then(|| steps.iter().sum::<usize>() as f64 / steps.len() as f64),
                mean_ms_per_step: ms_per_step,
                injected_facts: bucket.injected_facts,
            });
        }
    }
    rows
}

impl MetricsReport {
    pub fn row(&self, bucket: &str, k: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.bucket == bucket && r.k == k)
    }

    pub fn to_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.csv_fields())?;
        }
        finish(w)
    }

    pub fn to_json(&self) -> Result<String, EvalError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), EvalError> {
        write_file(path, &self.to_csv()?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        write_file(path, &self.to_json()?)
    }

    /// Buckets by K table of the configured success rate with a row average.
    pub fn pivot(&self) -> String {
        pivot_table(&self.rows, &self.config.k_values, self.config.success)
    }
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, EvalError> {
    let bytes = w
        .into_inner()
        .map_err(|e| EvalError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), EvalError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| EvalError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))
}

/// Renders `Test Reasoning Length | K=1 | ... | Avg` with one line per bucket.
/// Numeric bucket names are shown as `<n> Hops`.
pub fn pivot_table(rows: &[MetricsRow], k_values: &[usize], criterion: SuccessCriterion) -> String {
    let mut header = vec!["Test Reasoning Length".to_string()];
    header.extend(k_values.iter().map(|k| format!("K={k}")));
    header.push("Avg".into());
    let mut lines = vec![header];
    let mut seen: Vec<&str> = Vec::new();
    for row in rows {
        if seen.contains(&row.bucket.as_str()) {
            continue;
        }
        seen.push(&row.bucket);
        let label = match row.bucket.parse::<usize>() {
            Ok(n) => format!("{n} Hops"),
            Err(_) => row.bucket.clone(),
        };
        let values: Vec<Option<f64>> = k_values
            .iter()
            .map(|&k| {
                rows.iter()
                    .find(|r| r.bucket == row.bucket && r.k == k)
                    .and_then(|r| r.rate(criterion))
            })
            .collect();
        let avg = values
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64);
        let mut line = vec![label];
        line.extend(values.into_iter().map(fmt4));
        line.push(fmt4(avg));
        lines.push(line);
    }
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
    }
    out
}
