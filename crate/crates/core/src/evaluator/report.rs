use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_classification, compute_metrics, ClassificationMetrics, Metrics};
use super::EvalError;
use crate::reasoner::{Answer, Method, ReasoningTrace, TaskKind, POSITIVE};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub positives: usize,
    pub negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub memorize_ms: Option<u64>,
    pub predict_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum ReportMetrics {
    LinkPrediction {
        overall: Metrics,
        /// Accuracy over positive test edges only.
        positive_accuracy: f64,
        negative_accuracy: f64,
    },
    NodeClassification(ClassificationMetrics),
}

/// Summary of one evaluation. Derived from the trace file, which stays
/// the source of truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub task: TaskKind,
    pub method: Method,
    pub config: serde_json::Value,
    pub split: SplitSummary,
    pub metrics: ReportMetrics,
    pub failed_samples: u64,
    pub flags: BTreeMap<String, u64>,
    pub trace_file: Option<String>,
    pub timing: Timing,
}

fn subset_accuracy(traces: &[&ReasoningTrace]) -> f64 {
    if traces.is_empty() {
        return 0.0;
    }
    traces.iter().filter(|t| t.is_correct()).count() as f64 / traces.len() as f64
}

/// Rescores traces from their parsed answers and truths.
pub fn metrics_from_traces(kind: TaskKind, traces: &[ReasoningTrace]) -> Result<ReportMetrics, EvalError> {
    match kind {
        TaskKind::LinkPrediction => {
            let preds: Vec<(Option<bool>, bool)> = traces
                .iter()
                .map(|t| {
                    let pred = match &t.parsed_answer {
                        Some(Answer::Link(b)) => Some(*b),
                        _ => None,
                    };
                    (pred, t.truth.as_deref() == Some(POSITIVE))
                })
                .collect();
            let (pos, neg): (Vec<&ReasoningTrace>, Vec<&ReasoningTrace>) =
                traces.iter().partition(|t| t.truth.as_deref() == Some(POSITIVE));
            Ok(ReportMetrics::LinkPrediction {
                overall: compute_metrics(&preds)?,
                positive_accuracy: subset_accuracy(&pos),
                negative_accuracy: subset_accuracy(&neg),
            })
        }
        TaskKind::NodeClassification => {
            let preds: Vec<(Option<String>, String)> = traces
                .iter()
                .map(|t| {
                    let pred = match &t.parsed_answer {
                        Some(Answer::Label(l)) => Some(l.clone()),
                        _ => None,
                    };
                    (pred, t.truth.clone().unwrap_or_default())
                })
                .collect();
            Ok(ReportMetrics::NodeClassification(compute_classification(&preds)?))
        }
    }
}

pub fn write_traces(path: &Path, traces: &[ReasoningTrace]) -> Result<(), EvalError> {
    let io = |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for t in traces {
        let line = serde_json::to_string(t).expect("traces serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_traces(path: &Path) -> Result<Vec<ReasoningTrace>, EvalError> {
    let io = |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::TraceFormat {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

impl RunReport {
    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let method = serde_json::to_value(self.method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let _ = writeln!(s, "method      {method}");
        let _ = writeln!(
            s,
            "split       train {} / validation {} / test {} (seed {})",
            self.split.train, self.split.validation, self.split.test, self.split.seed
        );
        match &self.metrics {
            ReportMetrics::LinkPrediction {
                overall,
                positive_accuracy,
                negative_accuracy,
            } => {
                let _ = writeln!(s, "{:<12}{:>10}", "metric", "value");
                for (name, v) in [
                    ("precision", overall.precision),
                    ("recall", overall.recall),
                    ("f1", overall.f1),
                    ("accuracy", overall.accuracy),
                    ("acc(pos)", *positive_accuracy),
                    ("acc(neg)", *negative_accuracy),
                ] {
                    let _ = writeln!(s, "{name:<12}{v:>10.4}");
                }
                let _ = writeln!(
                    s,
                    "counts      tp {} fp {} tn {} fn {} unparseable {}",
                    overall.tp, overall.fp, overall.tn, overall.fn_, overall.unparseable
                );
            }
            ReportMetrics::NodeClassification(m) => {
                let _ = writeln!(s, "accuracy    {:.4} ({}/{}, unparseable {})", m.accuracy, m.correct, m.total, m.unparseable);
                for (class, t) in &m.per_class {
                    let _ = writeln!(s, "  {class:<24}{:>8.4} ({}/{})", t.accuracy, t.correct, t.total);
                }
            }
        }
        if self.failed_samples > 0 {
            let _ = writeln!(s, "failed      {}", self.failed_samples);
        }
        for (flag, n) in &self.flags {
            let _ = writeln!(s, "flag        {flag}: {n}");
        }
        if let Some(m) = self.timing.memorize_ms {
            let _ = writeln!(s, "memorize    {m} ms");
        }
        let _ = writeln!(s, "predict     {} ms", self.timing.predict_ms);
        if let Some(p) = &self.trace_file {
            let _ = writeln!(s, "traces      {p}");
        }
        s
    }
}
