//! Dataset preparation, memorization, batch prediction and scoring for
//! node classification and link prediction.

mod metrics;
mod report;
mod run;

use thiserror::Error;

use crate::graph::GraphError;
use crate::memory::MemoryError;
use crate::reasoner::ReasonerError;

pub use metrics::{compute_classification, compute_metrics, f1_score, from_counts, ClassTally, ClassificationMetrics, Metrics};
pub use report::{metrics_from_traces, read_traces, write_traces, ReportMetrics, RunReport, SplitSummary, Timing};
pub use run::{
    build_memory, evaluate, prepare_task, run_link_prediction, run_node_classification, task_encoder, EvalSettings,
    PreparedTask, RunOutput, TaskDefinition,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error("no predictions to score")]
    EmptyPredictions,
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
    #[error("no labelled nodes{}", .0.as_ref().map(|t| format!(" of type `{t}`")).unwrap_or_default())]
    NoLabelledNodes(Option<String>),
    #[error("no edges between `{src_type}` and `{dst_type}`")]
    NoPositiveEdges { src_type: String, dst_type: String },
    #[error("memory store is {store:?} but queries are {query:?}")]
    ProvenanceMismatch {
        store: crate::memory::Provenance,
        query: crate::memory::Provenance,
    },
    #[error("trace file line {line}: {message}")]
    TraceFormat { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
