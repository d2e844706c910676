//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("{context}: non-finite value produced")]
    NonFinite { context: String },

    #[error("class-attribute matrix has negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("{kind} {index} is isolated (zero degree), normalization is undefined")]
    IsolatedNode { kind: NodeKind, index: usize },

    #[error("{param} = {value} outside valid range {expected}")]
    Domain {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("linear solve failed: {context}")]
    SolverFailure { context: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label set is empty")]
    EmptyLabelSet,

    #[error("metric undefined: class {class} has no samples in the evaluation set")]
    MetricUndefined { class: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: malformed header: {detail}")]
    MalformedHeader { path: PathBuf, detail: String },

    #[error("{path}: truncated payload: {detail}")]
    Truncated { path: PathBuf, detail: String },

    #[error("{path}: dimensions overflow: {rows} x {cols}")]
    DimOverflow {
        path: PathBuf,
        rows: u64,
        cols: u64,
    },

    #[error("missing dataset file: {0}")]
    MissingFile(PathBuf),

    #[error("label {label} at sample {index} out of range for {num_classes} classes")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        num_classes: usize,
    },

    #[error("class {class} appears in both the seen and the unseen split")]
    SplitOverlap { class: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which side of the bipartite graph a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Class,
    Attribute,
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeKind::Class => write!(f, "class"),
            NodeKind::Attribute => write!(f, "attribute"),
        }
    }
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
