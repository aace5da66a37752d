use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index out of range: {node} >= {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop rejected at node {0}")]
    SelfLoop(usize),
    #[error("feature matrix has {got} rows, graph has {want} nodes")]
    FeatureRows { got: usize, want: usize },

    #[error("dataset file missing: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("indicator out of range: node {node} points to graph {graph}")]
    IndicatorOutOfRange { node: usize, graph: usize },
    #[error("ragged attribute row at line {line}: {got} values, expected {want}")]
    RaggedAttributes {
        line: usize,
        got: usize,
        want: usize,
    },
    #[error("edge ({u}, {v}) spans two graphs")]
    EdgeSpansGraphs { u: usize, v: usize },
    #[error("parse error in {}: line {line}: {msg}", file.display())]
    TextParse {
        file: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("JSONL parse error at line {line}: {msg}")]
    Jsonl { line: usize, msg: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cycle breaking infeasible")]
    CycleBreakingInfeasible,
    #[error("no cyclic graphs in dataset")]
    NoCyclicGraphs,
    #[error("graph too small for random attachment")]
    GraphTooSmall,

    #[error("empty graph")]
    EmptyGraph,
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("graph {index}: {source}")]
    AtGraph {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("dataset too small for k-neighbor summary: {graphs} graphs, k = {k}")]
    TooFewForSummary { graphs: usize, k: usize },
    #[error(
        "degenerate summary: similar-size distance is zero but different-size distance is {0}"
    )]
    DegenerateSummary(f64),
    #[error("malformed distance matrix: {0}")]
    MalformedMatrix(String),

    #[error("class {0} cannot satisfy split")]
    ClassCannotSplit(usize),
    #[error("malformed split file: {0}")]
    SplitFormat(String),

    #[error("shape error {op} {got:?} vs {want:?}")]
    Shape {
        op: &'static str,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("numeric overflow in {0}")]
    NumericOverflow(&'static str),
    #[error("empty graph readout")]
    EmptyReadout,
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("bad parameter file: {0}")]
    ParamFormat(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::CycleBreakingInfeasible
            | Error::NoConvergence
            | Error::NotSymmetric { .. }
            | Error::DegenerateSummary(_)
            | Error::Shape { .. }
            | Error::NumericOverflow(_)
            | Error::Diverged { .. } => ErrorKind::Numeric,
            Error::AtGraph { source, .. } => source.kind(),
            Error::InvalidArgument(_) | Error::Config { .. } => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }

    pub fn at_graph(index: usize, source: Error) -> Error {
        Error::AtGraph {
            index,
            source: Box::new(source),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
