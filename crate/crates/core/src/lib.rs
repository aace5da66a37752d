//! Graph-size distribution shift toolkit: cycle bases and cycle surgery,
//! propagation-matrix spectra, size-based splits, a small GNN stack, and
//! d-pattern analysis.

pub mod cycles;
pub mod dataset;
pub mod dpattern;
pub mod error;
pub mod generators;
pub mod gnn;
pub mod graph;
pub mod matrix;
pub mod nn;
pub mod spectral;
pub mod splits;

pub use dataset::Dataset;
pub use error::{Error, ErrorKind, Result};
pub use graph::{Graph, GraphBuilder};
pub use matrix::Matrix;
