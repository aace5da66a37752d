//! Graph-classification datasets and their on-disk formats.
//!
//! Two formats are supported:
//!
//! * the TUDataset text layout (`NAME_A.txt`, `NAME_graph_indicator.txt`,
//!   `NAME_graph_labels.txt`, optional `NAME_node_labels.txt` and
//!   `NAME_node_attributes.txt`), read-only;
//! * a JSONL layout with one graph object per line, read and written.
//!
//! Byte-level examples of both live in `docs/formats.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub class_count: usize,
}

impl Dataset {
    /// Validates label range and feature-width consistency.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, class_count: usize) -> Result<Self> {
        let d = Dataset {
            name: name.into(),
            graphs,
            class_count,
        };
        d.validate()?;
        Ok(d)
    }

    /// Infers `class_count` as one past the largest label (at least 1).
    pub fn from_graphs(name: impl Into<String>, graphs: Vec<Graph>) -> Result<Self> {
        let class_count = graphs
            .iter()
            .filter_map(Graph::label)
            .max()
            .map_or(1, |m| m + 1);
        Self::new(name, graphs, class_count)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Labels of every graph. Unlabeled graphs report class 0.
    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(|g| g.label().unwrap_or(0)).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::node_count).collect()
    }

    /// Width of the node feature rows, or `None` when graphs carry no features.
    pub fn feature_width(&self) -> Option<usize> {
        self.graphs
            .iter()
            .filter(|g| g.node_count() > 0)
            .find_map(|g| g.features().map(Matrix::cols))
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            class_count: self.class_count,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.class_count == 0 {
            return Err(Error::InvalidDataset("class_count must be positive".into()));
        }
        let width = self.feature_width();
        for (i, g) in self.graphs.iter().enumerate() {
            if let Some(l) = g.label() {
                if l >= self.class_count {
                    return Err(Error::InvalidDataset(format!(
                        "graph {i} has label {l} outside [0, {})",
                        self.class_count
                    )));
                }
            }
            if g.node_count() > 0 && g.features().map(Matrix::cols) != width {
                return Err(Error::InvalidDataset(format!(
                    "graph {i} feature width differs from the rest of the dataset"
                )));
            }
        }
        Ok(())
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e: T::Err| Error::TextParse {
        file: path.to_path_buf(),
        line,
        msg: format!("{s:?}: {e}"),
    })
}

/// Reads a TUDataset directory.
///
/// Node labels become a one-hot block over the sorted label vocabulary;
/// node attributes, when present, follow it. Graph labels are remapped to
/// `0..k` in sorted order of the original values. Self-loop rows are dropped.
pub fn parse_tudataset(dir: &Path, name: &str) -> Result<Dataset> {
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}.txt")) };

    let indicator_path = file("graph_indicator");
    let indicator: Vec<usize> = read_lines(&indicator_path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_field(&indicator_path, i + 1, l))
        .collect::<Result<_>>()?;

    let labels_path = file("graph_labels");
    let raw_labels: Vec<i64> = read_lines(&labels_path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_field(&labels_path, i + 1, l))
        .collect::<Result<_>>()?;
    let graph_count = raw_labels.len();

    let edge_path = file("A");
    let edge_lines = read_lines(&edge_path)?;

    // global node -> (graph, local id)
    let mut local = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; graph_count];
    for (node, &gid) in indicator.iter().enumerate() {
        if gid == 0 || gid > graph_count {
            return Err(Error::IndicatorOutOfRange {
                node: node + 1,
                graph: gid,
            });
        }
        local.push((gid - 1, sizes[gid - 1]));
        sizes[gid - 1] += 1;
    }

    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (i, line) in edge_lines.iter().enumerate() {
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::TextParse {
                file: edge_path.clone(),
                line: i + 1,
                msg: "expected two comma-separated node ids".into(),
            });
        };
        let u: usize = parse_field(&edge_path, i + 1, a)?;
        let v: usize = parse_field(&edge_path, i + 1, b)?;
        for x in [u, v] {
            if x == 0 || x > local.len() {
                return Err(Error::TextParse {
                    file: edge_path.clone(),
                    line: i + 1,
                    msg: format!("node {x} not in graph indicator"),
                });
            }
        }
        let (gu, lu) = local[u - 1];
        let (gv, lv) = local[v - 1];
        if gu != gv {
            return Err(Error::EdgeSpansGraphs { u, v });
        }
        if lu != lv {
            edges[gu].push((lu, lv));
        }
    }

    let node_label_path = file("node_labels");
    let node_labels: Option<Vec<i64>> = if node_label_path.exists() {
        let lines = read_lines(&node_label_path)?;
        if lines.len() != indicator.len() {
            return Err(Error::InvalidDataset(format!(
                "{} has {} rows for {} nodes",
                node_label_path.display(),
                lines.len(),
                indicator.len()
            )));
        }
        Some(
            lines
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    // some releases carry extra comma-separated columns; the first is the label
                    parse_field(&node_label_path, i + 1, l.split(',').next().unwrap_or(l))
                })
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };

    let attr_path = file("node_attributes");
    let attributes: Option<Vec<Vec<f64>>> = if attr_path.exists() {
        let lines = read_lines(&attr_path)?;
        if lines.len() != indicator.len() {
            return Err(Error::InvalidDataset(format!(
                "{} has {} rows for {} nodes",
                attr_path.display(),
                lines.len(),
                indicator.len()
            )));
        }
        let mut rows = Vec::with_capacity(lines.len());
        let mut width = None;
        for (i, l) in lines.iter().enumerate() {
            let row: Vec<f64> = l
                .split(',')
                .map(|s| parse_field(&attr_path, i + 1, s))
                .collect::<Result<_>>()?;
            let want = *width.get_or_insert(row.len());
            if row.len() != want {
                return Err(Error::RaggedAttributes {
                    line: i + 1,
                    got: row.len(),
                    want,
                });
            }
            rows.push(row);
        }
        Some(rows)
    } else {
        None
    };

    let vocabulary: BTreeMap<i64, usize> = node_labels
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    let label_map: BTreeMap<i64, usize> = raw_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();

    let attr_width = attributes
        .as_ref()
        .and_then(|a| a.first())
        .map_or(0, Vec::len);
    let width = vocabulary.len() + attr_width;

    let mut feature_rows: Vec<Vec<Vec<f64>>> =
        sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    if width > 0 {
        for (node, &(gid, _)) in local.iter().enumerate() {
            let mut row = vec![0.0; width];
            if let Some(nl) = &node_labels {
                row[vocabulary[&nl[node]]] = 1.0;
            }
            if let Some(attrs) = &attributes {
                row[vocabulary.len()..].copy_from_slice(&attrs[node]);
            }
            feature_rows[gid].push(row);
        }
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for gid in 0..graph_count {
        let features = if width > 0 {
            let mut m = Matrix::zeros(0, width);
            for r in &feature_rows[gid] {
                m.push_row(r)?;
            }
            Some(m)
        } else {
            None
        };
        let g = Graph::from_edge_list(sizes[gid], &edges[gid])?
            .with_features(features)?
            .with_label(Some(label_map[&raw_labels[gid]]));
        graphs.push(g);
    }
    Dataset::new(name, graphs, label_map.len().max(1))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
}

/// Parses one graph per non-blank line. `class_count` is inferred from the
/// largest label.
pub fn parse_jsonl(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut graphs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Jsonl { line: i + 1, msg };
        let record: JsonGraph = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let edges: Vec<(usize, usize)> = record.edges.iter().map(|&[u, v]| (u, v)).collect();
        let features = record
            .features
            .as_deref()
            .map(Matrix::from_rows)
            .transpose()
            .map_err(|e| err(e.to_string()))?;
        let g = Graph::from_edge_list(record.n, &edges)
            .and_then(|g| g.with_features(features))
            .map_err(|e| err(e.to_string()))?
            .with_label(record.label);
        graphs.push(g);
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::from_graphs(name, graphs)
}

pub fn write_jsonl(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for g in &dataset.graphs {
        let record = JsonGraph {
            n: g.node_count(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            label: g.label(),
            features: g.features().map(Matrix::to_rows),
        };
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::InvalidDataset(format!("serialize: {e}")))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
