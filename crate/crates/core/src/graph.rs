//! Undirected simple graphs with optional node features and a class label.
//!
//! A [`Graph`] is immutable once built. Neighbor lists are kept sorted so
//! every traversal in the crate visits nodes in a reproducible order.
//! Edits go through [`GraphBuilder`], which yields a fresh value.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    features: Option<Matrix>,
    label: Option<usize>,
}

impl Graph {
    /// Builds a graph on `n` nodes. Pairs are normalized to `(min, max)` and
    /// duplicates (including reversed duplicates) collapse to one edge.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut b = GraphBuilder::new(n);
        for &(u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    pub fn empty(n: usize) -> Graph {
        GraphBuilder::new(n).build()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn features(&self) -> Option<&Matrix> {
        self.features.as_ref()
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn with_label(mut self, label: Option<usize>) -> Graph {
        self.label = label;
        self
    }

    pub fn with_features(mut self, features: Option<Matrix>) -> Result<Graph> {
        if let Some(f) = &features {
            if f.rows() != self.node_count() {
                return Err(Error::FeatureRows {
                    got: f.rows(),
                    want: self.node_count(),
                });
            }
        }
        self.features = features;
        Ok(self)
    }

    pub fn degree_vector(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn connected_components(&self) -> ComponentLabeling {
        let n = self.node_count();
        let mut labels = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if labels[v] == usize::MAX {
                        labels[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        ComponentLabeling { count, labels }
    }

    /// `|E| - N + components`, the dimension of the cycle space.
    pub fn circuit_rank(&self) -> usize {
        self.edge_count + self.connected_components().count - self.node_count()
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::InvalidArgument(format!(
                "permutation has length {}, graph has {n} nodes",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let edges: Vec<_> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        let features = self.features.as_ref().map(|f| {
            let mut inverse = vec![0; n];
            for (old, &new) in perm.iter().enumerate() {
                inverse[new] = old;
            }
            f.select_rows(&inverse)
        });
        Graph::from_edge_list(n, &edges)?
            .with_features(features)
            .map(|g| g.with_label(self.label))
    }

    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            adjacency: self
                .adjacency
                .iter()
                .map(|ns| ns.iter().copied().collect())
                .collect(),
            features: self.features.clone(),
            label: self.label,
        }
    }
}

/// Connected-component ids, contiguous from 0 in order of lowest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub count: usize,
    pub labels: Vec<usize>,
}

/// Mutable staging area for producing a new [`Graph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    adjacency: Vec<BTreeSet<usize>>,
    features: Option<Matrix>,
    label: Option<usize>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            adjacency: vec![BTreeSet::new(); n],
            features: None,
            label: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adjacency.len() && self.adjacency[u].contains(&v)
    }

    fn check(&self, u: usize, v: usize) -> Result<()> {
        let n = self.adjacency.len();
        for x in [u, v] {
            if x >= n {
                return Err(Error::NodeOutOfRange { node: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    /// Returns whether the edge was newly inserted.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check(u, v)?;
        let fresh = self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        Ok(fresh)
    }

    /// Returns whether the edge was present.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check(u, v)?;
        let present = self.adjacency[u].remove(&v);
        self.adjacency[v].remove(&u);
        Ok(present)
    }

    /// Appends a node and returns its id. When the graph carries features the
    /// new node copies the feature row of `feature_source`.
    pub fn add_node(&mut self, feature_source: Option<usize>) -> Result<usize> {
        let id = self.adjacency.len();
        if let Some(f) = &mut self.features {
            let row = match feature_source {
                Some(src) if src < id => f.row(src).to_vec(),
                Some(src) => return Err(Error::NodeOutOfRange { node: src, n: id }),
                None => vec![0.0; f.cols()],
            };
            f.push_row(&row)?;
        }
        self.adjacency.push(BTreeSet::new());
        Ok(id)
    }

    pub fn set_features(&mut self, features: Option<Matrix>) -> Result<()> {
        if let Some(f) = &features {
            if f.rows() != self.adjacency.len() {
                return Err(Error::FeatureRows {
                    got: f.rows(),
                    want: self.adjacency.len(),
                });
            }
        }
        self.features = features;
        Ok(())
    }

    pub fn set_label(&mut self, label: Option<usize>) {
        self.label = label;
    }

    pub fn component_count(&self) -> usize {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn build(self) -> Graph {
        let edge_count = self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2;
        Graph {
            adjacency: self
                .adjacency
                .into_iter()
                .map(|ns| ns.into_iter().collect())
                .collect(),
            edge_count,
            features: self.features,
            label: self.label,
        }
    }
}
