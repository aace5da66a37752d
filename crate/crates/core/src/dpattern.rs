//! Recursive node patterns: the depth-0 pattern of a node is its color, and
//! the depth-d pattern is its own depth-(d-1) pattern together with the
//! multiset of its neighbors' depth-(d-1) patterns.
//!
//! Patterns are interned by exact canonical strings, so two ids are equal
//! precisely when the underlying structures are equal.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::cycle_graph;
use crate::graph::Graph;

/// Maps canonical pattern strings to dense ids. Share one interner between
/// graphs to compare their patterns.
#[derive(Debug, Clone, Default)]
pub struct PatternInterner {
    ids: HashMap<String, usize>,
    strings: Vec<String>,
}

impl PatternInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, key: String) -> usize {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.strings.len();
        self.strings.push(key.clone());
        self.ids.insert(key, id);
        id
    }

    pub fn canonical(&self, id: usize) -> &str {
        &self.strings[id]
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

/// Pattern ids per depth: `ids[d][v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    pub ids: Vec<Vec<usize>>,
}

impl PatternTable {
    pub fn depth(&self, d: usize) -> &[usize] {
        &self.ids[d]
    }

    pub fn max_depth(&self) -> usize {
        self.ids.len() - 1
    }

    /// Number of distinct patterns at depth `d`.
    pub fn class_count(&self, d: usize) -> usize {
        self.ids[d].iter().collect::<HashSet<_>>().len()
    }
}

pub fn d_patterns(
    g: &Graph,
    colors: &[usize],
    d_max: usize,
    interner: &mut PatternInterner,
) -> Result<PatternTable> {
    if colors.len() != g.node_count() {
        return Err(Error::InvalidArgument(format!(
            "{} colors for {} nodes",
            colors.len(),
            g.node_count()
        )));
    }
    let mut ids = Vec::with_capacity(d_max + 1);
    ids.push(
        colors
            .iter()
            .map(|c| interner.intern(format!("0:{c}")))
            .collect::<Vec<_>>(),
    );
    for d in 1..=d_max {
        let prev: &Vec<usize> = &ids[d - 1];
        let next = (0..g.node_count())
            .map(|v| {
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for &u in g.neighbors(v) {
                    *counts.entry(prev[u]).or_default() += 1;
                }
                let multiset: Vec<String> =
                    counts.iter().map(|(p, m)| format!("{p}x{m}")).collect();
                interner.intern(format!("{d}:{}|{}", prev[v], multiset.join(",")))
            })
            .collect();
        ids.push(next);
    }
    Ok(PatternTable { ids })
}

/// Uniform-color convenience wrapper.
pub fn uncolored_patterns(g: &Graph, d_max: usize, interner: &mut PatternInterner) -> PatternTable {
    d_patterns(g, &vec![0; g.node_count()], d_max, interner).expect("colors match node count")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub holds: bool,
    /// Distinct pattern ids across all nodes of all graphs, per depth.
    pub classes_per_depth: Vec<usize>,
    pub first_failure_depth: Option<usize>,
}

/// Checks that every node of every graph (uniform colors) carries one
/// common pattern id at each depth up to `d_max`.
pub fn verify_uniform_patterns(graphs: &[Graph], d_max: usize) -> LemmaReport {
    let mut interner = PatternInterner::new();
    let tables: Vec<PatternTable> = graphs
        .iter()
        .map(|g| uncolored_patterns(g, d_max, &mut interner))
        .collect();
    let classes_per_depth: Vec<usize> = (0..=d_max)
        .map(|d| {
            tables
                .iter()
                .flat_map(|t| t.depth(d).iter().copied())
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();
    let first_failure_depth = classes_per_depth.iter().position(|&c| c > 1);
    LemmaReport {
        holds: first_failure_depth.is_none(),
        classes_per_depth,
        first_failure_depth,
    }
}

/// The cycle lemma: all nodes of all `C_n` share one pattern per depth.
pub fn verify_cycle_lemma(n_values: &[usize], d_max: usize) -> Result<LemmaReport> {
    if let Some(&n) = n_values.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidArgument(format!(
            "cycle length {n} is below 3"
        )));
    }
    let graphs: Vec<Graph> = n_values.iter().map(|&n| cycle_graph(n)).collect();
    Ok(verify_uniform_patterns(&graphs, d_max))
}

/// For each depth, whether every pair `(a, b)` in `pairs` has equal
/// patterns in `ga` and `gb`.
pub fn compare_patterns(
    ga: &Graph,
    gb: &Graph,
    colors_a: &[usize],
    colors_b: &[usize],
    pairs: &[(usize, usize)],
    d_max: usize,
) -> Result<Vec<bool>> {
    let mut left = HashSet::new();
    let mut right = HashSet::new();
    for &(a, b) in pairs {
        if a >= ga.node_count() || b >= gb.node_count() {
            return Err(Error::InvalidArgument(format!(
                "pair ({a}, {b}) out of range"
            )));
        }
        if !left.insert(a) || !right.insert(b) {
            return Err(Error::InvalidArgument(format!(
                "pair ({a}, {b}) repeats a node; the pairing must be one-to-one"
            )));
        }
    }
    let mut interner = PatternInterner::new();
    let ta = d_patterns(ga, colors_a, d_max, &mut interner)?;
    let tb = d_patterns(gb, colors_b, d_max, &mut interner)?;
    Ok((0..=d_max)
        .map(|d| pairs.iter().all(|&(a, b)| ta.depth(d)[a] == tb.depth(d)[b]))
        .collect())
}
