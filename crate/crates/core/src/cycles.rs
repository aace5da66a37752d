//! Fundamental cycle bases and the cycle-centric graph perturbations.
//!
//! The basis is Paton's fundamental basis: a spanning forest is grown by BFS
//! from the lowest-id node of each component (neighbors in ascending order),
//! and every non-tree edge closes exactly one cycle through the forest.
//! Non-tree edges are visited in lexicographic order, so the basis is a pure
//! function of the graph.
//!
//! The perturbations built on top of it:
//!
//! * [`break_cycles`] removes one edge per basis cycle by backtracking while
//!   keeping the component count fixed;
//! * [`add_one_cycle_length`] subdivides one edge of every basis cycle;
//! * [`align_cycle_lengths`] applies that `n` times to every `R`-th graph;
//! * [`add_random_nodes`] is the size-matched random control.

use std::collections::VecDeque;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::matrix::Matrix;

/// A simple cycle stored as its vertex sequence; the closing edge from the
/// last vertex back to the first is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    nodes: Vec<usize>,
}

impl Cycle {
    pub fn new(nodes: Vec<usize>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.contains(&v)
    }

    /// Edges in walk order, ending with the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.nodes.len();
        (0..n).map(move |i| (self.nodes[i], self.nodes[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleBasis {
    pub cycles: Vec<Cycle>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cycles.iter().map(Cycle::len).collect()
    }

    /// Mean basis-cycle length, `None` for an empty basis.
    pub fn mean_length(&self) -> Option<f64> {
        if self.cycles.is_empty() {
            return None;
        }
        Some(self.cycles.iter().map(Cycle::len).sum::<usize>() as f64 / self.cycles.len() as f64)
    }
}

/// Paton fundamental cycle basis.
///
/// Each cycle starts with its non-tree edge: the vertex sequence is
/// `u, v, <tree path from v to u>` for the chord `(u, v)`, `u < v`.
pub fn cycle_basis(g: &Graph) -> CycleBasis {
    let n = g.node_count();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if parent[root] != usize::MAX {
            continue;
        }
        parent[root] = root;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    let is_tree_edge = |u: usize, v: usize| parent[v] == u || parent[u] == v;
    let mut cycles = Vec::new();
    for (u, v) in g.edges() {
        if is_tree_edge(u, v) {
            continue;
        }
        // climb both endpoints to their lowest common ancestor
        let (mut a, mut b) = (u, v);
        let mut up_from_u = Vec::new();
        let mut up_from_v = Vec::new();
        while depth[a] > depth[b] {
            up_from_u.push(a);
            a = parent[a];
        }
        while depth[b] > depth[a] {
            up_from_v.push(b);
            b = parent[b];
        }
        while a != b {
            up_from_u.push(a);
            up_from_v.push(b);
            a = parent[a];
            b = parent[b];
        }
        let lca = a;
        // u, v, ..., lca, ..., (child of lca towards u)
        let mut nodes = vec![u];
        nodes.extend(up_from_v);
        if lca != u {
            nodes.push(lca);
        }
        nodes.extend(up_from_u.iter().skip(1).rev());
        cycles.push(Cycle::new(nodes));
    }
    CycleBasis { cycles }
}

/// Removes one edge from every basis cycle without changing the number of
/// connected components. The result is a spanning forest of `g`.
pub fn break_cycles(g: &Graph) -> Result<Graph> {
    break_cycles_with_basis(g, &cycle_basis(g))
}

/// Backtracking search over per-cycle edge choices, in cycle edge order.
/// Works with any list of cycles, not only the Paton basis; edges already
/// removed for an earlier cycle are not candidates.
pub fn break_cycles_with_basis(g: &Graph, basis: &CycleBasis) -> Result<Graph> {
    fn search(i: usize, b: &mut GraphBuilder, cycles: &[Cycle]) -> bool {
        if i == cycles.len() {
            return true;
        }
        let before = b.component_count();
        for (u, v) in cycles[i].edges() {
            if !b.has_edge(u, v) {
                continue;
            }
            b.remove_edge(u, v).expect("cycle edges are in range");
            if b.component_count() == before && search(i + 1, b, cycles) {
                return true;
            }
            b.add_edge(u, v).expect("cycle edges are in range");
        }
        false
    }

    for c in &basis.cycles {
        for (u, v) in c.edges() {
            if !g.has_edge(u, v) {
                return Err(Error::InvalidArgument(format!(
                    "cycle edge ({u}, {v}) is not in the graph"
                )));
            }
        }
    }
    let mut b = g.to_builder();
    if search(0, &mut b, &basis.cycles) {
        Ok(b.build())
    } else {
        Err(Error::CycleBreakingInfeasible)
    }
}

/// Output of one cycle-lengthening pass.
#[derive(Debug, Clone)]
pub struct CycleExtension {
    pub graph: Graph,
    /// Basis cycles left untouched because none of their edges remained.
    pub skipped: Vec<usize>,
}

/// Lengthens every basis cycle of `g` by one: a random still-present edge of
/// the cycle is replaced by a path through a new node. The new node copies the
/// features of the cycle's minimum-degree node (ties go to the lowest id).
pub fn add_one_cycle_length<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> CycleExtension {
    add_one_cycle_length_with_basis(g, &cycle_basis(g), rng)
}

pub fn add_one_cycle_length_with_basis<R: Rng + ?Sized>(
    g: &Graph,
    basis: &CycleBasis,
    rng: &mut R,
) -> CycleExtension {
    let mut b = g.to_builder();
    let mut skipped = Vec::new();
    for (ci, cycle) in basis.cycles.iter().enumerate() {
        let present: Vec<(usize, usize)> =
            cycle.edges().filter(|&(u, v)| b.has_edge(u, v)).collect();
        let Some(&(v1, v2)) = present.choose(rng) else {
            warn!("basis cycle {ci} has no remaining edges; skipped");
            skipped.push(ci);
            continue;
        };
        b.remove_edge(v1, v2).expect("present edge");
        let source = cycle
            .nodes()
            .iter()
            .copied()
            .min_by_key(|&v| (b.degree(v), v))
            .expect("cycles are nonempty");
        let fresh = b.add_node(Some(source)).expect("source is in range");
        b.add_edge(v1, fresh).expect("in range");
        b.add_edge(v2, fresh).expect("in range");
    }
    CycleExtension {
        graph: b.build(),
        skipped,
    }
}

/// Applies `increments` successive [`add_one_cycle_length`] passes (basis
/// recomputed before each) to every graph whose index is a multiple of
/// `skip_ratio`. Other graphs pass through unchanged; order is preserved.
pub fn align_cycle_lengths<R: Rng + ?Sized>(
    d: &Dataset,
    skip_ratio: usize,
    increments: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if skip_ratio == 0 || increments == 0 {
        return Err(Error::InvalidArgument(
            "skip ratio and increments must be at least 1".into(),
        ));
    }
    let graphs = d
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            if i % skip_ratio != 0 {
                return g.clone();
            }
            (0..increments).fold(g.clone(), |cur, _| add_one_cycle_length(&cur, rng).graph)
        })
        .collect();
    Dataset::new(d.name.clone(), graphs, d.class_count)
}

/// Column layout of [`node_cycle_features`].
pub type CycleFeatureMatrix = Matrix;

/// Per-node `[membership, mean length of basis cycles through the node]`;
/// both entries are 0 for nodes on no basis cycle.
pub fn node_cycle_features(g: &Graph) -> CycleFeatureMatrix {
    let n = g.node_count();
    let mut hits = vec![0usize; n];
    let mut total = vec![0usize; n];
    for c in cycle_basis(g).cycles {
        for &v in c.nodes() {
            hits[v] += 1;
            total[v] += c.len();
        }
    }
    let mut m = Matrix::zeros(n, 2);
    for v in 0..n {
        if hits[v] > 0 {
            m[(v, 0)] = 1.0;
            m[(v, 1)] = total[v] as f64 / hits[v] as f64;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CycleLengthStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub cyclic_graphs: usize,
}

/// Mean and std over graphs of each graph's average basis-cycle length.
/// Acyclic graphs are left out.
pub fn cycle_length_stats(d: &Dataset) -> Result<CycleLengthStats> {
    let per_graph: Vec<f64> = d
        .graphs
        .iter()
        .filter_map(|g| cycle_basis(g).mean_length())
        .collect();
    if per_graph.is_empty() {
        return Err(Error::NoCyclicGraphs);
    }
    let k = per_graph.len() as f64;
    let mean = per_graph.iter().sum::<f64>() / k;
    let var = per_graph.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
    Ok(CycleLengthStats {
        mean,
        std: var.sqrt(),
        cyclic_graphs: per_graph.len(),
    })
}

/// Adds `count` nodes one at a time, each joined to two distinct uniformly
/// chosen existing nodes and copying the features of a uniformly chosen
/// existing node.
pub fn add_random_nodes<R: Rng + ?Sized>(g: &Graph, count: usize, rng: &mut R) -> Result<Graph> {
    if count == 0 {
        return Ok(g.clone());
    }
    if g.node_count() < 2 {
        return Err(Error::GraphTooSmall);
    }
    let mut b = g.to_builder();
    for _ in 0..count {
        let n = b.node_count();
        let ends = index::sample(rng, n, 2);
        let source = rng.gen_range(0..n);
        let fresh = b.add_node(Some(source))?;
        b.add_edge(fresh, ends.index(0))?;
        b.add_edge(fresh, ends.index(1))?;
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle_graph, random_graph};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn is_simple_closed(g: &Graph, c: &Cycle) -> bool {
        let distinct: BTreeSet<_> = c.nodes().iter().collect();
        distinct.len() == c.len() && c.len() >= 3 && c.edges().all(|(u, v)| g.has_edge(u, v))
    }

    /// Independent fundamental-cycle oracle: rebuild a BFS tree, then for
    /// every chord find the tree path between its endpoints by DFS in the tree.
    fn oracle_fundamental_lengths(g: &Graph) -> Vec<usize> {
        let n = g.node_count();
        let mut seen = vec![false; n];
        let mut tree: BTreeSet<(usize, usize)> = BTreeSet::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut frontier = vec![root];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for &u in &frontier {
                    for &v in g.neighbors(u) {
                        if !seen[v] {
                            seen[v] = true;
                            tree.insert((u.min(v), u.max(v)));
                            next.push(v);
                        }
                    }
                }
                frontier = next;
            }
        }
        let tree_graph =
            Graph::from_edge_list(n, &tree.iter().copied().collect::<Vec<_>>()).unwrap();
        let path_len = |s: usize, t: usize| -> usize {
            let mut stack = vec![(s, usize::MAX, 0usize)];
            while let Some((u, from, d)) = stack.pop() {
                if u == t {
                    return d;
                }
                for &v in tree_graph.neighbors(u) {
                    if v != from {
                        stack.push((v, u, d + 1));
                    }
                }
            }
            unreachable!("chord endpoints share a tree")
        };
        g.edges()
            .filter(|e| !tree.contains(e))
            .map(|(u, v)| path_len(u, v) + 1)
            .collect()
    }

    #[test]
    fn tree_has_empty_basis() {
        let g = Graph::from_edge_list(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert!(cycle_basis(&g).is_empty());
    }

    #[test]
    fn triangle_basis() {
        let b = cycle_basis(&cycle_graph(3));
        assert_eq!(b.lengths(), vec![3]);
    }

    #[test]
    fn k4_basis_matches_oracle() {
        let edges: Vec<_> = (0..4)
            .flat_map(|u| (u + 1..4).map(move |v| (u, v)))
            .collect();
        let g = Graph::from_edge_list(4, &edges).unwrap();
        let b = cycle_basis(&g);
        assert_eq!(b.len(), 3);
        assert_eq!(b.lengths(), oracle_fundamental_lengths(&g));
        assert_eq!(b.lengths(), vec![3, 3, 3]);
        for c in &b.cycles {
            assert!(c.contains(0), "star tree rooted at 0");
        }
    }

    #[test]
    fn basis_lengths_match_oracle_on_random_graphs() {
        let mut r = rng(11);
        for _ in 0..200 {
            let g = random_graph(&mut r, 25, 0.15);
            assert_eq!(cycle_basis(&g).lengths(), oracle_fundamental_lengths(&g));
        }
    }

    #[test]
    fn chord_is_first_edge() {
        let g = cycle_graph(5);
        let c = &cycle_basis(&g).cycles[0];
        let (u, v) = c.edges().next().unwrap();
        assert_eq!((u, v), (2, 3));
        assert!(is_simple_closed(&g, c));
    }

    #[test]
    fn break_examples() {
        let t = break_cycles(&cycle_graph(3)).unwrap();
        assert_eq!((t.node_count(), t.edge_count()), (3, 2));
        assert_eq!(t.connected_components().count, 1);

        let forest = Graph::from_edge_list(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        assert_eq!(break_cycles(&forest).unwrap(), forest);
    }

    #[test]
    fn break_random_connected_12_18() {
        let g = crate::generators::random_connected_graph(&mut rng(5), 12, 18);
        assert_eq!((g.node_count(), g.edge_count()), (12, 18));
        let h = break_cycles(&g).unwrap();
        assert_eq!(h.edge_count(), 11);
        assert_eq!(h.connected_components().count, 1);
        assert_eq!(h.circuit_rank(), 0);
        assert!(cycle_basis(&h).is_empty());
    }

    #[test]
    fn break_with_reversed_cycles_backtracks() {
        // tree edges first means early choices can strand later cycles
        let mut r = rng(9);
        for _ in 0..50 {
            let g = random_graph(&mut r, 15, 0.3);
            let reversed = CycleBasis {
                cycles: cycle_basis(&g)
                    .cycles
                    .iter()
                    .map(|c| Cycle::new(c.nodes().iter().rev().copied().collect()))
                    .collect(),
            };
            let h = break_cycles_with_basis(&g, &reversed).unwrap();
            assert_eq!(h.edge_count(), g.edge_count() - g.circuit_rank());
            assert_eq!(
                h.connected_components().count,
                g.connected_components().count
            );
        }
    }

    #[test]
    fn break_reports_infeasible() {
        let g = cycle_graph(3);
        let c = cycle_basis(&g).cycles[0].clone();
        let doubled = CycleBasis {
            cycles: vec![c.clone(), c],
        };
        let err = break_cycles_with_basis(&g, &doubled).unwrap_err();
        assert_eq!(err.to_string(), "cycle breaking infeasible");
    }

    #[test]
    fn add_one_examples() {
        let out = add_one_cycle_length(&cycle_graph(3), &mut rng(1));
        assert_eq!(out.graph.node_count(), 4);
        assert_eq!(out.graph.edge_count(), 4);
        assert_eq!(cycle_basis(&out.graph).lengths(), vec![4]);

        let forest = Graph::from_edge_list(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(add_one_cycle_length(&forest, &mut rng(1)).graph, forest);
    }

    #[test]
    fn add_one_on_bowtie() {
        // two triangles sharing node 0
        let g =
            Graph::from_edge_list(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap();
        for seed in 0..20 {
            let out = add_one_cycle_length(&g, &mut rng(seed));
            assert!(out.skipped.is_empty());
            assert_eq!((out.graph.node_count(), out.graph.edge_count()), (7, 8));
            // oracle: recompute the basis on the result
            let mut lens = cycle_basis(&out.graph).lengths();
            lens.sort();
            assert_eq!(lens, vec![4, 4]);
        }
    }

    #[test]
    fn new_node_copies_min_degree_features() {
        // triangle 0-1-2 with a pendant on node 0: min degree node of the cycle is 1 (tie 1,2 -> 1)
        // unless the removed edge lowers another node's degree first
        let g = Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 0), (0, 3)])
            .unwrap()
            .with_features(Some(
                Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap(),
            ))
            .unwrap();
        for seed in 0..20 {
            let out = add_one_cycle_length(&g, &mut rng(seed));
            let h = out.graph;
            let fresh = h.features().unwrap().row(4)[0];
            // after removing edge (a, b) both endpoints drop to degree 1 unless one of them is node 0
            let removed: Vec<_> = g.edges().filter(|&(u, v)| !h.has_edge(u, v)).collect();
            assert_eq!(removed.len(), 1);
            let (a, b) = removed[0];
            let expected = [0usize, 1, 2]
                .into_iter()
                .min_by_key(|&v| {
                    let d = g.degree(v) - usize::from(v == a || v == b);
                    (d, v)
                })
                .unwrap();
            assert_eq!(fresh, expected as f64);
        }
    }

    #[test]
    fn align_examples() {
        let d = Dataset::from_graphs("c", vec![cycle_graph(3)]).unwrap();
        let out = align_cycle_lengths(&d, 1, 1, &mut rng(0)).unwrap();
        assert_eq!(cycle_basis(&out.graphs[0]).lengths(), vec![4]);

        let d = Dataset::from_graphs("c", vec![cycle_graph(3); 3]).unwrap();
        let out = align_cycle_lengths(&d, 2, 1, &mut rng(0)).unwrap();
        let sizes: Vec<_> = out.graphs.iter().map(Graph::node_count).collect();
        assert_eq!(sizes, vec![4, 3, 4]);
        assert_eq!(out.graphs[1], d.graphs[1]);

        assert!(align_cycle_lengths(&d, 0, 1, &mut rng(0)).is_err());
    }

    #[test]
    fn align_huge_ratio_touches_only_first() {
        let d = Dataset::from_graphs("c", vec![cycle_graph(4); 100]).unwrap();
        let out = align_cycle_lengths(&d, 1_000_000_000, 1, &mut rng(0)).unwrap();
        assert_eq!(out.graphs[0].node_count(), 5);
        assert!(out.graphs[1..].iter().all(|g| g.node_count() == 4));
    }

    #[test]
    fn node_feature_examples() {
        let path = Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(node_cycle_features(&path).row(1), &[0.0, 0.0]);
        assert_eq!(node_cycle_features(&cycle_graph(3)).row(0), &[1.0, 3.0]);
        // triangle 0-1-2 and pentagon 0-3-4-5-6 sharing node 0
        let g = Graph::from_edge_list(
            7,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (0, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 0),
            ],
        )
        .unwrap();
        assert_eq!(node_cycle_features(&g).row(0), &[1.0, 4.0]);
    }

    #[test]
    fn stats_examples() {
        let d = Dataset::from_graphs("c", vec![cycle_graph(3), cycle_graph(5)]).unwrap();
        let s = cycle_length_stats(&d).unwrap();
        assert_eq!((s.mean, s.std), (4.0, 1.0));
        let d = Dataset::from_graphs("c", vec![cycle_graph(4)]).unwrap();
        let s = cycle_length_stats(&d).unwrap();
        assert_eq!((s.mean, s.std), (4.0, 0.0));
        let d = Dataset::from_graphs("t", vec![Graph::empty(3)]).unwrap();
        assert_eq!(
            cycle_length_stats(&d).unwrap_err().to_string(),
            "no cyclic graphs in dataset"
        );
    }

    #[test]
    fn random_node_examples() {
        let t = cycle_graph(3);
        assert_eq!(add_random_nodes(&t, 0, &mut rng(0)).unwrap(), t);
        let g = add_random_nodes(&t, 2, &mut rng(0)).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (5, 7));
        let k2 = Graph::from_edge_list(2, &[(0, 1)]).unwrap();
        let g = add_random_nodes(&k2, 1, &mut rng(42)).unwrap();
        assert_eq!(g.neighbors(2), &[0, 1]);
        let err = add_random_nodes(&Graph::empty(1), 1, &mut rng(0)).unwrap_err();
        assert_eq!(err.to_string(), "graph too small for random attachment");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn circuit_rank_and_simple_cycles(seed in any::<u64>(), n in 1usize..30, p in 0.0f64..0.4) {
            let g = random_graph(&mut rng(seed), n, p);
            let b = cycle_basis(&g);
            prop_assert_eq!(b.len(), g.circuit_rank());
            for c in &b.cycles {
                prop_assert!(is_simple_closed(&g, c));
            }
        }

        #[test]
        fn breaking_leaves_spanning_forest(seed in any::<u64>(), n in 1usize..30, p in 0.0f64..0.4) {
            let g = random_graph(&mut rng(seed), n, p);
            let h = break_cycles(&g).unwrap();
            prop_assert!(cycle_basis(&h).is_empty());
            prop_assert_eq!(h.connected_components().count, g.connected_components().count);
            prop_assert_eq!(g.edge_count() - h.edge_count(), g.circuit_rank());
        }

        #[test]
        fn edge_disjoint_cycles_each_grow_by_one(
            lens in proptest::collection::vec(3usize..9, 1..5),
            seed in any::<u64>(),
        ) {
            // cycles chained through shared vertices only, so they are edge-disjoint
            let mut edges = Vec::new();
            let mut next = 1usize;
            for &len in &lens {
                let start = next - 1;
                let mut prev = start;
                for _ in 1..len {
                    edges.push((prev, next));
                    prev = next;
                    next += 1;
                }
                edges.push((prev, start));
            }
            let g = Graph::from_edge_list(next, &edges).unwrap();
            let before = cycle_basis(&g);
            let out = add_one_cycle_length_with_basis(&g, &before, &mut rng(seed));
            prop_assert_eq!(out.graph.node_count(), g.node_count() + lens.len());
            let mut want: Vec<usize> = before.lengths().iter().map(|l| l + 1).collect();
            let mut got = cycle_basis(&out.graph).lengths();
            want.sort();
            got.sort();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn aligning_pure_cycles(m in 3usize..12, n in 1usize..6, seed in any::<u64>()) {
            let d = Dataset::from_graphs("c", vec![cycle_graph(m)]).unwrap();
            let out = align_cycle_lengths(&d, 1, n, &mut rng(seed)).unwrap();
            let g = &out.graphs[0];
            prop_assert_eq!(g.node_count(), m + n);
            prop_assert_eq!(g.edge_count(), m + n);
            prop_assert!(g.degree_vector().iter().all(|&d| d == 2));
            prop_assert_eq!(g.connected_components().count, 1);
        }

        #[test]
        fn lengths_within_basis_range(seed in any::<u64>(), n in 3usize..25) {
            let g = random_graph(&mut rng(seed), n, 0.2);
            let lens = cycle_basis(&g).lengths();
            let f = node_cycle_features(&g);
            for v in 0..n {
                if f[(v, 0)] == 1.0 {
                    let lo = *lens.iter().min().unwrap() as f64;
                    let hi = *lens.iter().max().unwrap() as f64;
                    prop_assert!(f[(v, 1)] >= lo && f[(v, 1)] <= hi && f[(v, 1)] >= 3.0);
                } else {
                    prop_assert_eq!(f[(v, 1)], 0.0);
                }
            }
        }
    }
}
