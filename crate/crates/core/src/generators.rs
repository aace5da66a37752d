//! Small deterministic graph families and seeded random graphs, used by the
//! test suites and the synthetic benchmark corpora.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

pub fn cycle_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edge_list(n, &edges).expect("valid cycle")
}

pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::from_edge_list(n, &edges).expect("valid path")
}

/// Star with `leaves` leaves; the center is node 0.
pub fn star_graph(leaves: usize) -> Graph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    Graph::from_edge_list(leaves + 1, &edges).expect("valid star")
}

pub fn complete_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    Graph::from_edge_list(n, &edges).expect("valid clique")
}

/// Erdős–Rényi `G(n, p)`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(n, &edges).expect("valid random graph")
}

/// Connected graph with exactly `m` edges: a random recursive tree plus
/// `m - (n - 1)` extra edges drawn uniformly from the remaining pairs.
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Graph {
    assert!(n >= 1 && m + 1 >= n && m <= n * (n - 1) / 2);
    let mut edges = random_tree_edges(rng, n);
    let mut others: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !edges.contains(&(u, v)))
        .collect();
    others.shuffle(rng);
    edges.extend(others.into_iter().take(m + 1 - n));
    Graph::from_edge_list(n, &edges).expect("valid connected graph")
}

/// Edges of a random recursive tree on `n` nodes, each as `(min, max)`.
pub fn random_tree_edges<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|v| (rng.gen_range(0..v), v)).collect()
}
