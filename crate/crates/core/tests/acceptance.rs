//! Acceptance criteria, one PASS/FAIL/SKIP line each.
//!
//! Criteria 7 and 8 read real datasets from `$SPECSHIFT_DATA_DIR` (a TU
//! directory `NCI1/` and `BBBP/`, or `NCI1.jsonl` / `BBBP.jsonl`) and are
//! skipped when the files are absent. Pass criterion numbers as arguments to
//! run a subset.

use std::collections::HashSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specshift_core::cycles::{
    add_random_nodes, align_cycle_lengths, break_cycles, cycle_basis, cycle_length_stats,
};
use specshift_core::dataset::{parse_jsonl, parse_tudataset};
use specshift_core::dpattern::{d_patterns, verify_cycle_lemma, PatternInterner};
use specshift_core::generators::{cycle_graph, random_graph};
use specshift_core::gnn::{train, Backbone, Model, ModelConfig, PreparedGraph, Readout};
use specshift_core::nn::gradcheck;
use specshift_core::spectral::{
    normalized_adjacency, polynomial_filter_apply, similar_vs_different, spectral_filter_apply,
    spectrum_distance_matrix, symmetric_eigen, wasserstein1, FilterCoefficients, ShiftSummary,
    SpectrumDistribution, SpectrumSource, SymMatrix,
};
use specshift_core::splits::{make_size_splits, SplitBundle, SplitRatios, UpsampleSpec};
use specshift_core::{Dataset, Graph, Matrix};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_vec(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn random_corpus(seed: u64, count: usize) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=60);
            let p = rng.gen_range(0.02..0.25);
            random_graph(&mut rng, n, p)
        })
        .collect()
}

/// Closed, simple, and made of graph edges.
fn valid_cycle(g: &Graph, nodes: &[usize]) -> bool {
    let distinct: HashSet<_> = nodes.iter().collect();
    nodes.len() >= 3
        && distinct.len() == nodes.len()
        && (0..nodes.len()).all(|i| g.has_edge(nodes[i], nodes[(i + 1) % nodes.len()]))
}

/// Rank over GF(2) of the cycles' edge-incidence vectors.
fn gf2_rank(g: &Graph, cycles: &[Vec<usize>]) -> usize {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let words = edges.len().div_ceil(64).max(1);
    let mut rows: Vec<Vec<u64>> = cycles
        .iter()
        .map(|c| {
            let mut row = vec![0u64; words];
            for i in 0..c.len() {
                let (a, b) = (c[i], c[(i + 1) % c.len()]);
                let e = (a.min(b), a.max(b));
                let k = edges.iter().position(|&x| x == e).unwrap();
                row[k / 64] ^= 1 << (k % 64);
            }
            row
        })
        .collect();
    let mut rank = 0;
    for bit in 0..edges.len() {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & m != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & m != 0 {
                row.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    rank
}

fn c1_cycle_basis() -> Outcome {
    let corpus = random_corpus(1, 1000);
    let start = Instant::now();
    let mut bad = 0;
    let mut total = 0;
    for g in &corpus {
        let basis = cycle_basis(g);
        let cycles: Vec<Vec<usize>> = basis.cycles.iter().map(|c| c.nodes().to_vec()).collect();
        total += cycles.len();
        let ok = cycles.len() == g.circuit_rank()
            && cycles.iter().all(|c| valid_cycle(g, c))
            && gf2_rank(g, &cycles) == cycles.len();
        bad += usize::from(!ok);
    }
    let t = start.elapsed();
    verdict(
        bad == 0 && t < Duration::from_secs(10),
        format!(
            "1000 graphs, {total} cycles, {bad} bad, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn c2_cycle_breaking() -> Outcome {
    let corpus = random_corpus(1, 1000);
    let mut bad = 0;
    let mut infeasible = 0;
    for g in &corpus {
        match break_cycles(g) {
            Ok(h) => {
                let subset = h.edges().all(|(u, v)| g.has_edge(u, v));
                let ok = subset
                    && h.node_count() == g.node_count()
                    && h.circuit_rank() == 0
                    && h.connected_components().count == g.connected_components().count
                    && g.edge_count() - h.edge_count() == g.circuit_rank();
                bad += usize::from(!ok);
            }
            Err(specshift_core::Error::CycleBreakingInfeasible) => infeasible += 1,
            Err(_) => bad += 1,
        }
    }
    verdict(
        bad == 0 && infeasible == 0,
        format!("1000 graphs, {bad} bad, {infeasible} infeasible"),
    )
}

fn c3_eigensolver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_ratio = 0.0_f64;
    for &n in &[1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 120, 160, 200] {
        for _ in 0..3 {
            let a = rand_matrix(&mut rng, n, n);
            let m = a.add(&a.transpose()).unwrap();
            let eig = symmetric_eigen(&SymMatrix::new(m.clone()).unwrap()).unwrap();
            let err = m.sub(&eig.reconstruct()).unwrap().frobenius_norm();
            worst_ratio = worst_ratio.max(err / (1e-8 * n as f64));
        }
    }
    let mut worst_cycle = 0.0_f64;
    for n in 3..=30 {
        let eig = symmetric_eigen(&normalized_adjacency(&cycle_graph(n)).unwrap()).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|k| (1.0 + 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()) / 3.0)
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&want) {
            worst_cycle = worst_cycle.max((a - b).abs());
        }
    }
    verdict(
        worst_ratio < 1.0 && worst_cycle < 1e-10,
        format!("reconstruction at {worst_ratio:.2e} of bound, cycle spectra max error {worst_cycle:.2e}"),
    )
}

fn c4_filter_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=40);
        let p = rng.gen_range(0.05..0.5);
        let g = random_graph(&mut rng, n, p);
        let degree = rng.gen_range(0..=4);
        let coeffs =
            FilterCoefficients::new((0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .unwrap();
        let x = rand_matrix(&mut rng, n, 3);
        let a = spectral_filter_apply(&g, &coeffs, &x).unwrap();
        let b = polynomial_filter_apply(&g, &coeffs, &x).unwrap();
        worst = worst.max(a.sub(&b).unwrap().frobenius_norm());
    }
    verdict(
        worst < 1e-8,
        format!("200 cases, max Frobenius gap {worst:.2e}"),
    )
}

fn c5_wasserstein_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sample = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=30);
        SpectrumDistribution::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
    };
    let (mut asym, mut tri, mut shift) = (0, 0.0_f64, 0.0_f64);
    for _ in 0..500 {
        let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        let ab = wasserstein1(&a, &b).unwrap();
        asym += usize::from(ab != wasserstein1(&b, &a).unwrap());
        let via = wasserstein1(&a, &c).unwrap() + wasserstein1(&c, &b).unwrap();
        tri = tri.max(ab - via);
        let t = rng.gen_range(-1.0..1.0);
        let moved = wasserstein1(&a.shifted(t), &b.shifted(t)).unwrap();
        shift = shift.max((moved - ab).abs());
    }
    let d = |x: Vec<f64>, y: Vec<f64>| {
        wasserstein1(&SpectrumDistribution::new(x), &SpectrumDistribution::new(y)).unwrap()
    };
    let closed = d(vec![0.0], vec![1.0]) == 1.0 && d(vec![0.0, 0.0], vec![0.0, 1.0]) == 0.5;
    verdict(
        asym == 0 && tri <= 1e-12 && shift <= 1e-12 && closed,
        format!("500 triples: {asym} asymmetric, triangle excess {tri:.1e}, shift error {shift:.1e}, closed forms {closed}"),
    )
}

/// A path backbone carrying planted cycles whose length grows with the graph;
/// the number of cycles varies within each size band.
fn shift_corpus(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs = (0..400)
        .map(|_| {
            let n = rng.gen_range(10..=120usize);
            let len = 3 + n / 5 + rng.gen_range(0..=1);
            let target = ((0.2 * n as f64 / len as f64).round() as usize).max(1);
            let cycles = rng.gen_range(target.div_ceil(2)..=target + target / 2);
            let mut edges = Vec::new();
            let mut next = 0;
            for k in 0..cycles {
                if next + len > n {
                    break;
                }
                let s = next;
                edges.extend((0..len).map(|j| (s + j, s + (j + 1) % len)));
                if k > 0 {
                    edges.push((rng.gen_range(0..s), s));
                }
                next += len;
            }
            edges.extend((next.max(1)..n).map(|w| (w - 1, w)));
            Graph::from_edge_list(n, &edges)
                .unwrap()
                .with_label(Some(0))
        })
        .collect();
    Dataset::new("shift", graphs, 1).unwrap()
}

fn summary(d: &Dataset, source: SpectrumSource) -> ShiftSummary {
    similar_vs_different(&spectrum_distance_matrix(d, source).unwrap(), 20).unwrap()
}

fn replace(d: &Dataset, indices: &[usize], with: Vec<Graph>) -> Dataset {
    let mut graphs = d.graphs.clone();
    for (&i, g) in indices.iter().zip(with) {
        graphs[i] = g;
    }
    Dataset::new(d.name.clone(), graphs, d.class_count).unwrap()
}

struct ShiftRun {
    base: f64,
    broken: f64,
    aligned: f64,
    random: f64,
    n: usize,
    r: usize,
}

fn shift_run(seed: u64) -> ShiftRun {
    let d = shift_corpus(seed);
    let base = summary(&d, SpectrumSource::Eigenvalues).relative_difference;
    let broken: Vec<Graph> = d.graphs.iter().map(|g| break_cycles(g).unwrap()).collect();
    let all: Vec<usize> = (0..d.len()).collect();
    let broken =
        summary(&replace(&d, &all, broken), SpectrumSource::Eigenvalues).relative_difference;

    let mut sizes = d.sizes();
    sizes.sort_unstable();
    let median = sizes[d.len() / 2];
    let small: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| d.graphs[i].node_count() < median)
        .collect();
    let large: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&i| d.graphs[i].node_count() >= median)
        .collect();
    let small_set = d.subset(&small);
    let target = cycle_length_stats(&d.subset(&large)).unwrap();
    let current = cycle_length_stats(&small_set).unwrap();
    let n = ((target.mean - current.mean).round() as usize).max(1);
    let mut best: Option<(f64, usize, Dataset)> = None;
    for r in 1..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11);
        let aligned = align_cycle_lengths(&small_set, r, n, &mut rng).unwrap();
        let s = cycle_length_stats(&aligned).unwrap();
        let gap = (s.mean - target.mean).abs() + (s.std - target.std).abs();
        if best.as_ref().is_none_or(|b| gap < b.0) {
            best = Some((gap, r, aligned));
        }
    }
    let (_, r, aligned_small) = best.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4a4d);
    let random_small: Vec<Graph> = small
        .iter()
        .zip(&aligned_small.graphs)
        .map(|(&i, a)| {
            let g = &d.graphs[i];
            add_random_nodes(g, a.node_count() - g.node_count(), &mut rng).unwrap()
        })
        .collect();
    let aligned = summary(
        &replace(&d, &small, aligned_small.graphs),
        SpectrumSource::Eigenvalues,
    )
    .relative_difference;
    let random = summary(
        &replace(&d, &small, random_small),
        SpectrumSource::Eigenvalues,
    )
    .relative_difference;
    ShiftRun {
        base,
        broken,
        aligned,
        random,
        n,
        r,
    }
}

fn c6_shift_direction() -> Outcome {
    let start = Instant::now();
    let runs: Vec<ShiftRun> = (0..5).map(shift_run).collect();
    let t = start.elapsed();
    let agree = runs
        .iter()
        .filter(|s| {
            s.base > 0.0
                && s.broken > s.base
                && s.aligned < s.base
                && s.base - s.random < s.base - s.aligned
        })
        .count();
    let detail: Vec<String> = runs
        .iter()
        .map(|s| {
            format!(
                "{:.3}/brk {:+.3}/al(n={},R={}) {:+.3}/rnd {:+.3}",
                s.base,
                s.broken - s.base,
                s.n,
                s.r,
                s.aligned - s.base,
                s.random - s.base
            )
        })
        .collect();
    verdict(
        agree == 5 && t < Duration::from_secs(120),
        format!(
            "{agree}/5 seeds agree, {:.1}s; {}",
            t.as_secs_f64(),
            detail.join("; ")
        ),
    )
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("SPECSHIFT_DATA_DIR").map(PathBuf::from)
}

fn load_named(name: &str) -> Option<Dataset> {
    let dir = data_dir()?;
    let tu = dir.join(name);
    if tu.join(format!("{name}_A.txt")).exists() {
        return Some(parse_tudataset(&tu, name).unwrap());
    }
    let jsonl = dir.join(format!("{name}.jsonl"));
    jsonl.exists().then(|| parse_jsonl(&jsonl).unwrap())
}

fn c7_nci1() -> Outcome {
    let Some(d) = load_named("NCI1") else {
        return Outcome::Skip("NCI1 not found under SPECSHIFT_DATA_DIR".into());
    };
    let eig = summary(&d, SpectrumSource::Eigenvalues).relative_difference * 100.0;
    let deg = summary(&d, SpectrumSource::Degrees).relative_difference * 100.0;
    verdict(
        (eig - 164.0).abs() <= 20.0 && deg < 20.0,
        format!(
            "{} graphs: eigenvalue relative {eig:.1}%, degree relative {deg:.1}%",
            d.len()
        ),
    )
}

fn c8_bbbp_splits() -> Outcome {
    let Some(d) = load_named("BBBP") else {
        return Outcome::Skip("BBBP not found under SPECSHIFT_DATA_DIR".into());
    };
    let s = match make_size_splits(&d, SplitRatios::default(), 0) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(format!("split failed: {e}")),
    };
    let labels = d.labels();
    let got: Vec<Vec<usize>> = s
        .parts()
        .iter()
        .map(|p| SplitBundle::class_counts(p, &labels, d.class_count))
        .collect();
    let want = vec![vec![96, 617], vec![22, 133], vec![20, 132], vec![20, 132]];
    verdict(
        got == want,
        format!("train/val/small/large class counts {got:?}"),
    )
}

/// Cycles glued at single vertices plus pendant trees, so the cycle basis is
/// the same under any node numbering.
fn random_cactus(rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    let mut n = 1;
    for _ in 0..rng.gen_range(1..4) {
        let anchor = rng.gen_range(0..n);
        let mut prev = anchor;
        for _ in 1..rng.gen_range(3..8) {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, anchor));
    }
    for _ in 0..rng.gen_range(0..6) {
        edges.push((rng.gen_range(0..n), n));
        n += 1;
    }
    Graph::from_edge_list(n, &edges).unwrap()
}

fn c9_learning_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let config = |readout, ssl_lambda| ModelConfig {
        readout,
        ssl_lambda,
        hidden: 6,
        ..ModelConfig::default()
    };

    let full = config(Readout::Sia, 0.5);
    let g = random_cactus(&mut rng);
    let n = g.node_count();
    let g = g
        .with_features(Some(rand_matrix(&mut rng, n, 3)))
        .unwrap()
        .with_label(Some(1));
    let mut model = Model::init(full.clone(), 3, 2, &mut rng).unwrap();
    for p in &mut model.params {
        p.as_mut_slice()
            .iter_mut()
            .for_each(|v| *v += 0.1 * rng.gen_range(-1.0..1.0));
    }
    let pg = PreparedGraph::new(&g, &full).unwrap();
    let grad_err = gradcheck(&model.params, 1e-5, |ps| {
        Model::from_params(full.clone(), ps.to_vec())?.graph_loss_and_grads(&pg)
    })
    .unwrap();

    let (sia, max) = (config(Readout::Sia, 0.0), config(Readout::GlobalMax, 0.0));
    let sia_model = Model::init(sia.clone(), 3, 2, &mut rng).unwrap();
    let max_model = Model::from_params(
        max.clone(),
        sia_model.params[..3]
            .iter()
            .chain(&sia_model.params[4..6])
            .cloned()
            .collect(),
    );
    let mut bitwise = max_model.is_ok();
    let mut perm_gap = 0.0_f64;
    for _ in 0..50 {
        let g = random_cactus(&mut rng);
        let n = g.node_count();
        let g = g.with_features(Some(rand_matrix(&mut rng, n, 3))).unwrap();
        if let Ok(m) = &max_model {
            let a = sia_model
                .logits(&PreparedGraph::new(&g, &sia).unwrap())
                .unwrap();
            let b = m.logits(&PreparedGraph::new(&g, &max).unwrap()).unwrap();
            bitwise &= a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits());
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let h = g.permuted(&perm).unwrap();
        let a = model
            .logits(&PreparedGraph::new(&g, &full).unwrap())
            .unwrap();
        let b = model
            .logits(&PreparedGraph::new(&h, &full).unwrap())
            .unwrap();
        perm_gap = perm_gap.max(
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
    }
    verdict(
        grad_err < 1e-4 && bitwise && perm_gap < 1e-10,
        format!("gradcheck {grad_err:.2e}, zero-attention readout bitwise {bitwise}, permutation gap {perm_gap:.1e}"),
    )
}

/// Unicyclic-or-more graphs labelled by whether their cycles are long; half
/// the graphs have 12..=20 nodes, half 40..=60.
fn cycle_length_task(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs = (0..400)
        .map(|i| {
            let n = if i % 2 == 0 {
                rng.gen_range(12..=20)
            } else {
                rng.gen_range(40..=60)
            };
            let long = rng.gen_bool(0.5);
            let cycles = if n > 30 { rng.gen_range(1..=3) } else { 1 };
            let mut edges = Vec::new();
            let mut next = 0;
            for k in 0..cycles {
                let len = if long {
                    rng.gen_range(7..=9)
                } else {
                    rng.gen_range(3..=5)
                };
                let s = next;
                edges.extend((0..len).map(|j| (s + j, s + (j + 1) % len)));
                if k > 0 {
                    edges.push((rng.gen_range(0..s), s));
                }
                next += len;
            }
            edges.extend((next..n).map(|w| (rng.gen_range(0..w), w)));
            Graph::from_edge_list(n, &edges)
                .unwrap()
                .with_label(Some(usize::from(long)))
        })
        .collect();
    Dataset::new("cycle-length", graphs, 2).unwrap()
}

fn c10_sia_efficacy() -> Outcome {
    let start = Instant::now();
    let d = cycle_length_task(10);
    let splits = make_size_splits(&d, SplitRatios::default(), 10).unwrap();
    let mean_size = |idx: &[usize]| {
        idx.iter().map(|&i| d.graphs[i].node_count()).sum::<usize>() as f64 / idx.len() as f64
    };
    let ratio = mean_size(&splits.large_test) / mean_size(&splits.train);
    let mean_f1 = |readout| {
        let config = ModelConfig {
            backbone: Backbone::Gcn,
            readout,
            hidden: 16,
            learning_rate: 1e-2,
            patience: 30,
            max_epochs: 50,
            ..ModelConfig::default()
        };
        (0..5)
            .map(|seed| {
                train(&config, &d, &splits, &UpsampleSpec::new(), seed)
                    .unwrap()
                    .report
                    .f1
                    .large_test
                    .f1_class1
            })
            .sum::<f64>()
            / 5.0
    };
    let (gcn, sia) = (mean_f1(Readout::GlobalMax), mean_f1(Readout::Sia));
    let t = start.elapsed();
    verdict(
        sia > gcn && (2.0..=4.0).contains(&ratio) && t < Duration::from_secs(300),
        format!(
            "large_test F1 GCN {gcn:.3}, GCN+SIA {sia:.3}; size ratio {ratio:.2}, {:.1}s",
            t.as_secs_f64()
        ),
    )
}

fn partition(ids: &[usize]) -> Vec<usize> {
    let mut first = std::collections::HashMap::new();
    ids.iter()
        .map(|&x| {
            let k = first.len();
            *first.entry(x).or_insert(k)
        })
        .collect()
}

fn c11_dpattern_lemma() -> Outcome {
    let lemma = verify_cycle_lemma(&(3..=12).collect::<Vec<_>>(), 5)
        .unwrap()
        .holds;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..30);
        let p = rng.gen_range(0.05..0.4);
        let g = random_graph(&mut rng, n, p);
        let colors: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let depth = n + 1;
        let t = d_patterns(&g, &colors, depth, &mut PatternInterner::new()).unwrap();
        let mut stable = false;
        let mut ok = true;
        for k in 1..=depth {
            let refines = (0..n).all(|u| {
                (0..n).all(|v| {
                    t.depth(k)[u] != t.depth(k)[v] || t.depth(k - 1)[u] == t.depth(k - 1)[v]
                })
            });
            let same = partition(t.depth(k)) == partition(t.depth(k - 1));
            ok &= refines && (!stable || same);
            stable |= same;
        }
        bad += usize::from(!(ok && stable));
    }
    verdict(
        lemma && bad == 0,
        format!("cycle lemma 3..=12 depth 5 {lemma}, {bad}/200 random graphs violate refinement"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "cycle basis", c1_cycle_basis),
        (2, "cycle breaking", c2_cycle_breaking),
        (3, "eigensolver", c3_eigensolver),
        (4, "spectral filter identity", c4_filter_identity),
        (5, "W1 metric axioms", c5_wasserstein_axioms),
        (6, "shift direction under surgery", c6_shift_direction),
        (7, "NCI1 shift", c7_nci1),
        (8, "BBBP split counts", c8_bbbp_splits),
        (9, "learning sanity", c9_learning_sanity),
        (10, "SIA efficacy", c10_sia_efficacy),
        (11, "d-pattern lemma", c11_dpattern_lemma),
    ];
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let outcome =
            std::panic::catch_unwind(run).unwrap_or_else(|_| Outcome::Fail("panicked".into()));
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} [{id:>2}] {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
