//! Propagation-matrix spectra, exact 1-D Wasserstein distances, and the
//! similar-size versus different-size shift statistic.
//!
//! The propagation matrix is `T = (D + I)^{-1/2} (A + I) (D + I)^{-1/2}`.
//! Its eigenvalues lie in `(-1, 1]`, with exactly one eigenvalue equal to 1
//! per connected component, so spectra of graphs of any size live on the
//! same support and can be compared as empirical distributions.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_QL_ITERATIONS: usize = 50;

/// Dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Shape {
                op: "symmetric",
                got: m.shape(),
                want: (m.rows(), m.rows()),
            });
        }
        for i in 0..m.rows() {
            for j in 0..i {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// `T_ij = (A_ij + δ_ij) / sqrt((d_i + 1)(d_j + 1))`.
pub fn normalized_adjacency(g: &Graph) -> Result<SymMatrix> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let shifted: Vec<f64> = g.degree_vector().iter().map(|&d| (d + 1) as f64).collect();
    let mut t = Matrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = 1.0 / shifted[i];
        for &j in g.neighbors(i) {
            t[(i, j)] = 1.0 / (shifted[i] * shifted[j]).sqrt();
        }
    }
    Ok(SymMatrix(t))
}

/// Eigen-decomposition with eigenvalues ascending and eigenvectors stored as
/// the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigen {
    /// `U diag(values) Uᵀ`
    pub fn reconstruct(&self) -> Matrix {
        self.apply_spectral(|l| l)
    }

    /// `U diag(f(values)) Uᵀ`
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled
            .matmul(&self.vectors.transpose())
            .expect("square factors")
    }
}

/// Householder tridiagonalization followed by implicit-shift QL, after the
/// EISPACK `tred2`/`tql2` pair.
pub fn symmetric_eigen(m: &SymMatrix) -> Result<Eigen> {
    let n = m.order();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let mut v = m.as_matrix().clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, k)];
        }
    }
    Ok(Eigen { values, vectors })
}

pub fn symmetric_eigenvalues(m: &SymMatrix) -> Result<SpectrumDistribution> {
    Ok(SpectrumDistribution {
        values: symmetric_eigen(m)?.values,
    })
}

fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate the Householder reflections
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tridiagonal_ql(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        // find a negligible off-diagonal element
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence);
    }
    Ok(())
}

/// Sorted multiset of reals viewed as a uniform empirical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDistribution {
    values: Vec<f64>,
}

impl SpectrumDistribution {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

/// Exact W1 between two empirical measures: the integral of `|F_a - F_b|`
/// over the merged support, with both CDFs piecewise constant.
pub fn wasserstein1(a: &SpectrumDistribution, b: &SpectrumDistribution) -> Result<f64> {
    let (x, y) = (a.values(), b.values());
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = x[0].min(y[0]);
    let mut total = 0.0;
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        let gap = (i as f64 / nx - j as f64 / ny).abs();
        total += gap * (next - prev);
        while i < x.len() && x[i] == next {
            i += 1;
        }
        while j < y.len() && y[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// Sorted degree multiset.
pub fn degree_distribution(g: &Graph) -> SpectrumDistribution {
    SpectrumDistribution::new(g.degree_vector().into_iter().map(|d| d as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Eigenvalues,
    Degrees,
}

impl std::str::FromStr for SpectrumSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigenvalues" => Ok(Self::Eigenvalues),
            "degrees" => Ok(Self::Degrees),
            other => Err(Error::InvalidArgument(format!(
                "unknown spectrum source {other:?} (expected eigenvalues or degrees)"
            ))),
        }
    }
}

pub fn graph_spectrum(g: &Graph, source: SpectrumSource) -> Result<SpectrumDistribution> {
    match source {
        SpectrumSource::Eigenvalues => symmetric_eigenvalues(&normalized_adjacency(g)?),
        SpectrumSource::Degrees => Ok(degree_distribution(g)),
    }
}

/// Pairwise W1 distances with rows and columns ordered by ascending graph size.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    /// Original dataset index at each sorted position.
    pub order: Vec<usize>,
    /// Node count at each sorted position.
    pub sizes: Vec<usize>,
    pub values: Matrix,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn from_parts(order: Vec<usize>, sizes: Vec<usize>, values: Matrix) -> Result<Self> {
        let n = order.len();
        if sizes.len() != n || values.shape() != (n, n) {
            return Err(Error::MalformedMatrix(format!(
                "{n} ids, {} sizes, {:?} values",
                sizes.len(),
                values.shape()
            )));
        }
        Ok(Self {
            order,
            sizes,
            values,
        })
    }

    /// CSV: header of graph ids, then one row of 17-significant-digit values
    /// per graph.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let header: Vec<String> = self.order.iter().map(usize::to_string).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = self
                .values
                .row(i)
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Sidecar with `id,size` per line in matrix order.
    pub fn write_sizes(&self, path: &Path) -> Result<()> {
        let mut out = String::from("id,size\n");
        for (id, n) in self.order.iter().zip(&self.sizes) {
            out.push_str(&format!("{id},{n}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(matrix_path: &Path, sizes_path: &Path) -> Result<Self> {
        let bad = |msg: String| Error::MalformedMatrix(msg);
        let text = fs::read_to_string(matrix_path).map_err(|e| Error::io(matrix_path, e))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let order: Vec<usize> = header
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| bad(format!("header id {s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let n = order.len();
        let mut data = Vec::with_capacity(n * n);
        for (r, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|e| bad(format!("row {r}: {s:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(bad(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        let values = Matrix::from_vec(n, n, data).map_err(|_| bad("row count".into()))?;

        let text = fs::read_to_string(sizes_path).map_err(|e| Error::io(sizes_path, e))?;
        let mut sizes = Vec::with_capacity(n);
        for (k, line) in text
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .enumerate()
        {
            let (id, size) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("sizes line {}: expected id,size", k + 2)))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|e| bad(format!("sizes id: {e}")))?;
            if order.get(k) != Some(&id) {
                return Err(bad(format!(
                    "sizes file id {id} does not match matrix header"
                )));
            }
            sizes.push(
                size.trim()
                    .parse()
                    .map_err(|e| bad(format!("sizes value: {e}")))?,
            );
        }
        Self::from_parts(order, sizes, values)
    }

    /// Binary PGM (P5) heatmap with min-max normalization to 0..=255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let n = self.len();
        let vals = self.values.as_slice();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
        bytes.extend(vals.iter().map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            }
        }));
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))
    }
}

/// Indices sorted by ascending node count, ties by index.
pub fn size_order(d: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by_key(|&i| (d.graphs[i].node_count(), i));
    order
}

/// Computes the W1 matrix over every pair of graphs. Work is spread over
/// the rayon pool; the result does not depend on the schedule.
pub fn spectrum_distance_matrix(d: &Dataset, source: SpectrumSource) -> Result<DistanceMatrix> {
    if d.is_empty() {
        return Err(Error::InvalidDataset("dataset is empty".into()));
    }
    let order = size_order(d);
    let spectra: Vec<SpectrumDistribution> = order
        .par_iter()
        .map(|&i| graph_spectrum(&d.graphs[i], source).map_err(|e| Error::at_graph(i, e)))
        .collect::<Result<_>>()?;
    let n = order.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| wasserstein1(&spectra[i], &spectra[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::at_graph(order[0], e))?;
    let mut values = Matrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &w) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[(i, j)] = w;
            values[(j, i)] = w;
        }
    }
    let sizes = order.iter().map(|&i| d.graphs[i].node_count()).collect();
    DistanceMatrix::from_parts(order, sizes, values)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShiftSummary {
    pub avg_similar: f64,
    pub avg_different: f64,
    pub relative_difference: f64,
}

impl ShiftSummary {
    pub fn from_averages(avg_similar: f64, avg_different: f64) -> Result<Self> {
        let relative_difference = if avg_similar == 0.0 {
            if avg_different == 0.0 {
                0.0
            } else {
                return Err(Error::DegenerateSummary(avg_different));
            }
        } else {
            (avg_different - avg_similar) / avg_similar
        };
        Ok(Self {
            avg_similar,
            avg_different,
            relative_difference,
        })
    }
}

impl fmt::Display for ShiftSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "similar={:.6e} different={:.6e} relative={:.2}%",
            self.avg_similar,
            self.avg_different,
            100.0 * self.relative_difference
        )
    }
}

/// For every graph, its `k` nearest graphs by node-count difference (ties by
/// smaller original index, self excluded) are "similar"; all others are
/// "different". Averages run over every (graph, partner) pair.
pub fn similar_vs_different(m: &DistanceMatrix, k: usize) -> Result<ShiftSummary> {
    let n = m.len();
    if n <= k + 1 {
        return Err(Error::TooFewForSummary { graphs: n, k });
    }
    let key = |p: usize, q: usize| (m.sizes[p].abs_diff(m.sizes[q]), m.order[q]);
    let row_sums: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
            if k > 0 {
                others.select_nth_unstable_by(k - 1, |&a, &b| key(p, a).cmp(&key(p, b)));
            }
            let mut similar: Vec<usize> = others[..k].to_vec();
            similar.sort_unstable();
            let row = m.values.row(p);
            let sim: f64 = similar.iter().map(|&q| row[q]).sum();
            let all: f64 = (0..n).filter(|&q| q != p).map(|q| row[q]).sum();
            (sim, all - sim)
        })
        .collect();
    let sim_total: f64 = row_sums.iter().map(|r| r.0).sum();
    let diff_total: f64 = row_sums.iter().map(|r| r.1).sum();
    let avg_similar = if k == 0 {
        0.0
    } else {
        sim_total / (n * k) as f64
    };
    let avg_different = diff_total / (n * (n - 1 - k)) as f64;
    ShiftSummary::from_averages(avg_similar, avg_different)
}

/// Polynomial filter coefficients `c_0..c_k`, `k <= 8`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoefficients(Vec<f64>);

impl FilterCoefficients {
    pub const MAX_DEGREE: usize = 8;

    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > Self::MAX_DEGREE + 1 {
            return Err(Error::InvalidArgument(format!(
                "filter needs 1..={} coefficients, got {}",
                Self::MAX_DEGREE + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "filter coefficients must be finite".into(),
            ));
        }
        Ok(Self(coeffs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// `U f(Λ) Uᵀ X` through a full eigendecomposition of `T`.
pub fn spectral_filter_apply(g: &Graph, coeffs: &FilterCoefficients, x: &Matrix) -> Result<Matrix> {
    check_signal_rows(g, x)?;
    let eig = symmetric_eigen(&normalized_adjacency(g)?)?;
    eig.apply_spectral(|l| coeffs.eval(l)).matmul(x)
}

/// `Σ c_i Tⁱ X` by Horner's rule, never forming an eigenbasis.
pub fn polynomial_filter_apply(
    g: &Graph,
    coeffs: &FilterCoefficients,
    x: &Matrix,
) -> Result<Matrix> {
    check_signal_rows(g, x)?;
    let t = normalized_adjacency(g)?.into_matrix();
    let c = coeffs.as_slice();
    let mut acc = x.scale(c[c.len() - 1]);
    for &ci in c.iter().rev().skip(1) {
        acc = t.matmul(&acc)?;
        acc.axpy(ci, x)?;
    }
    Ok(acc)
}

fn check_signal_rows(g: &Graph, x: &Matrix) -> Result<()> {
    if x.rows() != g.node_count() {
        return Err(Error::Shape {
            op: "spectral_filter",
            got: x.shape(),
            want: (g.node_count(), x.cols()),
        });
    }
    Ok(())
}
