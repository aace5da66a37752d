//! Dense f64 reverse-mode differentiation on a per-pass operation tape,
//! Adam, Glorot initialization, finite-difference gradient checks, and a
//! flat binary parameter format.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddBias(Var, Var),
    Relu(Var),
    Scale(Var, f64),
    ScaledRowSoftmax(Var, f64),
    GlobalMax(Var, Vec<usize>),
    GlobalMean(Var),
    ScaleRows(Var, Var),
    CrossEntropy(Var, Vec<usize>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Matrix,
    op: Op,
    needs_grad: bool,
}

/// Records a forward pass so that [`Tape::backward`] can produce exact
/// gradients for every parameter leaf.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients indexed by [`Var`]; `None` for values that do not depend on
/// any parameter.
#[derive(Debug)]
pub struct Gradients(Vec<Option<Matrix>>);

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.0[v.0].as_ref()
    }

    /// Gradient of `v`, or zeros of the given shape when `v` is unreachable.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Scalar value of a 1×1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v).as_slice()[0]
    }

    pub fn constant(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Leaf, false)
    }

    pub fn param(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Leaf, true)
    }

    fn push(&mut self, value: Matrix, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn record(&mut self, name: &'static str, value: Matrix, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NumericOverflow(name));
        }
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        Ok(self.push(value, op, needs_grad))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).matmul(self.value(b))?;
        self.record("matmul", out, Op::MatMul(a, b), &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.value(a).add(self.value(b))?;
        self.record("add", out, Op::Add(a, b), &[a, b])
    }

    /// Adds a 1×C bias row to every row of an R×C input.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        if bv.shape() != (1, xv.cols()) {
            return Err(Error::Shape {
                op: "add_bias",
                got: bv.shape(),
                want: (1, xv.cols()),
            });
        }
        let mut out = xv.clone();
        for r in 0..out.rows() {
            for (o, &bb) in out.row_mut(r).iter_mut().zip(bv.row(0)) {
                *o += bb;
            }
        }
        self.record("add_bias", out, Op::AddBias(x, b), &[x, b])
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        let mut out = self.value(x).clone();
        for v in out.as_mut_slice() {
            *v = v.max(0.0);
        }
        self.record("relu", out, Op::Relu(x), &[x])
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        let out = self.value(x).scale(c);
        self.record("scale", out, Op::Scale(x, c), &[x])
    }

    pub fn row_softmax(&mut self, x: Var) -> Result<Var> {
        self.scaled_row_softmax(x, 1.0)
    }

    /// `scale · softmax(row)` for each row, computed as `e_i · (scale / Σe)`
    /// after subtracting the row max, so a constant row maps to exactly
    /// `scale / len` per entry.
    pub fn scaled_row_softmax(&mut self, x: Var, scale: f64) -> Result<Var> {
        let xv = self.value(x);
        let mut out = xv.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            let factor = scale / sum;
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        self.record("row_softmax", out, Op::ScaledRowSoftmax(x, scale), &[x])
    }

    /// Column-wise max over rows, giving 1×C. Ties resolve to the lowest row.
    pub fn global_max_rows(&mut self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        if xv.rows() == 0 {
            return Err(Error::EmptyReadout);
        }
        let mut arg = vec![0; xv.cols()];
        let mut out = Matrix::from_vec(1, xv.cols(), xv.row(0).to_vec())?;
        for r in 1..xv.rows() {
            for (c, &v) in xv.row(r).iter().enumerate() {
                if v > out[(0, c)] {
                    out[(0, c)] = v;
                    arg[c] = r;
                }
            }
        }
        self.record("global_max_rows", out, Op::GlobalMax(x, arg), &[x])
    }

    pub fn global_mean_rows(&mut self, x: Var) -> Result<Var> {
        let xv = self.value(x);
        if xv.rows() == 0 {
            return Err(Error::EmptyReadout);
        }
        let mut out = Matrix::zeros(1, xv.cols());
        for r in 0..xv.rows() {
            for (o, &v) in out.row_mut(0).iter_mut().zip(xv.row(r)) {
                *o += v;
            }
        }
        let out = out.scale(1.0 / xv.rows() as f64);
        self.record("global_mean_rows", out, Op::GlobalMean(x), &[x])
    }

    /// Multiplies row `i` of `x` by `k_i`; `k` is 1×N or N×1.
    pub fn scale_rows(&mut self, x: Var, k: Var) -> Result<Var> {
        let (xv, kv) = (self.value(x), self.value(k));
        let n = xv.rows();
        if kv.as_slice().len() != n || (kv.rows() != 1 && kv.cols() != 1) {
            return Err(Error::Shape {
                op: "scale_rows",
                got: kv.shape(),
                want: (1, n),
            });
        }
        let mut out = xv.clone();
        for (r, &kr) in kv.as_slice().iter().enumerate() {
            for v in out.row_mut(r) {
                *v *= kr;
            }
        }
        self.record("scale_rows", out, Op::ScaleRows(x, k), &[x, k])
    }

    /// Mean over rows of `logsumexp(z) - z[label]`; returns 1×1.
    pub fn cross_entropy_from_logits(&mut self, logits: Var, labels: &[usize]) -> Result<Var> {
        let z = self.value(logits);
        if labels.len() != z.rows() || z.rows() == 0 {
            return Err(Error::Shape {
                op: "cross_entropy",
                got: (labels.len(), 1),
                want: (z.rows(), 1),
            });
        }
        let mut total = 0.0;
        for (r, &y) in labels.iter().enumerate() {
            let row = z.row(r);
            if y >= row.len() {
                return Err(Error::Shape {
                    op: "cross_entropy",
                    got: (r, y),
                    want: (r, row.len()),
                });
            }
            total += log_sum_exp(row) - row[y];
        }
        let out = Matrix::filled(1, 1, total / labels.len() as f64);
        self.record(
            "cross_entropy",
            out,
            Op::CrossEntropy(logits, labels.to_vec()),
            &[logits],
        )
    }

    /// Reverse pass from a 1×1 node.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(Error::Shape {
                op: "backward",
                got: lv.shape(),
                want: (1, 1),
            });
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Matrix::filled(1, 1, 1.0));
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            if node.needs_grad {
                self.propagate(node, &g, &mut grads)?;
            }
            grads[idx] = Some(g);
        }
        for (node, slot) in self.nodes.iter().zip(grads.iter_mut()) {
            if !node.needs_grad {
                *slot = None;
            }
        }
        Ok(Gradients(grads))
    }

    fn propagate(&self, node: &Node, g: &Matrix, grads: &mut [Option<Matrix>]) -> Result<()> {
        let mut send = |v: Var, contrib: Matrix| -> Result<()> {
            if !self.nodes[v.0].needs_grad {
                return Ok(());
            }
            match &mut grads[v.0] {
                Some(acc) => acc.axpy(1.0, &contrib)?,
                slot @ None => *slot = Some(contrib),
            }
            Ok(())
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                if self.nodes[a.0].needs_grad {
                    send(*a, g.matmul(&bv.transpose())?)?;
                }
                if self.nodes[b.0].needs_grad {
                    send(*b, av.transpose().matmul(g)?)?;
                }
            }
            Op::Add(a, b) => {
                send(*a, g.clone())?;
                send(*b, g.clone())?;
            }
            Op::AddBias(x, b) => {
                send(*x, g.clone())?;
                let mut db = Matrix::zeros(1, g.cols());
                for r in 0..g.rows() {
                    for (o, &v) in db.row_mut(0).iter_mut().zip(g.row(r)) {
                        *o += v;
                    }
                }
                send(*b, db)?;
            }
            Op::Relu(x) => {
                let mut dx = g.clone();
                for (d, &v) in dx.as_mut_slice().iter_mut().zip(self.value(*x).as_slice()) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
                send(*x, dx)?;
            }
            Op::Scale(x, c) => send(*x, g.scale(*c))?,
            Op::ScaledRowSoftmax(x, scale) => {
                let y = &node.value;
                let mut dx = Matrix::zeros(y.rows(), y.cols());
                for r in 0..y.rows() {
                    let (yr, gr) = (y.row(r), g.row(r));
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum::<f64>() / scale;
                    for (d, (&yi, &gi)) in dx.row_mut(r).iter_mut().zip(yr.iter().zip(gr)) {
                        *d = yi * (gi - dot);
                    }
                }
                send(*x, dx)?;
            }
            Op::GlobalMax(x, arg) => {
                let xv = self.value(*x);
                let mut dx = Matrix::zeros(xv.rows(), xv.cols());
                for (c, &r) in arg.iter().enumerate() {
                    dx[(r, c)] = g[(0, c)];
                }
                send(*x, dx)?;
            }
            Op::GlobalMean(x) => {
                let xv = self.value(*x);
                let inv = 1.0 / xv.rows() as f64;
                let mut dx = Matrix::zeros(xv.rows(), xv.cols());
                for r in 0..xv.rows() {
                    for (d, &gv) in dx.row_mut(r).iter_mut().zip(g.row(0)) {
                        *d = gv * inv;
                    }
                }
                send(*x, dx)?;
            }
            Op::ScaleRows(x, k) => {
                let (xv, kv) = (self.value(*x), self.value(*k));
                if self.nodes[x.0].needs_grad {
                    let mut dx = g.clone();
                    for (r, &kr) in kv.as_slice().iter().enumerate() {
                        for v in dx.row_mut(r) {
                            *v *= kr;
                        }
                    }
                    send(*x, dx)?;
                }
                if self.nodes[k.0].needs_grad {
                    let mut dk = Matrix::zeros(kv.rows(), kv.cols());
                    for (r, d) in dk.as_mut_slice().iter_mut().enumerate() {
                        *d = xv.row(r).iter().zip(g.row(r)).map(|(a, b)| a * b).sum();
                    }
                    send(*k, dk)?;
                }
            }
            Op::CrossEntropy(z, labels) => {
                let zv = self.value(*z);
                let upstream = g[(0, 0)] / labels.len() as f64;
                let mut dz = Matrix::zeros(zv.rows(), zv.cols());
                for (r, &y) in labels.iter().enumerate() {
                    let row = zv.row(r);
                    let lse = log_sum_exp(row);
                    for (c, d) in dz.row_mut(r).iter_mut().enumerate() {
                        let p = (row[c] - lse).exp();
                        *d = upstream * (p - if c == y { 1.0 } else { 0.0 });
                    }
                }
                send(*z, dz)?;
            }
        }
        Ok(())
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl AdamState {
    pub fn new(params: &[Matrix], lr: f64) -> Self {
        let zeros = |p: &Matrix| Matrix::zeros(p.rows(), p.cols());
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: params.iter().map(zeros).collect(),
            v: params.iter().map(zeros).collect(),
        }
    }

    pub fn step(&mut self, params: &mut [Matrix], grads: &[Matrix]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::Shape {
                op: "adam_step",
                got: (grads.len(), params.len()),
                want: (self.m.len(), self.m.len()),
            });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::Shape {
                    op: "adam_step",
                    got: g.shape(),
                    want: p.shape(),
                });
            }
            let it = p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice()));
            for ((p, &g), (m, v)) in it {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Uniform on `[-b, b]` with `b = sqrt(6 / (rows + cols))`.
pub fn glorot_init<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("shape matches data")
}

/// Compares analytic gradients from `f` with central differences of step
/// `h`. `f` returns `(loss, grads)` with one gradient per parameter. The
/// result is `max |a - n| / max(1, |a|, |n|)` over all coordinates.
pub fn gradcheck<F>(params: &[Matrix], h: f64, mut f: F) -> Result<f64>
where
    F: FnMut(&[Matrix]) -> Result<(f64, Vec<Matrix>)>,
{
    let (_, analytic) = f(params)?;
    let mut work = params.to_vec();
    let mut worst = 0.0_f64;
    for p in 0..params.len() {
        for k in 0..params[p].as_slice().len() {
            let orig = work[p].as_slice()[k];
            work[p].as_mut_slice()[k] = orig + h;
            let (plus, _) = f(&work)?;
            work[p].as_mut_slice()[k] = orig - h;
            let (minus, _) = f(&work)?;
            work[p].as_mut_slice()[k] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[p].as_slice()[k];
            let err = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

const PARAM_MAGIC: &[u8; 8] = b"SSPARAM1";

/// `magic(8) | count u32 | count × (rows u32, cols u32) | f64 LE data`.
pub fn encode_params(params: &[Matrix]) -> Vec<u8> {
    let mut out = PARAM_MAGIC.to_vec();
    out.extend((params.len() as u32).to_le_bytes());
    for p in params {
        out.extend((p.rows() as u32).to_le_bytes());
        out.extend((p.cols() as u32).to_le_bytes());
    }
    for p in params {
        for v in p.as_slice() {
            out.extend(v.to_le_bytes());
        }
    }
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<Vec<Matrix>> {
    let bad = |msg: &str| Error::ParamFormat(msg.to_string());
    let mut pos = 0;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes
            .get(pos..pos + n)
            .ok_or_else(|| bad("truncated file"))?;
        pos += n;
        Ok(s)
    };
    if take(8)? != PARAM_MAGIC {
        return Err(bad("bad magic bytes"));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes")) as usize;
    let count = u32_at(take(4)?);
    let mut shapes = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let rows = u32_at(take(4)?);
        let cols = u32_at(take(4)?);
        shapes.push((rows, cols));
    }
    let mut params = Vec::with_capacity(shapes.len());
    for (rows, cols) in shapes {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| bad("shape overflow"))?;
        let raw = take(len.checked_mul(8).ok_or_else(|| bad("shape overflow"))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        params.push(Matrix::from_vec(rows, cols, data)?);
    }
    if take(1).is_ok() {
        return Err(bad("trailing bytes"));
    }
    Ok(params)
}

pub fn write_params(path: &Path, params: &[Matrix]) -> Result<()> {
    fs::write(path, encode_params(params)).map_err(|e| Error::io(path, e))
}

pub fn read_params(path: &Path) -> Result<Vec<Matrix>> {
    decode_params(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
