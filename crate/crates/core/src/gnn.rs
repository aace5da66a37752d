//! GCN and MLP backbones, max/mean/size-aware readouts, the cycle
//! self-supervision head, cycle-length augmentation of the training set,
//! the training loop, and F1 evaluation.
//!
//! A GCN layer computes `ReLU(T X W)` with `T` the self-looped symmetric
//! normalized adjacency; the MLP backbone drops `T`. The size-aware readout
//! weights node `i` by `k_i = N · softmax(C w_A)_i`, where `C` holds the
//! node's cycle features, and then takes a column-wise max.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{align_cycle_lengths, node_cycle_features};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::nn::{glorot_init, AdamState, Tape, Var};
use crate::spectral::normalized_adjacency;
use crate::splits::{upsample, SplitBundle, UpsampleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backbone {
    Gcn,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    GlobalMax,
    GlobalMean,
    Sia,
}

impl FromStr for Backbone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(Self::Gcn),
            "mlp" => Ok(Self::Mlp),
            _ => Err(Error::InvalidArgument(format!("unknown backbone {s:?}"))),
        }
    }
}

impl fmt::Display for Backbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gcn => "gcn",
            Self::Mlp => "mlp",
        })
    }
}

impl FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global_max" => Ok(Self::GlobalMax),
            "global_mean" => Ok(Self::GlobalMean),
            "sia" => Ok(Self::Sia),
            _ => Err(Error::InvalidArgument(format!("unknown readout {s:?}"))),
        }
    }
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GlobalMax => "global_max",
            Self::GlobalMean => "global_mean",
            Self::Sia => "sia",
        })
    }
}

/// Cycle-length augmentation settings: `increments` passes on every
/// `skip_ratio`-th training graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugCyc {
    pub increments: usize,
    pub skip_ratio: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub backbone: Backbone,
    pub layers: usize,
    pub hidden: usize,
    pub readout: Readout,
    pub ssl_lambda: f64,
    pub augcyc: Option<AugCyc>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            backbone: Backbone::Gcn,
            layers: 3,
            hidden: 64,
            readout: Readout::GlobalMax,
            ssl_lambda: 0.0,
            augcyc: None,
            batch_size: 30,
            learning_rate: 1e-3,
            patience: 50,
            max_epochs: 500,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.layers == 0 {
            return bad("layers must be at least 1");
        }
        if self.hidden == 0 {
            return bad("hidden width must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.ssl_lambda.is_finite() && self.ssl_lambda >= 0.0) {
            return bad("ssl_lambda must be nonnegative");
        }
        if let Some(a) = self.augcyc {
            if a.increments == 0 || a.skip_ratio == 0 {
                return bad("augcyc values must be at least 1");
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let augcyc = match self.augcyc {
            Some(a) => format!("{},{}", a.increments, a.skip_ratio),
            None => "none".to_string(),
        };
        format!(
            "backbone = {}\nlayers = {}\nhidden = {}\nreadout = {}\nssl_lambda = {}\n\
             augcyc = {augcyc}\nbatch_size = {}\nlearning_rate = {}\npatience = {}\nmax_epochs = {}\n",
            self.backbone,
            self.layers,
            self.hidden,
            self.readout,
            self.ssl_lambda,
            self.batch_size,
            self.learning_rate,
            self.patience,
            self.max_epochs,
        )
    }

    /// Parses `key = value` lines; `#` starts a comment. Missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key {key:?}")));
            }
            fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
                v.parse().map_err(|_| format!("bad value {v:?}"))
            }
            let res: std::result::Result<(), String> = (|| {
                match key {
                    "backbone" => cfg.backbone = value.parse().map_err(|e: Error| e.to_string())?,
                    "readout" => cfg.readout = value.parse().map_err(|e: Error| e.to_string())?,
                    "layers" => cfg.layers = num(value)?,
                    "hidden" => cfg.hidden = num(value)?,
                    "ssl_lambda" => cfg.ssl_lambda = num(value)?,
                    "batch_size" => cfg.batch_size = num(value)?,
                    "learning_rate" => cfg.learning_rate = num(value)?,
                    "patience" => cfg.patience = num(value)?,
                    "max_epochs" => cfg.max_epochs = num(value)?,
                    "augcyc" => {
                        cfg.augcyc = if value == "none" {
                            None
                        } else {
                            let (n, r) = value.split_once(',').ok_or_else(|| {
                                format!("augcyc expects n,R or none, got {value:?}")
                            })?;
                            Some(AugCyc {
                                increments: num(n.trim())?,
                                skip_ratio: num(r.trim())?,
                            })
                        }
                    }
                    other => return Err(format!("unknown key {other:?}")),
                }
                Ok(())
            })();
            res.map_err(err)?;
        }
        cfg.validate().map_err(|e| Error::Config {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Per-graph inputs computed once: features, propagation matrix, transposed
/// cycle features, and cycle-membership labels.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub features: Matrix,
    pub propagation: Option<Matrix>,
    /// `Cᵀ`, 2×N.
    pub cycle_features_t: Option<Matrix>,
    pub membership: Option<Vec<usize>>,
    pub label: usize,
}

/// Node features of `g`, or an all-ones column when the dataset carries
/// none.
pub fn input_features(g: &Graph) -> Matrix {
    match g.features() {
        Some(f) => f.clone(),
        None => Matrix::filled(g.node_count(), 1, 1.0),
    }
}

pub fn input_width(d: &Dataset) -> usize {
    d.feature_width().unwrap_or(1)
}

impl PreparedGraph {
    pub fn new(g: &Graph, config: &ModelConfig) -> Result<Self> {
        if g.node_count() == 0 {
            return Err(Error::EmptyReadout);
        }
        let propagation = match config.backbone {
            Backbone::Gcn => Some(normalized_adjacency(g)?.into_matrix()),
            Backbone::Mlp => None,
        };
        let needs_cycles = config.readout == Readout::Sia || config.ssl_lambda > 0.0;
        let c = needs_cycles.then(|| node_cycle_features(g));
        let membership = (config.ssl_lambda > 0.0).then(|| {
            let c = c.as_ref().expect("computed above");
            (0..c.rows())
                .map(|i| usize::from(c[(i, 0)] > 0.0))
                .collect()
        });
        let cycle_features_t = (config.readout == Readout::Sia)
            .then(|| c.as_ref().expect("computed above").transpose());
        Ok(Self {
            features: input_features(g),
            propagation,
            cycle_features_t,
            membership,
            label: g.label().unwrap_or(0),
        })
    }
}

/// Prepares graphs in parallel; errors name the dataset index.
fn prepare_all(graphs: &[(usize, &Graph)], config: &ModelConfig) -> Result<Vec<PreparedGraph>> {
    graphs
        .par_iter()
        .map(|&(i, g)| PreparedGraph::new(g, config).map_err(|e| Error::at_graph(i, e)))
        .collect()
}

/// `layers` backbone layers. Each computes `X W` (then `T ·` for GCN);
/// every layer but the last is followed by ReLU.
pub fn backbone_forward(
    tape: &mut Tape,
    propagation: Option<Var>,
    x: Var,
    weights: &[Var],
) -> Result<Var> {
    let mut h = x;
    for (l, &w) in weights.iter().enumerate() {
        h = tape.matmul(h, w)?;
        if let Some(t) = propagation {
            h = tape.matmul(t, h)?;
        }
        if l + 1 < weights.len() {
            h = tape.relu(h)?;
        }
    }
    Ok(h)
}

/// `k = N · softmax(w_A Cᵀ)`, then the column-wise max of `Diag(k) X`.
pub fn sia_readout(tape: &mut Tape, cycle_features_t: Var, x_last: Var, w_a: Var) -> Result<Var> {
    let k = sia_weights(tape, cycle_features_t, x_last, w_a)?;
    let z = tape.scale_rows(x_last, k)?;
    tape.global_max_rows(z)
}

/// The 1×N node weights `k` of [`sia_readout`].
pub fn sia_weights(tape: &mut Tape, cycle_features_t: Var, x_last: Var, w_a: Var) -> Result<Var> {
    let n = tape.value(x_last).rows();
    if n == 0 {
        return Err(Error::EmptyReadout);
    }
    let ct = tape.value(cycle_features_t);
    if ct.cols() != n {
        return Err(Error::Shape {
            op: "sia_readout",
            got: ct.shape(),
            want: (2, n),
        });
    }
    let s = tape.matmul(w_a, cycle_features_t)?;
    tape.scaled_row_softmax(s, n as f64)
}

/// Mean per-node cross-entropy of a two-layer head predicting cycle
/// membership from node representations.
pub fn ssl_loss(tape: &mut Tape, reps: Var, membership: &[usize], head: [Var; 4]) -> Result<Var> {
    let h = tape.matmul(reps, head[0])?;
    let h = tape.add_bias(h, head[1])?;
    let h = tape.relu(h)?;
    let z = tape.matmul(h, head[2])?;
    let z = tape.add_bias(z, head[3])?;
    tape.cross_entropy_from_logits(z, membership)
}

/// Applies cycle-length alignment to the training graphs only; the result
/// lists them in `train` order.
pub fn augcyc_prepare(
    train: &[usize],
    d: &Dataset,
    increments: usize,
    skip_ratio: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    align_cycle_lengths(&d.subset(train), skip_ratio, increments, &mut rng)
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    layers: usize,
    sia: Option<usize>,
    cls_w: usize,
    cls_b: usize,
    ssl: Option<usize>,
    len: usize,
}

impl Layout {
    fn of(config: &ModelConfig) -> Self {
        let mut next = config.layers;
        let sia = (config.readout == Readout::Sia).then(|| {
            next += 1;
            next - 1
        });
        let cls_w = next;
        let cls_b = next + 1;
        next += 2;
        let ssl = (config.ssl_lambda > 0.0).then(|| {
            next += 4;
            next - 4
        });
        Self {
            layers: config.layers,
            sia,
            cls_w,
            cls_b,
            ssl,
            len: next,
        }
    }
}

/// Model parameters, in order: backbone weights, `w_A` (1×2, SIA only),
/// classifier weight and bias, then the SSL head `W1, b1, W2, b2` when
/// `ssl_lambda > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Vec<Matrix>,
}

impl Model {
    pub fn init<R: Rng + ?Sized>(
        config: ModelConfig,
        input_width: usize,
        classes: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let layout = Layout::of(&config);
        let h = config.hidden;
        let mut params = Vec::with_capacity(layout.len);
        for l in 0..config.layers {
            let rows = if l == 0 { input_width } else { h };
            params.push(glorot_init(rows, h, rng));
        }
        if layout.sia.is_some() {
            params.push(Matrix::zeros(1, 2));
        }
        params.push(glorot_init(h, classes, rng));
        params.push(Matrix::zeros(1, classes));
        if layout.ssl.is_some() {
            params.push(glorot_init(h, h, rng));
            params.push(Matrix::zeros(1, h));
            params.push(glorot_init(h, 2, rng));
            params.push(Matrix::zeros(1, 2));
        }
        Ok(Self { config, params })
    }

    /// Rebuilds a model from stored parameters, checking every shape.
    pub fn from_params(config: ModelConfig, params: Vec<Matrix>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::of(&config);
        let bad = |msg: String| Error::ParamFormat(msg);
        if params.len() != layout.len {
            return Err(bad(format!(
                "config expects {} tensors, file has {}",
                layout.len,
                params.len()
            )));
        }
        let h = config.hidden;
        let classes = params[layout.cls_b].cols();
        let mut want: Vec<(usize, usize)> = Vec::with_capacity(layout.len);
        for l in 0..config.layers {
            want.push((if l == 0 { params[0].rows() } else { h }, h));
        }
        if layout.sia.is_some() {
            want.push((1, 2));
        }
        want.push((h, classes));
        want.push((1, classes));
        if layout.ssl.is_some() {
            want.extend([(h, h), (1, h), (h, 2), (1, 2)]);
        }
        for (k, (p, w)) in params.iter().zip(&want).enumerate() {
            if p.shape() != *w {
                return Err(bad(format!(
                    "tensor {k} has shape {:?}, expected {w:?}",
                    p.shape()
                )));
            }
        }
        Ok(Self { config, params })
    }

    pub fn classes(&self) -> usize {
        self.params[Layout::of(&self.config).cls_b].cols()
    }

    pub fn input_width(&self) -> usize {
        self.params[0].rows()
    }

    /// Records the forward pass for one graph and returns `(logits, node
    /// representations)`.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], pg: &PreparedGraph) -> Result<(Var, Var)> {
        let layout = Layout::of(&self.config);
        let x = tape.constant(pg.features.clone());
        let t = pg.propagation.as_ref().map(|t| tape.constant(t.clone()));
        let reps = backbone_forward(tape, t, x, &vars[..layout.layers])?;
        let pooled = match self.config.readout {
            Readout::GlobalMax => tape.global_max_rows(reps)?,
            Readout::GlobalMean => tape.global_mean_rows(reps)?,
            Readout::Sia => {
                let ct = pg.cycle_features_t.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("graph prepared without cycle features".into())
                })?;
                let ct = tape.constant(ct.clone());
                sia_readout(tape, ct, reps, vars[layout.sia.expect("sia layout")])?
            }
        };
        let z = tape.matmul(pooled, vars[layout.cls_w])?;
        let logits = tape.add_bias(z, vars[layout.cls_b])?;
        Ok((logits, reps))
    }

    /// Training objective for one graph, `L_label + λ L_cycle`, with its
    /// gradient for every parameter.
    pub fn graph_loss_and_grads(&self, pg: &PreparedGraph) -> Result<(f64, Vec<Matrix>)> {
        let layout = Layout::of(&self.config);
        let mut tape = Tape::new();
        let vars: Vec<Var> = self.params.iter().map(|p| tape.param(p.clone())).collect();
        let (logits, reps) = self.forward(&mut tape, &vars, pg)?;
        let mut loss = tape.cross_entropy_from_logits(logits, &[pg.label])?;
        if let Some(s) = layout.ssl {
            let membership = pg.membership.as_ref().ok_or_else(|| {
                Error::InvalidArgument("graph prepared without cycle membership".into())
            })?;
            let head = [vars[s], vars[s + 1], vars[s + 2], vars[s + 3]];
            let l_cycle = ssl_loss(&mut tape, reps, membership, head)?;
            let weighted = tape.scale(l_cycle, self.config.ssl_lambda)?;
            loss = tape.add(loss, weighted)?;
        }
        let grads = tape.backward(loss)?;
        let g = vars
            .iter()
            .zip(&self.params)
            .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
            .collect();
        Ok((tape.scalar(loss), g))
    }

    /// Mean objective and gradient over a batch. Per-graph passes run in
    /// parallel and are reduced in input order.
    pub fn batch_loss_and_grads(&self, batch: &[&PreparedGraph]) -> Result<(f64, Vec<Matrix>)> {
        let parts: Vec<(f64, Vec<Matrix>)> = batch
            .par_iter()
            .map(|pg| self.graph_loss_and_grads(pg))
            .collect::<Result<_>>()?;
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut grads: Vec<Matrix> = self
            .params
            .iter()
            .map(|p| Matrix::zeros(p.rows(), p.cols()))
            .collect();
        for (l, g) in &parts {
            loss += l;
            for (acc, gi) in grads.iter_mut().zip(g) {
                acc.axpy(1.0, gi)?;
            }
        }
        for g in &mut grads {
            *g = g.scale(inv);
        }
        Ok((loss * inv, grads))
    }

    pub fn logits(&self, pg: &PreparedGraph) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = self
            .params
            .iter()
            .map(|p| tape.constant(p.clone()))
            .collect();
        let (logits, _) = self.forward(&mut tape, &vars, pg)?;
        Ok(tape.value(logits).row(0).to_vec())
    }

    /// Classification cross-entropy only.
    pub fn classification_loss(&self, pg: &PreparedGraph) -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = self
            .params
            .iter()
            .map(|p| tape.constant(p.clone()))
            .collect();
        let (logits, _) = self.forward(&mut tape, &vars, pg)?;
        let l = tape.cross_entropy_from_logits(logits, &[pg.label])?;
        Ok(tape.scalar(l))
    }

    /// Arg-max class; ties go to the lower class id.
    pub fn predict(&self, pg: &PreparedGraph) -> Result<usize> {
        let z = self.logits(pg)?;
        let mut best = 0;
        for (c, &v) in z.iter().enumerate() {
            if v > z[best] {
                best = c;
            }
        }
        Ok(best)
    }

    pub fn predict_all(&self, d: &Dataset, indices: &[usize]) -> Result<Vec<usize>> {
        indices
            .par_iter()
            .map(|&i| {
                PreparedGraph::new(&d.graphs[i], &self.config)
                    .and_then(|pg| self.predict(&pg))
                    .map_err(|e| Error::at_graph(i, e))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct F1Scores {
    pub f1_class1: f64,
    pub f1_macro: f64,
}

/// F1 with class 1 as positive, and the unweighted mean of per-class F1.
/// A class with `P + R = 0` scores 0.
pub fn f1_scores(predicted: &[usize], truth: &[usize], classes: usize) -> F1Scores {
    let per_class = |c: usize| {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fne = 0usize;
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p == c, t == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fne += 1,
                _ => {}
            }
        }
        let precision = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fne == 0 {
            0.0
        } else {
            tp as f64 / (tp + fne) as f64
        };
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    };
    let classes = classes.max(2);
    F1Scores {
        f1_class1: per_class(1),
        f1_macro: (0..classes).map(per_class).sum::<f64>() / classes as f64,
    }
}

pub fn evaluate_f1(model: &Model, d: &Dataset, indices: &[usize]) -> Result<F1Scores> {
    let predicted = model.predict_all(d, indices)?;
    let labels = d.labels();
    let truth: Vec<usize> = indices.iter().map(|&i| labels[i]).collect();
    Ok(f1_scores(&predicted, &truth, d.class_count))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitScores {
    pub train: F1Scores,
    pub val: F1Scores,
    pub small_test: F1Scores,
    pub large_test: F1Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub epochs_run: usize,
    pub train_losses: Vec<f64>,
    pub val_losses: Vec<f64>,
    /// Epoch whose parameters were kept; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    /// Epoch at which patience ran out, if it did.
    pub early_stop_epoch: Option<usize>,
    pub f1: SplitScores,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub report: TrainReport,
}

fn diverged(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::NumericOverflow(_) => Error::Diverged { epoch, batch },
        other => other,
    }
}

/// Trains with Adam on shuffled, upsampled mini-batches and keeps the
/// parameters of the epoch with the lowest validation loss.
///
/// Validation loss is the classification term only; with an empty
/// validation split the training loss stands in for it.
pub fn train(
    config: &ModelConfig,
    d: &Dataset,
    splits: &SplitBundle,
    upsample_spec: &UpsampleSpec,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    splits.validate_against(d)?;
    let labels = d.labels();
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::init(config.clone(), input_width(d), d.class_count, &mut init_rng)?;

    let train_graphs: Vec<Graph> = match config.augcyc {
        Some(a) => augcyc_prepare(&splits.train, d, a.increments, a.skip_ratio, seed)?.graphs,
        None => splits.train.iter().map(|&i| d.graphs[i].clone()).collect(),
    };
    let indexed: Vec<(usize, &Graph)> = splits.train.iter().copied().zip(&train_graphs).collect();
    let train_prep = prepare_all(&indexed, config)?;
    let val_graphs: Vec<(usize, &Graph)> = splits.val.iter().map(|&i| (i, &d.graphs[i])).collect();
    let val_prep = prepare_all(&val_graphs, config)?;

    let position: HashMap<usize, usize> = splits
        .train
        .iter()
        .enumerate()
        .map(|(p, &i)| (i, p))
        .collect();
    let expanded: Vec<usize> = upsample(&splits.train, &labels, upsample_spec, seed)
        .into_iter()
        .map(|i| position[&i])
        .collect();

    let mut adam = AdamState::new(&model.params, config.learning_rate);
    let mut best_params = model.params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = None;
    let mut early_stop_epoch = None;
    let mut train_losses = Vec::new();
    let mut val_losses = Vec::new();

    for epoch in 0..config.max_epochs {
        let mut order = expanded.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&PreparedGraph> = chunk.iter().map(|&p| &train_prep[p]).collect();
            let (loss, grads) = model
                .batch_loss_and_grads(&batch)
                .map_err(|e| diverged(e, epoch, b))?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, batch: b });
            }
            adam.step(&mut model.params, &grads)?;
            if model.params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Diverged { epoch, batch: b });
            }
            loss_sum += loss * chunk.len() as f64;
        }
        let train_loss = if order.is_empty() {
            0.0
        } else {
            loss_sum / order.len() as f64
        };
        let val_loss = if val_prep.is_empty() {
            train_loss
        } else {
            let losses: Vec<f64> = val_prep
                .par_iter()
                .map(|pg| model.classification_loss(pg))
                .collect::<Result<_>>()
                .map_err(|e| diverged(e, epoch, 0))?;
            losses.iter().sum::<f64>() / losses.len() as f64
        };
        log::debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:.6}");
        train_losses.push(train_loss);
        val_losses.push(val_loss);

        if val_loss < best_loss {
            best_loss = val_loss;
            best_epoch = Some(epoch);
            best_params.clone_from(&model.params);
        } else if epoch - best_epoch.unwrap_or(0) >= config.patience {
            early_stop_epoch = Some(epoch);
            break;
        }
    }
    model.params = best_params;

    let f1 = SplitScores {
        train: evaluate_f1(&model, d, &splits.train)?,
        val: evaluate_f1(&model, d, &splits.val)?,
        small_test: evaluate_f1(&model, d, &splits.small_test)?,
        large_test: evaluate_f1(&model, d, &splits.large_test)?,
    };
    let report = TrainReport {
        seed,
        epochs_run: train_losses.len(),
        train_losses,
        val_losses,
        best_epoch,
        early_stop_epoch,
        f1,
    };
    Ok(TrainOutcome { model, report })
}
