//! Exponential machine: a linear model over all products of features whose
//! weight tensor is held in tensor-train form and trained on the fixed-rank
//! manifold.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, log1p};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Label, LabeledDataset};
use crate::riemannian::{retract, ManifoldSpec, TangentFrame};
use crate::tt::{TtCore, TtTensor};
use crate::{fmt_f64, Error, Result};

/// Formula parameter count `2 d r^2`.
pub fn count_params(d: usize, r: usize) -> usize {
    2 * d * r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Logistic,
    Mse,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Mse => "mse",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "mse" => Ok(LossKind::Mse),
            _ => Err(Error::invalid(format!("unknown loss {s:?}"))),
        }
    }

    fn value(self, score: f64, y: f64) -> f64 {
        match self {
            LossKind::Logistic => softplus(-y * score),
            LossKind::Mse => (score - y) * (score - y),
        }
    }

    /// d loss / d score.
    fn slope(self, score: f64, y: f64) -> f64 {
        match self {
            LossKind::Logistic => -y * sigmoid(-y * score),
            LossKind::Mse => 2.0 * (score - y),
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + log1p(exp(-z))
    } else {
        log1p(exp(z))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// Weight penalty added to the data loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularizer {
    /// `lambda / 2 * ||W||`.
    #[default]
    Norm,
    /// `lambda / 2 * ||W||^2`.
    SquaredNorm,
}

impl Regularizer {
    pub fn name(self) -> &'static str {
        match self {
            Regularizer::Norm => "norm",
            Regularizer::SquaredNorm => "squared",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "norm" => Ok(Regularizer::Norm),
            "squared" => Ok(Regularizer::SquaredNorm),
            _ => Err(Error::invalid(format!("unknown regularizer {s:?}"))),
        }
    }

    fn value(self, lambda: f64, norm: f64) -> f64 {
        match self {
            Regularizer::Norm => 0.5 * lambda * norm,
            Regularizer::SquaredNorm => 0.5 * lambda * norm * norm,
        }
    }

    /// Gradient of the penalty is `coeff * W`.
    fn coeff(self, lambda: f64, norm: f64) -> f64 {
        match self {
            Regularizer::Norm if norm > 0.0 => 0.5 * lambda / norm,
            Regularizer::Norm => 0.0,
            Regularizer::SquaredNorm => lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnModel {
    weights: TtTensor,
    rank: usize,
    loss: LossKind,
    lambda: f64,
    regularizer: Regularizer,
}

impl TnModel {
    /// `rank` is the nominal TT-rank the model was configured with.
    pub fn new(
        weights: TtTensor,
        rank: usize,
        loss: LossKind,
        lambda: f64,
        regularizer: Regularizer,
    ) -> Result<Self> {
        if weights.shape().iter().any(|&n| n != 2) {
            return Err(Error::invalid("weights must have every mode of size 2"));
        }
        if rank == 0 || weights.max_rank() > rank {
            return Err(Error::invalid("weights exceed the configured rank"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        Ok(TnModel {
            weights,
            rank,
            loss,
            lambda,
            regularizer,
        })
    }

    pub fn weights(&self) -> &TtTensor {
        &self.weights
    }

    pub fn num_features(&self) -> usize {
        self.weights.order()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    /// `2 d r^2`, the nominal count.
    pub fn param_count(&self) -> usize {
        count_params(self.num_features(), self.rank)
    }

    /// Numbers actually stored in the cores.
    pub fn stored_param_count(&self) -> usize {
        self.weights.num_params()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "tnvqc-tn 1 {} {} {} {} {}\n",
            self.num_features(),
            self.rank,
            self.loss.name(),
            fmt_f64(self.lambda),
            self.regularizer.name()
        );
        for core in self.weights.cores() {
            out.push_str(&format!(
                "{} {} {}\n",
                core.left_rank(),
                core.mode(),
                core.right_rank()
            ));
            let values: Vec<String> = core.data().iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&values.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::invalid("empty model file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "tnvqc-tn" || fields[1] != "1" {
            return Err(Error::invalid("not a version 1 tensor-network model file"));
        }
        let bad = |what: &str| Error::invalid(format!("bad {what} in model header"));
        let d: usize = fields[2].parse().map_err(|_| bad("order"))?;
        let rank: usize = fields[3].parse().map_err(|_| bad("rank"))?;
        let loss = LossKind::parse(fields[4])?;
        let lambda: f64 = fields[5].parse().map_err(|_| bad("lambda"))?;
        let regularizer = Regularizer::parse(fields[6])?;
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let dims: Vec<usize> = lines
                .next()
                .ok_or_else(|| Error::invalid(format!("missing core {k}")))?
                .split_whitespace()
                .map(str::parse)
                .collect::<core::result::Result<_, _>>()
                .map_err(|_| Error::invalid(format!("bad shape for core {k}")))?;
            if dims.len() != 3 {
                return Err(Error::invalid(format!("bad shape for core {k}")));
            }
            let data: Vec<f64> = lines
                .next()
                .ok_or_else(|| Error::invalid(format!("missing data for core {k}")))?
                .split_whitespace()
                .map(str::parse)
                .collect::<core::result::Result<_, _>>()
                .map_err(|_| Error::invalid(format!("bad value in core {k}")))?;
            cores.push(TtCore::new(dims[0], dims[1], dims[2], data)?);
        }
        TnModel::new(TtTensor::from_cores(cores)?, rank, loss, lambda, regularizer)
    }
}

/// Rank-one TT whose core `k` is the pair `(1, x_k)`.
pub fn encode_features(x: &[f64]) -> Result<TtTensor> {
    if x.is_empty() {
        return Err(Error::invalid("cannot encode an empty feature vector"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features must be finite"));
    }
    let factors: Vec<Vec<f64>> = x.iter().map(|&v| vec![1.0, v]).collect();
    TtTensor::rank_one(&factors)
}

/// Contracts the weights with the encoded sample, one core at a time.
fn score(weights: &TtTensor, x: &[f64], buf: &mut Vec<f64>, next: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.push(1.0);
    for (core, &xk) in weights.cores().iter().zip(x) {
        let r = core.right_rank();
        next.clear();
        next.resize(r, 0.0);
        let data = core.data();
        for (a, &va) in buf.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let g0 = &data[(a * 2) * r..(a * 2 + 1) * r];
            let g1 = &data[(a * 2 + 1) * r..(a * 2 + 2) * r];
            for ((o, &p), &q) in next.iter_mut().zip(g0).zip(g1) {
                *o += va * (p + xk * q);
            }
        }
        core::mem::swap(buf, next);
    }
    buf[0]
}

fn check_sample(m: &TnModel, x: &[f64]) -> Result<()> {
    if x.len() != m.num_features() {
        return Err(Error::invalid(format!(
            "sample has {} features, model expects {}",
            x.len(),
            m.num_features()
        )));
    }
    Ok(())
}

/// `<X(x), W>`.
pub fn predict_raw(m: &TnModel, x: &[f64]) -> Result<f64> {
    check_sample(m, x)?;
    Ok(score(&m.weights, x, &mut Vec::new(), &mut Vec::new()))
}

/// Sign of the raw score, ties going to `+1`.
pub fn classify(m: &TnModel, x: &[f64]) -> Result<Label> {
    Ok(Label::from_sign(predict_raw(m, x)?))
}

fn check_batch(m: &TnModel, batch: &LabeledDataset) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if batch.num_features() != m.num_features() {
        return Err(Error::invalid(format!(
            "batch has {} features, model expects {}",
            batch.num_features(),
            m.num_features()
        )));
    }
    Ok(())
}

fn scores(weights: &TtTensor, ds: &LabeledDataset) -> Vec<f64> {
    let (mut buf, mut next) = (Vec::new(), Vec::new());
    (0..ds.len())
        .map(|i| score(weights, ds.sample(i), &mut buf, &mut next))
        .collect()
}

fn mean_data_loss(kind: LossKind, scores: &[f64], labels: &[Label]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, l)| kind.value(s, l.sign()))
        .sum();
    total / scores.len() as f64
}

fn accuracy_of(scores: &[f64], labels: &[Label]) -> f64 {
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &l)| Label::from_sign(s) == l)
        .count();
    hits as f64 / scores.len().max(1) as f64
}

/// Mean per-sample loss plus the weight penalty.
pub fn loss(m: &TnModel, batch: &LabeledDataset) -> Result<f64> {
    check_batch(m, batch)?;
    let s = scores(&m.weights, batch);
    Ok(mean_data_loss(m.loss, &s, batch.labels()) + m.regularizer.value(m.lambda, m.weights.norm()))
}

/// Full Euclidean gradient as an explicit TT. The rank-one summands are
/// merged pairwise and recompressed without loss at every merge, so the
/// result is exact up to rounding but may have large ranks; training uses
/// the tangent-space projection of the summands instead.
pub fn euclidean_gradient(m: &TnModel, batch: &LabeledDataset) -> Result<TtTensor> {
    check_batch(m, batch)?;
    let n = batch.len() as f64;
    let s = scores(&m.weights, batch);
    let mut terms: Vec<TtTensor> = Vec::with_capacity(batch.len() + 1);
    for i in 0..batch.len() {
        let c = m.loss.slope(s[i], batch.labels()[i].sign()) / n;
        if c != 0.0 {
            terms.push(encode_features(batch.sample(i))?.scale(c));
        }
    }
    let reg = m.regularizer.coeff(m.lambda, m.weights.norm());
    if reg != 0.0 {
        terms.push(m.weights.scale(reg));
    }
    if terms.is_empty() {
        return TtTensor::zeros(&m.weights.shape());
    }
    while terms.len() > 1 {
        let mut merged = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => {
                    let sum = a.add(&b)?;
                    merged.push(sum.round_eps(usize::MAX, 1e-14));
                }
                None => merged.push(a),
            }
        }
        terms = merged;
    }
    Ok(terms.pop().expect("at least one term"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnTrainConfig {
    pub rank: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub seed: u64,
    pub loss: LossKind,
    pub regularizer: Regularizer,
}

impl Default for TnTrainConfig {
    fn default() -> Self {
        TnTrainConfig {
            rank: 2,
            epochs: 500,
            learning_rate: 5.0,
            lambda: 0.0,
            seed: 0,
            loss: LossKind::Logistic,
            regularizer: Regularizer::Norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnEpoch {
    pub epoch: usize,
    /// Training loss and accuracy after this epoch's step.
    pub loss: f64,
    pub train_accuracy: f64,
    /// Norm of the Riemannian gradient used for the step.
    pub grad_norm: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TnFit {
    pub model: TnModel,
    /// Training loss of the initial weights.
    pub initial_loss: f64,
    pub history: Vec<TnEpoch>,
}

/// Unit-norm random point of the rank-`rank` manifold of `d`-mode binary
/// tensors.
pub fn initial_weights(d: usize, rank: usize, seed: u64) -> Result<TtTensor> {
    let spec = ManifoldSpec::new(vec![2; d], rank)?;
    Ok(spec.random_point(&mut ChaCha8Rng::seed_from_u64(seed)))
}

pub fn fit(train: &LabeledDataset, cfg: &TnTrainConfig) -> Result<TnFit> {
    fit_with_validation(train, None, cfg)
}

/// Full-batch Riemannian gradient descent with a constant step.
pub fn fit_with_validation(
    train: &LabeledDataset,
    val: Option<&LabeledDataset>,
    cfg: &TnTrainConfig,
) -> Result<TnFit> {
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let d = train.num_features();
    if d == 0 {
        return Err(Error::invalid("training set has no features"));
    }
    let weights = initial_weights(d, cfg.rank, cfg.seed)?;
    let mut model = TnModel::new(weights, cfg.rank, cfg.loss, cfg.lambda, cfg.regularizer)?;
    check_batch(&model, train)?;
    if let Some(v) = val {
        if v.num_features() != d {
            return Err(Error::invalid("validation set has a different feature count"));
        }
    }
    let labels = train.labels();
    let n = train.len() as f64;
    let penalty = |m: &TnModel| m.regularizer.value(m.lambda, m.weights.norm());

    let mut s = scores(&model.weights, train);
    let initial_loss = mean_data_loss(cfg.loss, &s, labels) + penalty(&model);
    if !initial_loss.is_finite() {
        return Err(Error::Diverged {
            epoch: 0,
            loss: initial_loss,
        });
    }
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut coeffs = vec![0.0; train.len()];
    for epoch in 0..cfg.epochs {
        for (c, (&si, l)) in coeffs.iter_mut().zip(s.iter().zip(labels)) {
            *c = cfg.loss.slope(si, l.sign()) / n;
        }
        let frame = Arc::new(TangentFrame::at(&model.weights));
        let mut grad = frame.project_rank1_sum(&coeffs, |sample, k, i| {
            if i == 0 {
                1.0
            } else {
                train.sample(sample)[k]
            }
        });
        let reg = cfg.regularizer.coeff(cfg.lambda, model.weights.norm());
        if reg != 0.0 {
            grad = grad.axpy(reg, &frame.base_as_tangent())?;
        }
        let grad_norm = grad.norm();
        model.weights = retract(&model.weights, &grad, cfg.learning_rate)?;

        s = scores(&model.weights, train);
        let loss = mean_data_loss(cfg.loss, &s, labels) + penalty(&model);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        let (val_loss, val_accuracy) = match val {
            Some(v) if !v.is_empty() => {
                let vs = scores(&model.weights, v);
                (
                    Some(mean_data_loss(cfg.loss, &vs, v.labels()) + penalty(&model)),
                    Some(accuracy_of(&vs, v.labels())),
                )
            }
            _ => (None, None),
        };
        history.push(TnEpoch {
            epoch,
            loss,
            train_accuracy: accuracy_of(&s, labels),
            grad_norm,
            val_loss,
            val_accuracy,
        });
    }
    Ok(TnFit {
        model,
        initial_loss,
        history,
    })
}

/// Accuracy of `m` on a dataset.
pub fn accuracy(m: &TnModel, ds: &LabeledDataset) -> Result<f64> {
    check_batch(m, ds)?;
    Ok(accuracy_of(&scores(&m.weights, ds), ds.labels()))
}
