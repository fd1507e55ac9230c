//! Runs (model, components, sweep, seed) cells and collects result rows.

use std::collections::BTreeMap;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tnvqc_core::data::{Label, LabeledDataset, RawCarRecord};
use tnvqc_core::exp_machine::{self, TnModel, TnTrainConfig};
use tnvqc_core::metrics::{accuracy, f1_score};
use tnvqc_core::tt::TtCore;
use tnvqc_core::vqc::{self, VqcCircuit, VqcParams, VqcTrainConfig};

use crate::config::{ExperimentConfig, ModelKind};
use crate::dataset::{load_records, prepare, PreparedSplit};
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub model: ModelKind,
    pub components: usize,
    pub sweep: usize,
    pub seed: u64,
}

impl Cell {
    pub fn param_count(&self) -> usize {
        formula_params(self.model, self.components, self.sweep)
    }
}

pub fn formula_params(model: ModelKind, components: usize, sweep: usize) -> usize {
    match model {
        ModelKind::Tn => exp_machine::count_params(components, sweep),
        ModelKind::Vqc => vqc::count_params(components, sweep),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochPoint {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub model: ModelKind,
    pub components: usize,
    pub sweep: usize,
    pub param_count: usize,
    pub stored_params: usize,
    pub seed: u64,
    pub train_acc: Option<f64>,
    pub val_acc: Option<f64>,
    pub train_f1: Option<f64>,
    pub val_f1: Option<f64>,
    pub epochs: usize,
    pub seconds: Option<f64>,
    pub final_loss: Option<f64>,
    pub status: String,
    pub best_epoch: Option<usize>,
    pub best_val_acc: Option<f64>,
    pub history: Vec<EpochPoint>,
}

impl ResultRecord {
    pub fn cell(&self) -> Cell {
        Cell {
            model: self.model,
            components: self.components,
            sweep: self.sweep,
            seed: self.seed,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(cell: Cell, epochs: usize, status: String) -> Self {
        ResultRecord {
            model: cell.model,
            components: cell.components,
            sweep: cell.sweep,
            param_count: cell.param_count(),
            stored_params: 0,
            seed: cell.seed,
            train_acc: None,
            val_acc: None,
            train_f1: None,
            val_f1: None,
            epochs,
            seconds: None,
            final_loss: None,
            status,
            best_epoch: None,
            best_val_acc: None,
            history: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Tn(TnModel),
    Vqc { params: VqcParams, threshold: f64 },
}

impl TrainedModel {
    pub fn to_text(&self) -> String {
        match self {
            TrainedModel::Tn(m) => m.to_text(),
            TrainedModel::Vqc { params, threshold } => params.to_text(*threshold),
        }
    }
}

fn labels_of(ds: &LabeledDataset, f: impl Fn(&[f64]) -> Label) -> Vec<Label> {
    (0..ds.len()).map(|i| f(ds.sample(i))).collect()
}

struct Scores {
    train_acc: f64,
    val_acc: f64,
    train_f1: f64,
    val_f1: f64,
}

fn score(train: &LabeledDataset, val: &LabeledDataset, predict: impl Fn(&[f64]) -> Label) -> Result<Scores> {
    let tp = labels_of(train, &predict);
    let vp = labels_of(val, &predict);
    Ok(Scores {
        train_acc: accuracy(&tp, train.labels())?,
        val_acc: accuracy(&vp, val.labels())?,
        train_f1: f1_score(&tp, train.labels(), Label::Positive)?,
        val_f1: f1_score(&vp, val.labels(), Label::Positive)?,
    })
}

/// First epoch with the highest validation accuracy.
fn best_epoch(history: &[EpochPoint]) -> (Option<usize>, Option<f64>) {
    let mut best: Option<(usize, f64)> = None;
    for p in history {
        if let Some(a) = p.val_acc {
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((p.epoch, a));
            }
        }
    }
    (best.map(|b| b.0), best.map(|b| b.1))
}

/// Trains one cell. Divergence is reported in the record's status.
pub fn run_cell(cell: Cell, data: &PreparedSplit, cfg: &ExperimentConfig) -> Result<(ResultRecord, Option<TrainedModel>)> {
    let start = Instant::now();
    let outcome = match cell.model {
        ModelKind::Tn => train_tn(cell, data, cfg),
        ModelKind::Vqc => train_vqc(cell, data, cfg),
    };
    match outcome {
        Ok((mut rec, model)) => {
            if cfg.record_time {
                rec.seconds = Some(start.elapsed().as_secs_f64());
            }
            Ok((rec, Some(model)))
        }
        Err(BenchError::Core(tnvqc_core::Error::Diverged { epoch, loss })) => {
            warn!("{cell:?} diverged at epoch {epoch} (loss {loss})");
            let mut rec = ResultRecord::failed(cell, epoch + 1, format!("diverged@{epoch}"));
            if cfg.record_time {
                rec.seconds = Some(start.elapsed().as_secs_f64());
            }
            Ok((rec, None))
        }
        Err(e) => Err(e),
    }
}

fn train_tn(cell: Cell, data: &PreparedSplit, cfg: &ExperimentConfig) -> Result<(ResultRecord, TrainedModel)> {
    let (train, val) = if cfg.tn.scaled {
        (&data.train_scaled, &data.val_scaled)
    } else {
        (&data.train, &data.val)
    };
    let tc = TnTrainConfig {
        rank: cell.sweep,
        epochs: cfg.tn.epochs,
        learning_rate: cfg.tn.lr,
        lambda: cfg.tn.lambda,
        seed: cell.seed,
        loss: cfg.tn.loss_kind()?,
        regularizer: cfg.tn.regularizer_kind()?,
    };
    let fit = exp_machine::fit_with_validation(train, Some(val), &tc)?;
    let m = fit.model;
    let s = score(train, val, |x| exp_machine::classify(&m, x).expect("feature count checked"))?;
    let history: Vec<EpochPoint> = fit
        .history
        .iter()
        .map(|e| EpochPoint {
            epoch: e.epoch,
            train_loss: e.loss,
            train_acc: e.train_accuracy,
            val_loss: e.val_loss,
            val_acc: e.val_accuracy,
        })
        .collect();
    let final_loss = history.last().map_or(fit.initial_loss, |e| e.train_loss);
    let (best_epoch, best_val_acc) = best_epoch(&history);
    let rec = ResultRecord {
        model: cell.model,
        components: cell.components,
        sweep: cell.sweep,
        param_count: m.param_count(),
        stored_params: m.stored_param_count(),
        seed: cell.seed,
        train_acc: Some(s.train_acc),
        val_acc: Some(s.val_acc),
        train_f1: Some(s.train_f1),
        val_f1: Some(s.val_f1),
        epochs: history.len(),
        seconds: None,
        final_loss: Some(final_loss),
        status: "ok".into(),
        best_epoch,
        best_val_acc,
        history,
    };
    Ok((rec, TrainedModel::Tn(m)))
}

fn train_vqc(cell: Cell, data: &PreparedSplit, cfg: &ExperimentConfig) -> Result<(ResultRecord, TrainedModel)> {
    let (train, val) = (&data.train_scaled, &data.val_scaled);
    let vc = VqcTrainConfig {
        num_layers: cell.sweep,
        epochs: cfg.vqc.epochs,
        batch_size: cfg.vqc.batch_size,
        lr0: cfg.vqc.lr,
        decay: cfg.vqc.decay,
        seed: cell.seed,
        threshold: cfg.vqc.threshold,
        ..VqcTrainConfig::default()
    };
    let fit = vqc::fit_with_validation(train, Some(val), &vc)?;
    let p = fit.params;
    let circuit = VqcCircuit::for_params(&p);
    let th = cfg.vqc.threshold;
    let s = score(train, val, |x| {
        vqc::label_for(circuit.predict(x, &p).expect("feature count checked"), th)
    })?;
    let history: Vec<EpochPoint> = fit
        .history
        .iter()
        .map(|e| EpochPoint {
            epoch: e.epoch,
            train_loss: e.train_loss,
            train_acc: e.train_accuracy,
            val_loss: e.val_loss,
            val_acc: e.val_accuracy,
        })
        .collect();
    let (best_epoch, best_val_acc) = best_epoch(&history);
    let rec = ResultRecord {
        model: cell.model,
        components: cell.components,
        sweep: cell.sweep,
        param_count: vqc::count_params(p.num_qubits(), p.num_layers()),
        stored_params: p.angles().len(),
        seed: cell.seed,
        train_acc: Some(s.train_acc),
        val_acc: Some(s.val_acc),
        train_f1: Some(s.train_f1),
        val_f1: Some(s.val_f1),
        epochs: history.len(),
        seconds: None,
        final_loss: history.last().map(|e| e.train_loss),
        status: "ok".into(),
        best_epoch,
        best_val_acc,
        history,
    };
    Ok((rec, TrainedModel::Vqc { params: p, threshold: th }))
}

/// All cells of a config in output order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &model in &cfg.models {
        for &components in &cfg.components {
            for &sweep in cfg.sweep_values(model) {
                for &seed in &cfg.seeds {
                    out.push(Cell { model, components, sweep, seed });
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Prepared splits keyed by (components, seed).
pub fn prepare_splits(
    records: &[RawCarRecord],
    cfg: &ExperimentConfig,
) -> Result<BTreeMap<(usize, u64), PreparedSplit>> {
    let mut out = BTreeMap::new();
    for &k in &cfg.components {
        for &seed in &cfg.seeds {
            if let std::collections::btree_map::Entry::Vacant(e) = out.entry((k, seed)) {
                let split = prepare(records, k, seed, cfg.fit_pca_on_all)?;
                if split.clamped > 0 {
                    info!("components {k}, seed {seed}: {} validation values clamped", split.clamped);
                }
                e.insert(split);
            }
        }
    }
    Ok(out)
}

/// Runs every cell and returns rows sorted by (model, components, sweep, seed).
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let records = load_records(cfg.dataset.as_deref())?;
    let splits = prepare_splits(&records, cfg)?;
    let todo = cells(cfg);
    info!("running {} cells", todo.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    let mut rows = pool.install(|| {
        todo.par_iter()
            .map(|&cell| {
                let data = &splits[&(cell.components, cell.seed)];
                let (rec, _) = run_cell(cell, data, cfg)?;
                info!(
                    "{} k={} sweep={} seed={}: val_acc {:?} [{}]",
                    cell.model, cell.components, cell.sweep, cell.seed, rec.val_acc, rec.status
                );
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by_key(|r| r.cell());
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamAudit {
    pub model: ModelKind,
    pub components: usize,
    pub sweep: usize,
    pub formula: usize,
    /// Entries the model actually allocates.
    pub stored: usize,
    /// For the tensor network: entries after zero-padding every core to
    /// (r, 2, r). Equal to `stored` for the circuit.
    pub uniform_layout: usize,
}

impl ParamAudit {
    pub fn matches(&self) -> bool {
        self.formula == self.uniform_layout && self.stored <= self.formula
    }
}

fn pad_core(core: &TtCore, r: usize) -> TtCore {
    let mut padded = TtCore::zeros(r, core.mode(), r);
    for a in 0..core.left_rank() {
        for i in 0..core.mode() {
            for b in 0..core.right_rank() {
                padded.set(a, i, b, core.get(a, i, b));
            }
        }
    }
    padded
}

/// Builds each (model, components, sweep) configuration and counts its parameters.
pub fn audit_param_counts(cfg: &ExperimentConfig) -> Result<Vec<ParamAudit>> {
    let mut out = Vec::new();
    for &model in &cfg.models {
        for &k in &cfg.components {
            for &s in cfg.sweep_values(model) {
                let formula = formula_params(model, k, s);
                let (stored, uniform_layout) = match model {
                    ModelKind::Vqc => {
                        let p = VqcParams::zeros(k, s)?;
                        let rotations = vqc::ansatz_gates(k, s)
                            .iter()
                            .filter(|g| matches!(g, tnvqc_core::qsim::Gate::Ry { .. }))
                            .count();
                        if rotations != p.angles().len() {
                            return Err(BenchError::Config(format!(
                                "ansatz for N={k}, L={s} has {rotations} rotations but {} angles",
                                p.angles().len()
                            )));
                        }
                        (p.angles().len(), p.angles().len())
                    }
                    ModelKind::Tn => {
                        let w = exp_machine::initial_weights(k, s, 0)?;
                        let m = TnModel::new(w, s, Default::default(), 0.0, Default::default())?;
                        let padded: usize = m.weights().cores().iter().map(|c| pad_core(c, s).num_params()).sum();
                        (m.stored_param_count(), padded)
                    }
                };
                out.push(ParamAudit {
                    model,
                    components: k,
                    sweep: s,
                    formula,
                    stored,
                    uniform_layout,
                });
            }
        }
    }
    Ok(out)
}
