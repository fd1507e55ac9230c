//! Seed aggregation, per-component winners and the trend check.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::config::ModelKind;
use crate::grid::ResultRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub model: ModelKind,
    pub components: usize,
    pub sweep: usize,
    pub param_count: usize,
    pub runs: usize,
    pub failed: usize,
    pub val_mean: f64,
    pub val_min: f64,
    pub val_max: f64,
    pub train_mean: f64,
    pub val_f1_mean: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// One row per (model, components, sweep), over seeds that finished.
/// Groups where every seed failed are dropped.
pub fn aggregate(records: &[ResultRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(ModelKind, usize, usize), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.model, r.components, r.sweep)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((model, components, sweep), rows) in groups {
        let ok: Vec<&ResultRecord> = rows.iter().copied().filter(|r| r.val_acc.is_some()).collect();
        if ok.is_empty() {
            continue;
        }
        let val: Vec<f64> = ok.iter().filter_map(|r| r.val_acc).collect();
        let train: Vec<f64> = ok.iter().filter_map(|r| r.train_acc).collect();
        let f1: Vec<f64> = ok.iter().filter_map(|r| r.val_f1).collect();
        out.push(Aggregate {
            model,
            components,
            sweep,
            param_count: rows[0].param_count,
            runs: ok.len(),
            failed: rows.len() - ok.len(),
            val_mean: mean(&val),
            val_min: val.iter().copied().fold(f64::INFINITY, f64::min),
            val_max: val.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            train_mean: mean(&train),
            val_f1_mean: mean(&f1),
        });
    }
    out
}

/// The sweep value with the highest seed-mean validation accuracy.
/// Ties go to the smaller sweep value.
pub fn best_cell(aggs: &[Aggregate], model: ModelKind, components: usize) -> Option<&Aggregate> {
    aggs.iter()
        .filter(|a| a.model == model && a.components == components)
        .fold(None, |best: Option<&Aggregate>, a| match best {
            Some(b) if b.val_mean >= a.val_mean => Some(b),
            _ => Some(a),
        })
}

/// Highest single-run validation accuracy over the given sweep values.
pub fn best_run(records: &[ResultRecord], model: ModelKind, components: usize, sweeps: impl Fn(usize) -> bool) -> Option<&ResultRecord> {
    records
        .iter()
        .filter(|r| r.model == model && r.components == components && sweeps(r.sweep) && r.val_acc.is_some())
        .fold(None, |best: Option<&ResultRecord>, r| match best {
            Some(b) if b.val_acc >= r.val_acc => Some(b),
            _ => Some(r),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendCheck {
    pub components: usize,
    pub expected_winner: ModelKind,
    pub vqc_best: f64,
    pub tn_best: f64,
    pub holds: bool,
}

/// Expected ordering of the best cells: the circuit at 2 and 5
/// components, the tensor network at 16.
pub fn trend_checks(records: &[ResultRecord]) -> Vec<TrendCheck> {
    let aggs = aggregate(records);
    let mut out = Vec::new();
    for (k, winner) in [(2, ModelKind::Vqc), (5, ModelKind::Vqc), (16, ModelKind::Tn)] {
        let (Some(v), Some(t)) = (best_cell(&aggs, ModelKind::Vqc, k), best_cell(&aggs, ModelKind::Tn, k)) else {
            continue;
        };
        let holds = match winner {
            ModelKind::Vqc => v.val_mean >= t.val_mean,
            ModelKind::Tn => t.val_mean >= v.val_mean,
        };
        out.push(TrendCheck {
            components: k,
            expected_winner: winner,
            vqc_best: v.val_mean,
            tn_best: t.val_mean,
            holds,
        });
    }
    out
}

/// Plain-text summary: seed mean with [min, max], best cells, trend flags.
pub fn render(records: &[ResultRecord]) -> String {
    let aggs = aggregate(records);
    let mut s = String::new();
    let _ = writeln!(s, "model components sweep params runs  val_acc mean [min, max]   train_acc  val_f1");
    for a in &aggs {
        let _ = writeln!(
            s,
            "{:<5} {:>10} {:>5} {:>6} {:>4}  {:.4} [{:.4}, {:.4}]    {:.4}     {:.4}{}",
            a.model.name(),
            a.components,
            a.sweep,
            a.param_count,
            a.runs,
            a.val_mean,
            a.val_min,
            a.val_max,
            a.train_mean,
            a.val_f1_mean,
            if a.failed > 0 { format!("  ({} failed)", a.failed) } else { String::new() }
        );
    }
    let failed: Vec<&ResultRecord> = records.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        let _ = writeln!(s, "failed: {} k={} sweep={} seed={}: {}", r.model, r.components, r.sweep, r.seed, r.status);
    }
    let mut comps: Vec<usize> = aggs.iter().map(|a| a.components).collect();
    comps.sort_unstable();
    comps.dedup();
    let _ = writeln!(s);
    for k in comps {
        for model in [ModelKind::Tn, ModelKind::Vqc] {
            if let Some(b) = best_cell(&aggs, model, k) {
                let _ = writeln!(
                    s,
                    "best {:<3} at {:>2} components: sweep {} ({} params), val_acc {:.4} [{:.4}, {:.4}]",
                    model.name(),
                    k,
                    b.sweep,
                    b.param_count,
                    b.val_mean,
                    b.val_min,
                    b.val_max
                );
            }
        }
    }
    let checks = trend_checks(records);
    if !checks.is_empty() {
        let _ = writeln!(s);
    }
    for c in checks {
        let _ = writeln!(
            s,
            "trend {:>2} components: expect {} >= other, vqc {:.4} tn {:.4}: {}",
            c.components,
            c.expected_winner.name(),
            c.vqc_best,
            c.tn_best,
            if c.holds { "holds" } else { "FLAGGED (ordering reversed for this seed set)" }
        );
    }
    s
}
