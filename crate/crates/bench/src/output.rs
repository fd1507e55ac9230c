//! results.csv, results.json and the plot-data tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tnvqc_core::fmt_f64;

use crate::config::{ExperimentConfig, ModelKind};
use crate::grid::ResultRecord;
use crate::report::{aggregate, Aggregate};
use crate::svg::{LineChart, Series};
use crate::{io_err, BenchError, Result};

pub const RESULTS_HEADER: &str =
    "model,components,sweep,param_count,seed,train_acc,val_acc,train_f1,val_f1,epochs,seconds,final_loss,status";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsFile {
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn results_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let row = [
            r.model.name().to_string(),
            r.components.to_string(),
            r.sweep.to_string(),
            r.param_count.to_string(),
            r.seed.to_string(),
            opt(r.train_acc),
            opt(r.val_acc),
            opt(r.train_f1),
            opt(r.val_f1),
            r.epochs.to_string(),
            opt(r.seconds),
            opt(r.final_loss),
            r.status.clone(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Accuracy against the sweep value.
pub fn accuracy_vs_sweep_csv(aggs: &[Aggregate]) -> String {
    let mut out = String::from("model,components,sweep,param_count,runs,val_acc_mean,val_acc_min,val_acc_max,train_acc_mean\n");
    for a in aggs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            a.model,
            a.components,
            a.sweep,
            a.param_count,
            a.runs,
            fmt_f64(a.val_mean),
            fmt_f64(a.val_min),
            fmt_f64(a.val_max),
            fmt_f64(a.train_mean)
        ));
    }
    out
}

/// Accuracy against the trainable parameter count.
pub fn accuracy_vs_params_csv(aggs: &[Aggregate]) -> String {
    let mut sorted: Vec<&Aggregate> = aggs.iter().collect();
    sorted.sort_by_key(|a| (a.model, a.components, a.param_count, a.sweep));
    let mut out = String::from("model,components,param_count,sweep,runs,val_acc_mean,val_acc_min,val_acc_max\n");
    for a in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            a.model,
            a.components,
            a.param_count,
            a.sweep,
            a.runs,
            fmt_f64(a.val_mean),
            fmt_f64(a.val_min),
            fmt_f64(a.val_max)
        ));
    }
    out
}

fn series(aggs: &[Aggregate], model: ModelKind, x: impl Fn(&Aggregate) -> f64) -> Vec<Series> {
    let mut comps: Vec<usize> = aggs.iter().filter(|a| a.model == model).map(|a| a.components).collect();
    comps.sort_unstable();
    comps.dedup();
    comps
        .into_iter()
        .map(|k| {
            let mut points: Vec<(f64, f64)> = aggs
                .iter()
                .filter(|a| a.model == model && a.components == k)
                .map(|a| (x(a), a.val_mean))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label: format!("{model} {k}"),
                points,
            }
        })
        .collect()
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes every output file into `dir` and returns the paths written.
pub fn write_all(dir: &Path, cfg: &ExperimentConfig, records: &[ResultRecord]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let aggs = aggregate(records);
    let mut written = vec![
        write(dir.join("results.csv"), &results_csv(records))?,
        write(dir.join("accuracy_vs_sweep.csv"), &accuracy_vs_sweep_csv(&aggs))?,
        write(dir.join("accuracy_vs_params.csv"), &accuracy_vs_params_csv(&aggs))?,
        write(dir.join("report.txt"), &crate::report::render(records))?,
    ];
    let json_path = dir.join("results.json");
    let file = ResultsFile {
        config: cfg.clone(),
        records: records.to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).map_err(|source| BenchError::Json {
        path: json_path.clone(),
        source,
    })?;
    written.push(write(json_path, &json)?);
    if cfg.svg {
        let mut models: Vec<ModelKind> = aggs.iter().map(|a| a.model).collect();
        models.dedup();
        for m in models {
            let sweep_name = match m {
                ModelKind::Tn => "rank",
                ModelKind::Vqc => "layers",
            };
            let chart = LineChart {
                title: format!("{m}: validation accuracy vs {sweep_name}"),
                x_label: sweep_name.into(),
                y_label: "validation accuracy".into(),
                log_x: false,
                series: series(&aggs, m, |a| a.sweep as f64),
            };
            written.push(write(dir.join(format!("accuracy_vs_sweep_{m}.svg")), &chart.render())?);
        }
        let mut all = series(&aggs, ModelKind::Tn, |a| a.param_count as f64);
        all.extend(series(&aggs, ModelKind::Vqc, |a| a.param_count as f64));
        let chart = LineChart {
            title: "validation accuracy vs trainable parameters".into(),
            x_label: "parameters".into(),
            y_label: "validation accuracy".into(),
            log_x: true,
            series: all,
        };
        written.push(write(dir.join("accuracy_vs_params.svg"), &chart.render())?);
    }
    Ok(written)
}

pub fn read_results(path: &Path) -> Result<ResultsFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })
}
