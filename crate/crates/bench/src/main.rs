use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::info;
use tnvqc_bench::config::{ExperimentConfig, ModelKind};
use tnvqc_bench::dataset::{load_records, prepare, write_dataset_csv, CAR_DATA_SHA256};
use tnvqc_bench::grid::{self, Cell};
use tnvqc_bench::{output, report, scree};
use tnvqc_core::data::{one_hot, split};

#[derive(Parser)]
#[command(name = "tnvqc", version, about = "Tensor-network and variational-circuit classifiers on the UCI car data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the dataset and write the preprocessed tables.
    Prepare {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        components: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        fit_pca_on_all: bool,
        #[arg(long, default_value = "prepared")]
        out: PathBuf,
    },
    /// Explained-variance ratios of the leading principal components.
    Scree {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        max_components: usize,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Train and evaluate a single cell.
    Train(GridArgs),
    /// Run the full sweep.
    Grid(GridArgs),
    /// Rebuild tables, plots and the summary from results.json.
    Report {
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// key = value file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tn, vqc or all.
    #[arg(long)]
    model: Option<String>,
    /// Comma list, ranges like 1..=6 allowed.
    #[arg(long)]
    components: Option<String>,
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    rank: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    record_time: bool,
    #[arg(long)]
    fit_pca_on_all: bool,
    /// Extra key=value settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl GridArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let mut pairs: Vec<(&str, String)> = Vec::new();
        if let Some(v) = &self.model {
            pairs.push(("model", v.clone()));
        }
        let lists = [
            ("components", &self.components),
            ("layers", &self.layers),
            ("ranks", &self.rank),
            ("seeds", &self.seed),
        ];
        for (k, v) in lists {
            if let Some(v) = v {
                pairs.push((k, v.clone()));
            }
        }
        let scalars = [
            ("epochs", self.epochs.map(|v| v.to_string())),
            ("lr", self.lr.map(|v| v.to_string())),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("batch_size", self.batch_size.map(|v| v.to_string())),
            ("workers", self.workers.map(|v| v.to_string())),
            ("dataset", self.dataset.as_ref().map(|p| p.display().to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in scalars {
            if let Some(v) = v {
                pairs.push((k, v));
            }
        }
        for (flag, key) in [(self.svg, "svg"), (self.record_time, "record_time"), (self.fit_pca_on_all, "fit_pca_on_all")] {
            if flag {
                pairs.push((key, "true".into()));
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            pairs.push((k, v.to_string()));
        }
        for (k, v) in pairs {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn single_cell(cfg: &ExperimentConfig) -> anyhow::Result<Cell> {
    let [model] = cfg.models[..] else {
        bail!("train needs exactly one --model");
    };
    let [components] = cfg.components[..] else {
        bail!("train needs exactly one --components value");
    };
    let [sweep] = cfg.sweep_values(model)[..] else {
        bail!("train needs exactly one --layers or --rank value");
    };
    let [seed] = cfg.seeds[..] else {
        bail!("train needs exactly one --seed");
    };
    Ok(Cell { model, components, sweep, seed })
}

fn run_train(args: &GridArgs) -> anyhow::Result<()> {
    let mut cfg = args.resolve()?;
    if args.model.is_none() && args.config.is_none() {
        bail!("train needs --model");
    }
    // A lone sweep flag picks the model's single value.
    if args.layers.is_none() && cfg.models == [ModelKind::Vqc] && cfg.layers.len() > 1 {
        bail!("train needs --layers");
    }
    if args.rank.is_none() && cfg.models == [ModelKind::Tn] && cfg.ranks.len() > 1 {
        bail!("train needs --rank");
    }
    if args.seed.is_none() && cfg.seeds.len() > 1 {
        cfg.seeds.truncate(1);
    }
    let cell = single_cell(&cfg)?;
    let records = load_records(cfg.dataset.as_deref())?;
    let data = prepare(&records, cell.components, cell.seed, cfg.fit_pca_on_all)?;
    let (rec, model) = grid::run_cell(cell, &data, &cfg)?;
    let written = output::write_all(&cfg.out, &cfg, std::slice::from_ref(&rec))?;
    if let Some(m) = model {
        let path = cfg.out.join(format!(
            "model_{}_k{}_s{}_seed{}.txt",
            cell.model, cell.components, cell.sweep, cell.seed
        ));
        std::fs::write(&path, m.to_text()).with_context(|| path.display().to_string())?;
        info!("wrote {}", path.display());
    }
    for p in written {
        info!("wrote {}", p.display());
    }
    let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    println!(
        "{} components={} sweep={} seed={} params={} train_acc={} val_acc={} val_f1={} status={}",
        rec.model,
        rec.components,
        rec.sweep,
        rec.seed,
        rec.param_count,
        show(rec.train_acc),
        show(rec.val_acc),
        show(rec.val_f1),
        rec.status
    );
    Ok(())
}

fn run_grid(args: &GridArgs) -> anyhow::Result<()> {
    let cfg = args.resolve()?;
    let rows = grid::run_grid(&cfg)?;
    for p in output::write_all(&cfg.out, &cfg, &rows)? {
        info!("wrote {}", p.display());
    }
    print!("{}", report::render(&rows));
    Ok(())
}

fn run_prepare(
    dataset: Option<&Path>,
    components: Option<usize>,
    seed: u64,
    fit_pca_on_all: bool,
    out: &Path,
) -> anyhow::Result<()> {
    let records = load_records(dataset)?;
    let all = one_hot(&records);
    let (train, val) = split(&all, tnvqc_bench::dataset::TRAIN_FRACTION, seed)?;
    std::fs::create_dir_all(out).with_context(|| out.display().to_string())?;
    write_dataset_csv(&all, &out.join("one_hot.csv"))?;
    println!("records {}", records.len());
    println!("features {}", all.num_features());
    println!("positive_fraction {:.4}", all.positive_fraction());
    println!("split {}/{}", train.len(), val.len());
    if dataset.is_none() {
        println!("sha256 {CAR_DATA_SHA256} (bundled, verified)");
    }
    if let Some(k) = components {
        let p = prepare(&records, k, seed, fit_pca_on_all)?;
        write_dataset_csv(&p.train, &out.join(format!("train_k{k}_seed{seed}.csv")))?;
        write_dataset_csv(&p.val, &out.join(format!("val_k{k}_seed{seed}.csv")))?;
        write_dataset_csv(&p.train_scaled, &out.join(format!("train_scaled_k{k}_seed{seed}.csv")))?;
        write_dataset_csv(&p.val_scaled, &out.join(format!("val_scaled_k{k}_seed{seed}.csv")))?;
        println!("clamped_validation_values {}", p.clamped);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Prepare {
            dataset,
            components,
            seed,
            fit_pca_on_all,
            out,
        } => run_prepare(dataset.as_deref(), components, seed, fit_pca_on_all, &out),
        Command::Scree {
            dataset,
            max_components,
            out,
        } => {
            let path = out.join("scree.csv");
            let rows = scree::emit_scree(dataset.as_deref(), max_components, &path)?;
            for (i, r) in rows {
                println!("{i:>4.1}  {r:.6}");
            }
            info!("wrote {}", path.display());
            Ok(())
        }
        Command::Train(args) => run_train(&args),
        Command::Grid(args) => run_grid(&args),
        Command::Report { out, svg } => {
            let file = output::read_results(&out.join("results.json"))?;
            let mut cfg = file.config;
            cfg.svg |= svg;
            output::write_all(&out, &cfg, &file.records)?;
            print!("{}", report::render(&file.records));
            Ok(())
        }
    }
}
