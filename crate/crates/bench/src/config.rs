//! Experiment configuration: defaults, `key = value` files and overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tnvqc_core::exp_machine::{LossKind, Regularizer};

use crate::{io_err, BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tn,
    Vqc,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Tn => "tn",
            ModelKind::Vqc => "vqc",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tn" => Ok(ModelKind::Tn),
            "vqc" => Ok(ModelKind::Vqc),
            other => Err(BenchError::Config(format!("unknown model {other:?} (expected tn or vqc)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcSettings {
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub batch_size: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnSettings {
    pub epochs: usize,
    pub lr: f64,
    pub lambda: f64,
    pub loss: String,
    pub regularizer: String,
    /// Feed min-max scaled features instead of raw PCA outputs.
    pub scaled: bool,
}

impl TnSettings {
    pub fn loss_kind(&self) -> Result<LossKind> {
        Ok(LossKind::parse(&self.loss)?)
    }

    pub fn regularizer_kind(&self) -> Result<Regularizer> {
        Ok(Regularizer::parse(&self.regularizer)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub models: Vec<ModelKind>,
    pub components: Vec<usize>,
    /// Sweep values for the circuit model.
    pub layers: Vec<usize>,
    /// Sweep values for the tensor-network model.
    pub ranks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub vqc: VqcSettings,
    pub tn: TnSettings,
    pub fit_pca_on_all: bool,
    /// 0 picks the number of available cores.
    pub workers: usize,
    /// Fill the `seconds` column. Off by default so results.csv is reproducible byte for byte.
    pub record_time: bool,
    pub svg: bool,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            models: vec![ModelKind::Tn, ModelKind::Vqc],
            components: vec![2, 5, 10, 16],
            layers: (1..=6).collect(),
            ranks: (1..=8).collect(),
            seeds: vec![0, 1, 2],
            vqc: VqcSettings {
                epochs: 60,
                lr: 0.1,
                decay: 0.95,
                batch_size: 32,
                threshold: 0.5,
            },
            tn: TnSettings {
                epochs: 500,
                lr: 5.0,
                lambda: 0.0,
                loss: "logistic".into(),
                regularizer: "norm".into(),
                scaled: false,
            },
            fit_pca_on_all: false,
            workers: 0,
            record_time: false,
            svg: false,
            dataset: None,
            out: PathBuf::from("results"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| BenchError::Config(format!("{key}: cannot parse {value:?}")))
}

/// Comma-separated list; `a..b` and `a..=b` ranges are expanded.
pub fn parse_list<T>(key: &str, value: &str) -> Result<Vec<T>>
where
    T: FromStr + TryFrom<u64>,
{
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = parse_value(key, lo)?;
            let (hi, inclusive) = match hi.strip_prefix('=') {
                Some(h) => (parse_value::<u64>(key, h)?, true),
                None => (parse_value::<u64>(key, hi)?, false),
            };
            let end = if inclusive { hi + 1 } else { hi };
            for v in lo..end {
                out.push(T::try_from(v).map_err(|_| BenchError::Config(format!("{key}: {v} out of range")))?);
            }
        } else {
            out.push(parse_value(key, item)?);
        }
    }
    Ok(out)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(BenchError::Config(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

impl ExperimentConfig {
    /// Sets one key. `epochs` and `lr` without a model prefix apply to
    /// every selected model.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "model" | "models" => {
                self.models = if v == "all" {
                    vec![ModelKind::Tn, ModelKind::Vqc]
                } else {
                    v.split(',').map(str::parse).collect::<Result<_>>()?
                }
            }
            "components" => self.components = parse_list(&key, v)?,
            "layers" => self.layers = parse_list(&key, v)?,
            "rank" | "ranks" => self.ranks = parse_list(&key, v)?,
            "seed" | "seeds" => self.seeds = parse_list(&key, v)?,
            "epochs" => {
                let e = parse_value(&key, v)?;
                if self.models.contains(&ModelKind::Vqc) {
                    self.vqc.epochs = e;
                }
                if self.models.contains(&ModelKind::Tn) {
                    self.tn.epochs = e;
                }
            }
            "lr" => {
                let lr = parse_value(&key, v)?;
                if self.models.contains(&ModelKind::Vqc) {
                    self.vqc.lr = lr;
                }
                if self.models.contains(&ModelKind::Tn) {
                    self.tn.lr = lr;
                }
            }
            "vqc_epochs" => self.vqc.epochs = parse_value(&key, v)?,
            "vqc_lr" => self.vqc.lr = parse_value(&key, v)?,
            "decay" => self.vqc.decay = parse_value(&key, v)?,
            "batch_size" => self.vqc.batch_size = parse_value(&key, v)?,
            "threshold" => self.vqc.threshold = parse_value(&key, v)?,
            "tn_epochs" => self.tn.epochs = parse_value(&key, v)?,
            "tn_lr" => self.tn.lr = parse_value(&key, v)?,
            "lambda" => self.tn.lambda = parse_value(&key, v)?,
            "loss" => {
                LossKind::parse(v)?;
                self.tn.loss = v.to_string();
            }
            "regularizer" => {
                Regularizer::parse(v)?;
                self.tn.regularizer = v.to_string();
            }
            "tn_scaled" => self.tn.scaled = parse_bool(&key, v)?,
            "fit_pca_on_all" => self.fit_pca_on_all = parse_bool(&key, v)?,
            "workers" => self.workers = parse_value(&key, v)?,
            "record_time" => self.record_time = parse_bool(&key, v)?,
            "svg" => self.svg = parse_bool(&key, v)?,
            "dataset" => self.dataset = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            _ => return Err(BenchError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| BenchError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        self.apply_text(&text)
    }

    pub fn sweep_values(&self, model: ModelKind) -> &[usize] {
        match model {
            ModelKind::Tn => &self.ranks,
            ModelKind::Vqc => &self.layers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.models.is_empty() {
            return fail("no models selected");
        }
        if self.components.is_empty() || self.seeds.is_empty() {
            return fail("components and seeds must be non-empty");
        }
        if let Some(&k) = self.components.iter().find(|&&k| k == 0 || k > tnvqc_core::data::ONE_HOT_WIDTH) {
            return fail(&format!("components value {k} outside 1..=21"));
        }
        for &m in &self.models {
            if self.sweep_values(m).is_empty() {
                return fail(&format!("empty sweep for {m}"));
            }
        }
        if self.ranks.contains(&0) {
            return fail("ranks must be positive");
        }
        if self.models.contains(&ModelKind::Vqc) && self.components.iter().any(|&k| k > tnvqc_core::qsim::MAX_QUBITS) {
            return fail("too many qubits for the simulator");
        }
        self.tn.loss_kind()?;
        self.tn.regularizer_kind()?;
        Ok(())
    }
}
