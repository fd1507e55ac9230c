//! The bundled UCI car data and the per-cell preprocessing chain.

use std::path::Path;

use log::{info, warn};
use sha2::{Digest, Sha256};
use tnvqc_core::data::{minmax_scale, one_hot, parse_car_csv, split, LabeledDataset, RawCarRecord, ONE_HOT_WIDTH};
use tnvqc_core::pca::PcaModel;

use crate::{io_err, BenchError, Result};

pub const CAR_DATA: &str = include_str!("../data/car.data");
pub const CAR_DATA_SHA256: &str = "b703a9ac69f11e64ce8c223c0a40de4d2e9d769f7fb20be5f8f2e8a619893d83";
pub const CAR_RECORDS: usize = 1728;
pub const TRAIN_FRACTION: f64 = 0.8;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses the bundled copy after checking its digest.
pub fn bundled_records() -> Result<Vec<RawCarRecord>> {
    let found = sha256_hex(CAR_DATA.as_bytes());
    if found != CAR_DATA_SHA256 {
        return Err(BenchError::Checksum {
            path: "<bundled car.data>".into(),
            expected: CAR_DATA_SHA256.into(),
            found,
        });
    }
    Ok(parse_car_csv(CAR_DATA)?)
}

/// Reads `path`, or the bundled copy when `None`. A file whose digest
/// differs from the bundled one is accepted with a warning.
pub fn load_records(path: Option<&Path>) -> Result<Vec<RawCarRecord>> {
    let Some(path) = path else {
        return bundled_records();
    };
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let digest = sha256_hex(text.as_bytes());
    if digest == CAR_DATA_SHA256 {
        info!("{}: checksum verified", path.display());
    } else {
        warn!("{}: sha256 {digest} differs from the reference copy", path.display());
    }
    parse_car_csv(&text).map_err(BenchError::from)
}

/// Train/validation data for one (components, seed) pair.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub components: usize,
    pub seed: u64,
    /// PCA outputs (or one-hot columns when no reduction is applied).
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    /// The same data min-max scaled to [0, 1] with the training ranges.
    pub train_scaled: LabeledDataset,
    pub val_scaled: LabeledDataset,
    pub pca: Option<PcaModel>,
    pub clamped: usize,
}

/// one-hot, seeded 80/20 split, PCA to `components` (skipped at the full
/// one-hot width), then min-max scaling. PCA is fitted on the training
/// part unless `fit_pca_on_all` is set.
pub fn prepare(
    records: &[RawCarRecord],
    components: usize,
    seed: u64,
    fit_pca_on_all: bool,
) -> Result<PreparedSplit> {
    if components == 0 || components > ONE_HOT_WIDTH {
        return Err(BenchError::Config(format!(
            "components must lie in 1..={ONE_HOT_WIDTH}, got {components}"
        )));
    }
    let all = one_hot(records);
    let (train, val) = split(&all, TRAIN_FRACTION, seed)?;
    let (train, val, pca) = if components < ONE_HOT_WIDTH {
        let basis = if fit_pca_on_all { &all } else { &train };
        let pca = PcaModel::fit(basis.features(), components)?;
        (pca.transform_dataset(&train)?, pca.transform_dataset(&val)?, Some(pca))
    } else {
        (train, val, None)
    };
    let (train_scaled, val_scaled, _, clamped) = minmax_scale(&train, &val)?;
    Ok(PreparedSplit {
        components,
        seed,
        train,
        val,
        train_scaled,
        val_scaled,
        pca,
        clamped,
    })
}

/// Writes a dataset as CSV: feature columns then `label` (+1 / -1).
pub fn write_dataset_csv(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = ds.feature_names().join(",");
    out.push_str(",label\n");
    for i in 0..ds.len() {
        let row: Vec<String> = ds.sample(i).iter().map(|v| tnvqc_core::fmt_f64(*v)).collect();
        out.push_str(&row.join(","));
        out.push_str(&format!(",{}\n", ds.labels()[i].as_i8()));
    }
    std::fs::write(path, out).map_err(io_err(path))
}
