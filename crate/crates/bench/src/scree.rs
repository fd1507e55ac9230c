//! Explained-variance table of the one-hot car data.

use std::path::Path;

use tnvqc_core::data::one_hot;
use tnvqc_core::fmt_f64;
use tnvqc_core::pca::PcaModel;

use crate::dataset::load_records;
use crate::{io_err, Result};

/// (component index, explained-variance ratio) for the leading
/// `max_components` principal components of the whole one-hot dataset.
pub fn scree_table(dataset: Option<&Path>, max_components: usize) -> Result<Vec<(f64, f64)>> {
    let ds = one_hot(&load_records(dataset)?);
    let pca = PcaModel::fit(ds.features(), max_components)?;
    Ok(pca.scree().into_iter().map(|(i, r)| (i as f64, r)).collect())
}

pub fn scree_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("component,explained_variance_ratio\n");
    for (i, r) in rows {
        out.push_str(&format!("{i:.1},{}\n", fmt_f64(*r)));
    }
    out
}

pub fn emit_scree(dataset: Option<&Path>, max_components: usize, out: &Path) -> Result<Vec<(f64, f64)>> {
    let rows = scree_table(dataset, max_components)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(out, scree_csv(&rows)).map_err(io_err(out))?;
    Ok(rows)
}
