//! UCI car records, one-hot encoding, binary labels, seeded splits and
//! min-max scaling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Binary class label, coded as -1 / +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_sign(x: f64) -> Label {
        if x >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

/// The six categorical attributes of the car data, in file order.
/// Each vocabulary is listed alphabetically, which is also the one-hot
/// column order.
pub const CAR_FIELDS: [(&str, &[&str]); 6] = [
    ("buying", &["high", "low", "med", "vhigh"]),
    ("maint", &["high", "low", "med", "vhigh"]),
    ("doors", &["2", "3", "4", "5more"]),
    ("persons", &["2", "4", "more"]),
    ("lug_boot", &["big", "med", "small"]),
    ("safety", &["high", "low", "med"]),
];

pub const ONE_HOT_WIDTH: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarClass {
    Unacc,
    Acc,
    Good,
    VGood,
}

impl CarClass {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "unacc" => CarClass::Unacc,
            "acc" => CarClass::Acc,
            "good" => CarClass::Good,
            "vgood" => CarClass::VGood,
            _ => return None,
        })
    }

    /// `unacc` is the negative class; the three acceptable grades merge into
    /// the positive one.
    pub fn binary_label(self) -> Label {
        match self {
            CarClass::Unacc => Label::Negative,
            _ => Label::Positive,
        }
    }
}

/// One parsed line. `attributes[f]` indexes into `CAR_FIELDS[f].1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawCarRecord {
    pub attributes: [u8; 6],
    pub class: CarClass,
}

impl RawCarRecord {
    pub fn attribute(&self, field: usize) -> &'static str {
        CAR_FIELDS[field].1[self.attributes[field] as usize]
    }
}

/// Parses UCI `car.data` text: seven comma-separated fields per line, no
/// header. Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_car_csv(text: &str) -> Result<Vec<RawCarRecord>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let mut attributes = [0u8; 6];
        for (f, (name, vocab)) in CAR_FIELDS.iter().enumerate() {
            let pos = vocab.iter().position(|v| *v == fields[f]).ok_or_else(|| {
                Error::UnknownCategory {
                    line: line_no,
                    field: name,
                    value: fields[f].to_string(),
                }
            })?;
            attributes[f] = pos as u8;
        }
        let class = CarClass::parse(fields[6]).ok_or_else(|| Error::UnknownCategory {
            line: line_no,
            field: "class",
            value: fields[6].to_string(),
        })?;
        out.push(RawCarRecord { attributes, class });
    }
    Ok(out)
}

/// Where a dataset's feature columns came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    OneHot,
    Pca(usize),
    Scaled,
}

/// Feature matrix (samples x features) with +/-1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<Label>,
    feature_names: Vec<String>,
    provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<Label>,
        feature_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::invalid("one label per sample required"));
        }
        if feature_names.len() != features.cols() {
            return Err(Error::invalid("one name per feature column required"));
        }
        if features.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("features must be finite"));
        }
        Ok(LabeledDataset {
            features,
            labels,
            feature_names,
            provenance,
        })
    }

    /// Builds a dataset from rows, naming features `x0, x1, ..`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged feature rows"));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        LabeledDataset::new(Matrix::from_vec(rows.len(), d, data), labels, names, Provenance::Raw)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let pos = self.labels.iter().filter(|&&l| l == Label::Positive).count();
        pos as f64 / self.len() as f64
    }

    /// Rows picked by `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        let d = self.num_features();
        let mut data = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            data.extend_from_slice(self.features.row(i));
        }
        LabeledDataset {
            features: Matrix::from_vec(indices.len(), d, data),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Same labels, new feature matrix.
    pub fn with_features(
        &self,
        features: Matrix,
        feature_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<LabeledDataset> {
        LabeledDataset::new(features, self.labels.clone(), feature_names, provenance)
    }
}

/// 21 indicator columns in `CAR_FIELDS` order with binary labels.
pub fn one_hot(records: &[RawCarRecord]) -> LabeledDataset {
    let mut names = Vec::with_capacity(ONE_HOT_WIDTH);
    let mut offsets = [0usize; 6];
    for (f, (name, vocab)) in CAR_FIELDS.iter().enumerate() {
        offsets[f] = names.len();
        names.extend(vocab.iter().map(|v| format!("{name}={v}")));
    }
    let mut features = Matrix::zeros(records.len(), ONE_HOT_WIDTH);
    for (i, rec) in records.iter().enumerate() {
        for f in 0..6 {
            features[(i, offsets[f] + rec.attributes[f] as usize)] = 1.0;
        }
    }
    LabeledDataset {
        features,
        labels: records.iter().map(|r| r.class.binary_label()).collect(),
        feature_names: names,
        provenance: Provenance::OneHot,
    }
}

/// Seeded shuffle, then the first `round(train_fraction * n)` rows become
/// the training set.
pub fn split(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    let mut indices: Vec<usize> = (0..ds.len()).collect();
    indices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = libm::round(train_fraction * ds.len() as f64) as usize;
    let (train, val) = indices.split_at(n_train);
    Ok((ds.select(train), ds.select(val)))
}

/// Per-column min-max scaler fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::invalid("cannot fit a scaler on zero rows"));
        }
        let mut min = x.row(0).to_vec();
        let mut max = x.row(0).to_vec();
        for i in 1..x.rows() {
            for (j, &v) in x.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    /// Maps each column to [0, 1] by the fitted range, clamping values that
    /// fall outside it. Constant columns map to 0.5; a column whose range is
    /// below 1e-9 of its magnitude counts as constant, so directions that
    /// hold only rounding noise are not blown up. Returns the scaled matrix
    /// and the number of clamped entries.
    pub fn transform(&self, x: &Matrix) -> Result<(Matrix, usize)> {
        if x.cols() != self.min.len() {
            return Err(Error::invalid("scaler column count mismatch"));
        }
        let mut out = x.clone();
        let mut clamped = 0;
        for i in 0..x.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                let magnitude = self.max[j].abs().max(self.min[j].abs()).max(1.0);
                if range <= 1e-9 * magnitude {
                    *v = 0.5;
                    continue;
                }
                let s = (*v - self.min[j]) / range;
                if !(0.0..=1.0).contains(&s) {
                    clamped += 1;
                }
                *v = s.clamp(0.0, 1.0);
            }
        }
        Ok((out, clamped))
    }
}

/// Scales `train` to [0, 1] column-wise and applies the same map to `val`.
/// Returns the scaled pair, the scaler, and how many validation entries
/// were clamped.
pub fn minmax_scale(
    train: &LabeledDataset,
    val: &LabeledDataset,
) -> Result<(LabeledDataset, LabeledDataset, MinMaxScaler, usize)> {
    let scaler = MinMaxScaler::fit(train.features())?;
    let (tx, _) = scaler.transform(train.features())?;
    let (vx, clamped) = scaler.transform(val.features())?;
    if clamped > 0 {
        log::debug!("min-max scaling clamped {clamped} validation entries");
    }
    let names = train.feature_names().to_vec();
    Ok((
        train.with_features(tx, names.clone(), Provenance::Scaled)?,
        val.with_features(vx, names, Provenance::Scaled)?,
        scaler,
        clamped,
    ))
}
