//! Labeled point clouds: CSV loading, min-max normalization, stratified
//! splitting, and seeded label-noise injection.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GbsvmError, Result};

/// Binary class label, serialized as +1 / -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    /// Label of a real decision value; exactly zero maps to positive.
    pub fn from_sign(v: f64) -> Label {
        if v < 0.0 {
            Label::Negative
        } else {
            Label::Positive
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Label, String> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

/// How to find the label column in a CSV file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ColumnSelector {
    /// 0-based column index.
    Index(usize),
    /// Header name; implies the file has a header row.
    Name(String),
    /// Rightmost column.
    #[default]
    Last,
}

/// Seeded label-noise description: flip exactly ⌊rate·n⌋ labels.
#[derive(Clone, Copy, Debug)]
pub struct NoiseSpec {
    pub rate: f64,
    pub seed: u64,
}

/// An n×d feature matrix with ±1 labels and stable row ids.
///
/// Ids survive splitting and noise injection, so a row in a derived dataset
/// can always be traced back to its source row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    ids: Vec<u64>,
}

impl Dataset {
    /// Build a dataset from a feature matrix and labels; ids become `0..n`.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Dataset> {
        let n = features.len();
        let ids = (0..n as u64).collect();
        Dataset::from_parts(features, labels, ids)
    }

    pub(crate) fn from_parts(
        features: Vec<Vec<f64>>,
        labels: Vec<Label>,
        ids: Vec<u64>,
    ) -> Result<Dataset> {
        let n = features.len();
        if n < 2 {
            return Err(GbsvmError::InsufficientData { needed: 2, found: n });
        }
        if labels.len() != n {
            return Err(GbsvmError::LengthMismatch { left: n, right: labels.len() });
        }
        if ids.len() != n {
            return Err(GbsvmError::LengthMismatch { left: n, right: ids.len() });
        }
        let d = features[0].len();
        if d == 0 {
            return Err(GbsvmError::EmptyInput("feature matrix has zero columns"));
        }
        for row in &features {
            if row.len() != d {
                return Err(GbsvmError::LengthMismatch { left: d, right: row.len() });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(GbsvmError::InvalidConfig(format!(
                    "feature values must be finite, got {bad}"
                )));
            }
        }
        Ok(Dataset { features, labels, ids })
    }

    /// Load a binary-labeled CSV.
    ///
    /// A header row is assumed when the label column is selected by name, and
    /// auto-detected otherwise: the first row is a header iff any of its
    /// feature cells fails to parse as a number. The label column must hold
    /// exactly two distinct values; `positive_label` (default: the first
    /// distinct value in row order) maps to +1, the other to -1.
    pub fn load_csv(
        path: impl AsRef<Path>,
        label_column: &ColumnSelector,
        positive_label: Option<&str>,
    ) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let records: Vec<csv::StringRecord> =
            reader.records().collect::<std::result::Result<_, _>>()?;
        if records.is_empty() {
            return Err(GbsvmError::InsufficientData { needed: 2, found: 0 });
        }

        let width = records[0].len();
        let (label_idx, has_header) = match label_column {
            ColumnSelector::Index(i) => {
                if *i >= width {
                    return Err(GbsvmError::CsvFormat {
                        row: 1,
                        column: i + 1,
                        message: format!("label column index {i} out of range; file has {width} columns"),
                    });
                }
                (*i, first_row_is_header(&records[0], *i))
            }
            ColumnSelector::Name(name) => {
                let idx = records[0].iter().position(|cell| cell == name).ok_or_else(|| {
                    GbsvmError::CsvFormat {
                        row: 1,
                        column: 0,
                        message: format!("no header column named {name:?}"),
                    }
                })?;
                (idx, true)
            }
            ColumnSelector::Last => {
                let idx = width - 1;
                (idx, first_row_is_header(&records[0], idx))
            }
        };
        if width < 2 {
            return Err(GbsvmError::EmptyInput("csv has no feature columns"));
        }

        let data = &records[has_header as usize..];
        if data.len() < 2 {
            return Err(GbsvmError::InsufficientData { needed: 2, found: data.len() });
        }

        // Distinct raw label values, in first-appearance order.
        let mut distinct: Vec<&str> = Vec::new();
        for record in data {
            let raw = &record[label_idx];
            if !distinct.contains(&raw) {
                distinct.push(raw);
            }
        }
        if distinct.len() != 2 {
            return Err(GbsvmError::LabelCardinality(distinct.len()));
        }
        let positive = match positive_label {
            Some(p) => {
                if !distinct.contains(&p) {
                    return Err(GbsvmError::MissingPositiveLabel(p.to_owned()));
                }
                p
            }
            None => distinct[0],
        };

        let mut features = Vec::with_capacity(data.len());
        let mut labels = Vec::with_capacity(data.len());
        for (i, record) in data.iter().enumerate() {
            let file_row = i + 1 + has_header as usize;
            let mut row = Vec::with_capacity(width - 1);
            for (col, cell) in record.iter().enumerate() {
                if col == label_idx {
                    continue;
                }
                let value: f64 = cell.parse().map_err(|_| GbsvmError::CsvFormat {
                    row: file_row,
                    column: col + 1,
                    message: format!("expected a number, got {cell:?}"),
                })?;
                if !value.is_finite() {
                    return Err(GbsvmError::CsvFormat {
                        row: file_row,
                        column: col + 1,
                        message: format!("non-finite value {cell:?}"),
                    });
                }
                row.push(value);
            }
            features.push(row);
            labels.push(if &record[label_idx] == positive {
                Label::Positive
            } else {
                Label::Negative
            });
        }
        Dataset::new(features, labels)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> {
        self.features.iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }

    /// (positive count, negative count).
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|l| **l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    /// Map from stable row id to current row index.
    pub fn id_index(&self) -> HashMap<u64, usize> {
        self.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect()
    }

    /// Affinely map every feature column onto [0, 1]; constant columns map
    /// to 0. Applying this twice gives bit-identical output.
    pub fn normalize_minmax(&self) -> Dataset {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in &self.features {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        let features = self
            .features
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if hi[j] > lo[j] {
                            (v - lo[j]) / (hi[j] - lo[j])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Dataset { features, labels: self.labels.clone(), ids: self.ids.clone() }
    }

    /// Deterministic stratified split. Each class contributes
    /// `round(train_fraction · count)` rows to the train part, clamped so
    /// both parts keep at least one row per class; both classes must have
    /// at least 2 rows. Row order is preserved.
    pub fn split_train_test(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(GbsvmError::InvalidConfig(format!(
                "train fraction must lie strictly between 0 and 1, got {train_fraction}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_train = vec![false; self.len()];
        for class in [Label::Positive, Label::Negative] {
            let mut members: Vec<usize> =
                (0..self.len()).filter(|&i| self.labels[i] == class).collect();
            if members.len() < 2 {
                return Err(GbsvmError::Stratification {
                    label: i8::from(class),
                    count: members.len(),
                });
            }
            let want = (train_fraction * members.len() as f64).round() as usize;
            let take = want.clamp(1, members.len() - 1);
            members.shuffle(&mut rng);
            for &i in &members[..take] {
                in_train[i] = true;
            }
        }
        Ok((self.select(&in_train, true)?, self.select(&in_train, false)?))
    }

    fn select(&self, mask: &[bool], keep: bool) -> Result<Dataset> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut ids = Vec::new();
        for i in 0..self.len() {
            if mask[i] == keep {
                features.push(self.features[i].clone());
                labels.push(self.labels[i]);
                ids.push(self.ids[i]);
            }
        }
        Dataset::from_parts(features, labels, ids)
    }

    /// Flip the labels of exactly ⌊rate·n⌋ uniformly chosen rows.
    /// Injecting the same spec twice restores the original labels.
    pub fn inject_label_noise(&self, spec: &NoiseSpec) -> Result<Dataset> {
        if !(0.0..=1.0).contains(&spec.rate) {
            return Err(GbsvmError::InvalidConfig(format!(
                "noise rate must lie in [0, 1], got {}",
                spec.rate
            )));
        }
        let k = (spec.rate * self.len() as f64).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let chosen = rand::seq::index::sample(&mut rng, self.len(), k);
        let mut labels = self.labels.clone();
        for i in chosen {
            labels[i] = labels[i].flipped();
        }
        Ok(Dataset { features: self.features.clone(), labels, ids: self.ids.clone() })
    }
}

fn first_row_is_header(first: &csv::StringRecord, label_idx: usize) -> bool {
    first
        .iter()
        .enumerate()
        .any(|(col, cell)| col != label_idx && cell.parse::<f64>().is_err())
}
