//! CSV ingestion, label encoding, fold plans and per-fold z-scoring.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::matrix::{RealMatrix, Rng};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: RealMatrix,
    pub targets_onehot: RealMatrix,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub provenance: Option<String>,
}

impl Dataset {
    /// Builds the one-hot targets from class indices.
    pub fn new(name: impl Into<String>, features: RealMatrix, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let d = class_names.len();
        if features.rows() != labels.len() {
            return argument(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            ));
        }
        if d < 2 {
            return Err(Error::Data(format!("need at least two classes, found {d}")));
        }
        if labels.len() < d {
            return Err(Error::Data(format!("{} rows cannot cover {d} classes", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= d) {
            return argument(format!("label index {bad} out of range for {d} classes"));
        }
        let mut onehot = vec![0.0; labels.len() * d];
        for (i, &l) in labels.iter().enumerate() {
            onehot[i * d + l] = 1.0;
        }
        Ok(Self {
            name: name.into(),
            targets_onehot: RealMatrix::from_vec(labels.len(), d, onehot)?,
            features,
            labels,
            class_names,
            provenance: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    First,
    #[default]
    Last,
    /// Zero-based column index.
    Index(usize),
}

impl LabelColumn {
    fn resolve(self, n_cols: usize) -> Option<usize> {
        match self {
            LabelColumn::First => Some(0),
            LabelColumn::Last => n_cols.checked_sub(1),
            LabelColumn::Index(i) if i < n_cols => Some(i),
            LabelColumn::Index(_) => None,
        }
    }
}

impl FromStr for LabelColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(LabelColumn::First),
            "last" => Ok(LabelColumn::Last),
            other => other
                .parse::<usize>()
                .map(LabelColumn::Index)
                .map_err(|_| Error::Argument(format!("label column must be first, last or an index, got '{s}'"))),
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::First => f.write_str("first"),
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawLabelColumn {
    Index(usize),
    Named(String),
}

impl Serialize for LabelColumn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LabelColumn::Index(i) => RawLabelColumn::Index(*i),
            other => RawLabelColumn::Named(other.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabelColumn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawLabelColumn::deserialize(d)? {
            RawLabelColumn::Index(i) => Ok(LabelColumn::Index(i)),
            RawLabelColumn::Named(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub label_column: LabelColumn,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            label_column: LabelColumn::Last,
            header: true,
        }
    }
}

fn parse_error(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

/// Reads a numeric-feature CSV. Row and column numbers in errors are
/// one-based positions in the file, header included.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut n_cols: Option<usize> = None;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 1;
        if options.header && i == 0 {
            continue;
        }
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cols = *n_cols.get_or_insert(record.len());
        if record.len() != cols {
            return Err(parse_error(
                path,
                line,
                record.len().min(cols) + 1,
                format!("expected {cols} fields, found {}", record.len()),
            ));
        }
        let label_idx = options
            .label_column
            .resolve(cols)
            .ok_or_else(|| parse_error(path, line, cols, format!("label column {} out of range", options.label_column)))?;
        if cols < 2 {
            return Err(parse_error(path, line, 1, "need at least one feature and a label"));
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                if field.is_empty() {
                    return Err(parse_error(path, line, j + 1, "missing label"));
                }
                let idx = match class_names.iter().position(|c| c == field) {
                    Some(k) => k,
                    None => {
                        class_names.push(field.to_string());
                        class_names.len() - 1
                    }
                };
                labels.push(idx);
                continue;
            }
            if field.is_empty() {
                return Err(parse_error(path, line, j + 1, "missing value"));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, j + 1, format!("'{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_error(path, line, j + 1, format!("'{field}' is not finite")));
            }
            data.push(v);
        }
    }
    let Some(cols) = n_cols else {
        return Err(Error::Data(format!("{} has no data rows", path.display())));
    };
    let features = RealMatrix::from_vec(labels.len(), cols - 1, data)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Dataset::new(name, features, labels, class_names)
}

/// Reads a CSV whose every column is a numeric feature.
pub fn load_unlabeled_csv(path: &Path, delimiter: u8, header: bool) -> Result<RealMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut n_cols: Option<usize> = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 1;
        if (header && i == 0) || record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let cols = *n_cols.get_or_insert(record.len());
        if record.len() != cols {
            return Err(parse_error(path, line, record.len().min(cols) + 1, format!("expected {cols} fields, found {}", record.len())));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_error(path, line, j + 1, format!("'{field}' is not a finite number")))?;
            data.push(v);
        }
        rows += 1;
    }
    match n_cols {
        Some(cols) => RealMatrix::from_vec(rows, cols, data),
        None => Err(Error::Data(format!("{} has no data rows", path.display()))),
    }
}

/// Per-directory description of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: Option<String>,
    #[serde(default = "default_file")]
    pub file: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub label_column: LabelColumn,
    #[serde(default = "default_header")]
    pub header: bool,
    #[serde(default)]
    pub provenance: Option<String>,
}

fn default_file() -> String {
    "data.csv".into()
}

fn default_delimiter() -> char {
    ','
}

fn default_header() -> bool {
    true
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self {
            name: None,
            file: default_file(),
            delimiter: default_delimiter(),
            label_column: LabelColumn::Last,
            header: true,
            provenance: None,
        }
    }
}

impl DatasetManifest {
    pub fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!("delimiter '{}' must be ASCII", self.delimiter)));
        }
        Ok(CsvOptions {
            delimiter: self.delimiter as u8,
            label_column: self.label_column,
            header: self.header,
        })
    }
}

/// Loads `dir/manifest.json` if present, then the CSV it names.
pub fn load_dataset_dir(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = if manifest_path.exists() {
        serde_json::from_str::<DatasetManifest>(&fs::read_to_string(&manifest_path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", manifest_path.display())))?
    } else {
        DatasetManifest::default()
    };
    let mut ds = load_csv(&dir.join(&manifest.file), &manifest.csv_options()?)?;
    ds.name = manifest.name.clone().unwrap_or_else(|| {
        dir.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(ds.name.clone())
    });
    ds.provenance = manifest.provenance;
    Ok(ds)
}

/// A directory goes through its manifest; a file is read with `options`.
pub fn load_path(path: &Path, options: &CsvOptions) -> Result<Dataset> {
    if path.is_dir() {
        load_dataset_dir(path)
    } else {
        load_csv(path, options)
    }
}

/// Every subdirectory of `root` holding a data file or manifest, sorted by
/// name.
pub fn discover_datasets(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root)? {
        let p = entry?.path();
        if p.is_dir() && (p.join(MANIFEST_FILE).exists() || p.join(default_file()).exists()) {
            dirs.push(p);
        }
    }
    dirs.sort();
    Ok(dirs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle, then each class in turn deals its rows round-robin over
/// the folds. The fold counter carries over between classes so fold sizes
/// differ by at most one.
pub fn stratified_kfold(ds: &Dataset, n: usize, seed: u64) -> Result<FoldPlan> {
    let k = ds.n_samples();
    if n < 2 {
        return argument(format!("need at least 2 folds, got {n}"));
    }
    if n > k {
        return argument(format!("{n} folds requested for {k} samples"));
    }
    let mut order: Vec<usize> = (0..k).collect();
    Rng::new(seed).shuffle(&mut order);
    let mut assignments = vec![0; k];
    let mut next = 0;
    for class in 0..ds.n_classes() {
        for &i in order.iter().filter(|&&i| ds.labels[i] == class) {
            assignments[i] = next % n;
            next += 1;
        }
    }
    Ok(FoldPlan {
        n_folds: n,
        assignments,
        seed,
    })
}

/// Column means and population standard deviations of a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ZScoreParams {
    pub fn fit(train: &RealMatrix) -> Self {
        let (k, r) = train.shape();
        let mut means = vec![0.0; r];
        let mut stds = vec![0.0; r];
        if k == 0 {
            return Self { means, stds };
        }
        for j in 0..r {
            let col = train.column(j);
            let mean = col.iter().sum::<f64>() / k as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k as f64;
            means[j] = mean;
            let std = var.sqrt();
            // constant columns leave rounding noise in the spread
            stds[j] = if std <= 1e-12 * mean.abs().max(1.0) { 0.0 } else { std };
        }
        Self { means, stds }
    }

    pub fn apply(&self, m: &RealMatrix) -> Result<RealMatrix> {
        if m.cols() != self.means.len() {
            return argument(format!(
                "z-score fitted on {} columns, got {}",
                self.means.len(),
                m.cols()
            ));
        }
        let r = m.cols();
        let data = m
            .as_slice()
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let j = idx % r;
                if self.stds[j] == 0.0 {
                    0.0
                } else {
                    (v - self.means[j]) / self.stds[j]
                }
            })
            .collect();
        RealMatrix::from_vec(m.rows(), r, data)
    }
}

pub fn normalize_fold(train: &RealMatrix, test: &RealMatrix) -> Result<(RealMatrix, RealMatrix, ZScoreParams)> {
    if train.cols() != test.cols() {
        return argument(format!(
            "train has {} columns, test has {}",
            train.cols(),
            test.cols()
        ));
    }
    let params = ZScoreParams::fit(train);
    Ok((params.apply(train)?, params.apply(test)?, params))
}
