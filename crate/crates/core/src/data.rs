//! Labeled tabular data: CSV ingestion, per-class subsampling and synthetic
//! Gaussian fixtures.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n` labeled points in `D` dimensions drawn from `K` named classes.
///
/// Construction through [`Dataset::new`] enforces: `n >= 1`, `D >= 2`,
/// `K >= 2`, unique class names, every label `< K`, every class present at
/// least twice, and only finite feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Real> {
    features: DMatrix<T>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl<T: Real> Dataset<T> {
    pub fn new(features: DMatrix<T>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        let (n, d) = features.shape();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        if d < 2 {
            return Err(Error::InvalidData(format!(
                "dataset needs at least 2 feature columns, found {d}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidData(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        let k = class_names.len();
        if k < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 classes, found {k}"
            )));
        }
        let mut seen = HashMap::new();
        for name in &class_names {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidData(format!("duplicate class name {name:?}")));
            }
        }
        let mut counts = vec![0usize; k];
        for &label in &labels {
            if label >= k {
                return Err(Error::InvalidData(format!(
                    "label {label} out of range for {k} classes"
                )));
            }
            counts[label] += 1;
        }
        if let Some((c, &count)) = counts.iter().enumerate().find(|(_, &c)| c < 2) {
            return Err(Error::InvalidData(format!(
                "class {:?} has {count} point(s); at least 2 are required",
                class_names[c]
            )));
        }
        for i in 0..n {
            for j in 0..d {
                if !features[(i, j)].is_finite() {
                    return Err(Error::InvalidData(format!(
                        "non-finite feature value at row {i}, column {j}"
                    )));
                }
            }
        }
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    pub fn features(&self) -> &DMatrix<T> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Row indices of `class`, in dataset order.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Feature rows at `indices`, in the given order.
    pub fn rows(&self, indices: &[usize]) -> DMatrix<T> {
        self.features.select_rows(indices)
    }

    /// Sub-dataset made of the rows at `indices`, keeping the class list.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.class_names.clone(),
        )
    }

    /// Replaces the feature matrix, keeping labels and classes.
    pub fn with_features(&self, features: DMatrix<T>) -> Result<Self> {
        Self::new(features, self.labels.clone(), self.class_names.clone())
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Header name; the file must then start with a header row.
    Name(String),
    /// Zero-based column index.
    Index(usize),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `last` selects the final column, a bare integer is a zero-based index,
    /// anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

pub fn load_csv<T: Real>(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

/// Parses comma-separated data with an optional header row. The header is
/// detected when any non-label cell of the first record is not a number.
/// Labels are factorized in first-appearance order.
pub fn read_csv<T: Real, R: Read>(reader: R, label_column: &LabelColumn) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push((i + 1, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(Error::InvalidData("CSV file has no rows".into()));
    };
    let width = first.len();

    let (label_idx, has_header) = match label_column {
        LabelColumn::Name(name) => {
            let idx = first.iter().position(|h| h == name).ok_or_else(|| {
                Error::Config(format!("label column {name:?} not found in header"))
            })?;
            (idx, true)
        }
        LabelColumn::Index(i) => (*i, false),
        LabelColumn::Last => (width.saturating_sub(1), false),
    };
    if label_idx >= width {
        return Err(Error::Config(format!(
            "label column index {label_idx} out of range for {width} columns"
        )));
    }
    let has_header = has_header
        || first
            .iter()
            .enumerate()
            .any(|(j, cell)| j != label_idx && cell.parse::<f64>().is_err());
    let body = if has_header { &records[1..] } else { &records[..] };

    let d = width - 1;
    let mut values = Vec::with_capacity(body.len() * d);
    let mut labels = Vec::with_capacity(body.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    for (row, rec) in body {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *row,
                column: rec.len(),
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: *row,
                column: j + 1,
                message: format!("{cell:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: *row,
                    column: j + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            values.push(T::lit(v));
        }
        let name = &rec[label_idx];
        if name.is_empty() {
            return Err(Error::Parse {
                row: *row,
                column: label_idx + 1,
                message: "empty label".into(),
            });
        }
        let id = *class_ids.entry(name.to_string()).or_insert_with(|| {
            class_names.push(name.to_string());
            class_names.len() - 1
        });
        labels.push(id);
    }
    if labels.is_empty() {
        return Err(Error::InvalidData("CSV file has a header but no data rows".into()));
    }
    let features = DMatrix::from_row_slice(labels.len(), d, &values);
    Dataset::new(features, labels, class_names)
}

/// Writes `x1..xD,label` with a header row; values use shortest round-trip
/// formatting so [`read_csv`] restores them exactly.
pub fn write_csv<T: Real, W: Write>(ds: &Dataset<T>, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::InvalidData(format!("CSV write failed: {e}"));
    let mut header: Vec<String> = (1..=ds.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    wtr.write_record(&header).map_err(to_err)?;
    for i in 0..ds.len() {
        let mut rec: Vec<String> = ds.features.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(ds.class_names[ds.labels[i]].clone());
        wtr.write_record(&rec).map_err(to_err)?;
    }
    wtr.flush()
        .map_err(|e| Error::InvalidData(format!("CSV write failed: {e}")))?;
    Ok(())
}

pub fn save_csv<T: Real>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, std::io::BufWriter::new(file))
}

/// Keeps `min(per_class, class size)` rows of every class, drawn uniformly
/// without replacement. Kept rows stay in their original order.
pub fn stratified_subsample<T: Real>(ds: &Dataset<T>, per_class: usize, seed: u64) -> Result<Dataset<T>> {
    if per_class < 2 {
        return Err(Error::Config(format!(
            "per-class subsample size must be at least 2, got {per_class}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(ds.len());
    for class in 0..ds.num_classes() {
        let members = ds.class_indices(class);
        if members.len() <= per_class {
            keep.extend(members);
        } else {
            let mut picked = rand::seq::index::sample(&mut rng, members.len(), per_class).into_vec();
            picked.sort_unstable();
            keep.extend(picked.into_iter().map(|p| members[p]));
        }
    }
    keep.sort_unstable();
    ds.subset(&keep)
}

/// Isotropic Gaussian classes: row `k` of `means` with standard deviation
/// `scales[k]`, `per_class` points each, classes stored contiguously and named
/// `c0`, `c1`, ...
pub fn generate_gaussian_blobs<T: Real>(
    means: &DMatrix<T>,
    scales: &[T],
    per_class: usize,
    seed: u64,
) -> Result<Dataset<T>> {
    let (k, d) = means.shape();
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 class means, got {k}")));
    }
    if scales.len() != k {
        return Err(Error::Config(format!(
            "{} scales for {k} class means",
            scales.len()
        )));
    }
    if let Some(s) = scales.iter().find(|s| !s.is_finite() || **s <= T::zero()) {
        return Err(Error::Config(format!("class scale must be positive, got {s}")));
    }
    if per_class < 2 {
        return Err(Error::Config(format!(
            "per-class count must be at least 2, got {per_class}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k * per_class;
    let mut features = DMatrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    for class in 0..k {
        for p in 0..per_class {
            let row = class * per_class + p;
            for j in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                features[(row, j)] = means[(class, j)] + scales[class] * T::lit(z);
            }
            labels.push(class);
        }
    }
    let names = (0..k).map(|c| format!("c{c}")).collect();
    Dataset::new(features, labels, names)
}
