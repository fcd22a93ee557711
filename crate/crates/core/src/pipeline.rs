//! End-to-end run: ingest, subsample, PCA, pairwise projections, bootstrap
//! evaluation, SVG and JSON export.
//!
//! Stage order is fixed: subsampling happens before PCA, and PCA before the
//! discriminant projections. The confusion matrix, when predictions are given,
//! is computed on all input rows before subsampling.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, stratified_subsample, Dataset, LabelColumn};
use crate::error::{Error, Result};
use crate::evaluation::{bootstrap_aucba, confusion_matrix, BootstrapRocSummary, ConfusionMatrix, RocCurve};
use crate::projection::{pair_projection, pca_reduce, LinearAxis, PairProjection, DEFAULT_RIDGE};
use crate::render::{default_palette, render_classsplom, ClassSplomModel, PairEntry, RenderOptions, SvgDocument, DEFAULT_CELL_SIZE};
use crate::scalar::Real;

pub const DEFAULT_BOOTSTRAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Header name, zero-based index, or `last`.
    pub label_column: String,
    /// One predicted class name per input row.
    pub predictions: Option<PathBuf>,
    pub per_class: Option<usize>,
    pub pca_dims: Option<usize>,
    pub ridge: f64,
    pub bootstrap: usize,
    pub seed: u64,
    pub output_svg: PathBuf,
    pub output_json: PathBuf,
    pub cell_size: f64,
    pub annotate_auc: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output_svg: impl Into<PathBuf>, output_json: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            label_column: "last".into(),
            predictions: None,
            per_class: None,
            pca_dims: None,
            ridge: DEFAULT_RIDGE,
            bootstrap: DEFAULT_BOOTSTRAP,
            seed: 0,
            output_svg: output_svg.into(),
            output_json: output_json.into(),
            cell_size: DEFAULT_CELL_SIZE,
            annotate_auc: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bootstrap == 0 {
            return Err(Error::Config("bootstrap replicate count must be at least 1".into()));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::Config(format!("ridge must be finite and nonnegative, got {}", self.ridge)));
        }
        if !self.cell_size.is_finite() || self.cell_size <= 0.0 {
            return Err(Error::Config(format!("cell size must be positive, got {}", self.cell_size)));
        }
        if matches!(self.per_class, Some(p) if p < 2) {
            return Err(Error::Config("per-class subsample size must be at least 2".into()));
        }
        if matches!(self.pca_dims, Some(k) if k < 2) {
            return Err(Error::Config("PCA dimension must be at least 2".into()));
        }
        Ok(())
    }

    pub fn render_options(&self) -> RenderOptions {
        RenderOptions {
            cell_size: self.cell_size,
            annotate_auc: self.annotate_auc,
            ..RenderOptions::default()
        }
    }
}

/// Bootstrap seed for one class pair, mixed so pairs draw unrelated streams.
pub fn pair_seed(seed: u64, class_a: usize, class_b: usize) -> u64 {
    let mut z = seed ^ ((class_a as u64) << 32 | class_b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs every stage after ingestion. `predictions` holds one class index per
/// row of `ds`.
pub fn build_model<T: Real>(ds: &Dataset<T>, predictions: Option<&[usize]>, config: &RunConfig) -> Result<ClassSplomModel<T>> {
    config.validate()?;
    let confusion = predictions
        .map(|pred| confusion_matrix(ds.labels(), pred, ds.num_classes()))
        .transpose()?;

    let sampled = match config.per_class {
        Some(per_class) => stratified_subsample(ds, per_class, config.seed)?,
        None => ds.clone(),
    };
    let reduced = match config.pca_dims {
        Some(k) if k > sampled.dim() => {
            return Err(Error::Config(format!(
                "PCA dimension {k} exceeds the {} input features",
                sampled.dim()
            )))
        }
        Some(k) => pca_reduce(&sampled, k)?.0,
        None => sampled,
    };

    let k = reduced.num_classes();
    let ridge = T::lit(config.ridge);
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let pairs = pairs
        .into_par_iter()
        .map(|(a, b)| {
            let projection = pair_projection(&reduced, a, b, ridge)?;
            let summary = bootstrap_aucba(&reduced, a, b, ridge, config.bootstrap, pair_seed(config.seed, a, b))?;
            Ok(PairEntry { projection, summary })
        })
        .collect::<Result<Vec<_>>>()?;

    let model = ClassSplomModel {
        class_names: reduced.class_names().to_vec(),
        palette: default_palette(k),
        pairs,
        confusion,
    };
    model.validate()?;
    Ok(model)
}

/// Reads one predicted class name per line. A leading line that is not a
/// known class is taken as a header when it makes the count one too many.
pub fn load_predictions(path: impl AsRef<Path>, class_names: &[String], rows: usize) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ids: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.len() == rows + 1 && !ids.contains_key(lines[0].1) {
        lines.remove(0);
    }
    if lines.len() != rows {
        return Err(Error::InvalidData(format!(
            "predictions file has {} entries for {rows} data rows",
            lines.len()
        )));
    }
    lines
        .into_iter()
        .map(|(row, name)| {
            ids.get(name).copied().ok_or_else(|| Error::Parse {
                row,
                column: 1,
                message: format!("unknown class {name:?}"),
            })
        })
        .collect()
}

/// Executes the configured pipeline on `f64` data and writes both outputs.
pub fn run(config: &RunConfig) -> Result<ClassSplomModel<f64>> {
    config.validate()?;
    let label: LabelColumn = config.label_column.parse().unwrap_or(LabelColumn::Last);
    let ds: Dataset<f64> = load_csv(&config.input, &label)?;
    let predictions = config
        .predictions
        .as_ref()
        .map(|p| load_predictions(p, ds.class_names(), ds.len()))
        .transpose()?;
    let model = build_model(&ds, predictions.as_deref(), config)?;
    let svg = render_classsplom(&model, &config.render_options())?;
    svg.save(&config.output_svg)?;
    export_model_json(&model, Some(config), &config.output_json)?;
    Ok(model)
}

pub fn render_svg<T: Real>(model: &ClassSplomModel<T>, config: &RunConfig) -> Result<SvgDocument> {
    render_classsplom(model, &config.render_options())
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct ModelJson<T: Real> {
    classes: Vec<String>,
    palette: Vec<String>,
    labels: Vec<usize>,
    pairs: Vec<PairJson<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confusion: Option<ConfusionMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<RunConfig>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct PairJson<T: Real> {
    class_a: usize,
    class_b: usize,
    axis1: Vec<T>,
    axis2: Vec<T>,
    coords: Vec<[T; 2]>,
    observed_roc: RocCurve<T>,
    bootstrap_aucs: Vec<T>,
    aucba: T,
    aucba_std: T,
    bootstrap_rocs: Vec<Vec<(T, T)>>,
}

pub fn model_to_json<T: Real>(model: &ClassSplomModel<T>, config: Option<&RunConfig>) -> Result<String> {
    let labels = model
        .pairs
        .first()
        .map(|p| p.projection.point_class.clone())
        .unwrap_or_default();
    let doc = ModelJson {
        classes: model.class_names.clone(),
        palette: model.palette.clone(),
        labels,
        pairs: model
            .pairs
            .iter()
            .map(|entry| {
                let pp = &entry.projection;
                PairJson {
                    class_a: pp.class_a,
                    class_b: pp.class_b,
                    axis1: pp.axis1.as_slice().to_vec(),
                    axis2: pp.axis2.as_slice().to_vec(),
                    coords: (0..pp.coords.nrows()).map(|i| [pp.coords[(i, 0)], pp.coords[(i, 1)]]).collect(),
                    observed_roc: entry.summary.observed.clone(),
                    bootstrap_aucs: entry.summary.bootstrap_aucs(),
                    aucba: entry.summary.aucba,
                    aucba_std: entry.summary.aucba_std,
                    bootstrap_rocs: entry.summary.bootstrap_curves.iter().map(|c| c.points.clone()).collect(),
                }
            })
            .collect(),
        confusion: model.confusion.clone(),
        config: config.cloned(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_json<T: Real>(text: &str) -> Result<(ClassSplomModel<T>, Option<RunConfig>)> {
    let doc: ModelJson<T> = serde_json::from_str(text)?;
    let pairs = doc
        .pairs
        .into_iter()
        .map(|p| {
            if p.bootstrap_rocs.len() != p.bootstrap_aucs.len() {
                return Err(Error::InvalidData(format!(
                    "pair ({}, {}): {} bootstrap curves but {} AUCs",
                    p.class_a,
                    p.class_b,
                    p.bootstrap_rocs.len(),
                    p.bootstrap_aucs.len()
                )));
            }
            if p.coords.len() != doc.labels.len() {
                return Err(Error::InvalidData(format!(
                    "pair ({}, {}): {} coordinates for {} labels",
                    p.class_a,
                    p.class_b,
                    p.coords.len(),
                    doc.labels.len()
                )));
            }
            let coords = DMatrix::from_fn(p.coords.len(), 2, |i, j| p.coords[i][j]);
            let bootstrap_curves = p
                .bootstrap_rocs
                .into_iter()
                .zip(p.bootstrap_aucs)
                .map(|(points, auc)| RocCurve { points, auc })
                .collect();
            Ok(PairEntry {
                projection: PairProjection {
                    class_a: p.class_a,
                    class_b: p.class_b,
                    axis1: LinearAxis::from_unit(p.axis1)?,
                    axis2: LinearAxis::from_unit(p.axis2)?,
                    coords,
                    point_class: doc.labels.clone(),
                },
                summary: BootstrapRocSummary {
                    observed: p.observed_roc,
                    bootstrap_curves,
                    aucba: p.aucba,
                    aucba_std: p.aucba_std,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = ClassSplomModel {
        class_names: doc.classes,
        palette: doc.palette,
        pairs,
        confusion: doc.confusion,
    };
    model.validate()?;
    Ok((model, doc.config))
}

/// Writes the model (and the run configuration, if any) as pretty JSON.
pub fn export_model_json<T: Real>(model: &ClassSplomModel<T>, config: Option<&RunConfig>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = model_to_json(model, config)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn import_model_json<T: Real>(path: impl AsRef<Path>) -> Result<(ClassSplomModel<T>, Option<RunConfig>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
