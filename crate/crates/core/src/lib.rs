//! Class-pair scatterplot matrices for multiclass classification diagnostics.
//!
//! For every pair of classes the crate computes two orthogonal Fisher
//! discriminant axes and projects the whole dataset onto them, estimates how
//! far that view can be trusted with out-of-bag bootstrap ROC curves, and lays
//! the results out as a matrix figure: class discs on the diagonal, scatter
//! cells below it and the matching ROC cells mirrored above it.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root pin the common `f64` instantiation.

pub use nalgebra;

pub mod data;
pub mod error;
pub mod evaluation;
pub mod pipeline;
pub mod projection;
pub mod render;
pub mod scalar;

pub use data::{generate_gaussian_blobs, load_csv, read_csv, save_csv, stratified_subsample, write_csv, LabelColumn};
pub use error::{Error, ErrorClass, Result};
pub use evaluation::{auc_pair_count_oracle, bootstrap_aucba, confusion_matrix, roc_curve, ConfusionMatrix};
pub use pipeline::{export_model_json, import_model_json, run, RunConfig};
pub use projection::{deflate, fisher_lda_axis, pair_projection, pca_reduce, DEFAULT_RIDGE};
pub use render::{render_classsplom, render_roc_cell, render_scatter_cell, ClassSplomModel, RenderOptions, SvgDocument};
pub use scalar::Real;

pub type Dataset = data::Dataset<f64>;
pub type Dataset32 = data::Dataset<f32>;
pub type PcaModel = projection::PcaModel<f64>;
pub type LinearAxis = projection::LinearAxis<f64>;
pub type PairProjection = projection::PairProjection<f64>;
pub type RocCurve = evaluation::RocCurve<f64>;
pub type BootstrapRocSummary = evaluation::BootstrapRocSummary<f64>;
pub type Model = render::ClassSplomModel<f64>;
pub type Model32 = render::ClassSplomModel<f32>;
