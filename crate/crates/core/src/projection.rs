//! PCA reduction and the pairwise Fisher discriminant views.
//!
//! For a class pair `(a, b)` the first axis is the two-class Fisher
//! discriminant. Every point is then deflated along it and the second axis is
//! the discriminant of `a ∪ b` against the remaining classes in that
//! orthogonal complement; with only two classes the second axis falls back to
//! the leading principal component of the deflated data.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default relative ridge: `S_w` is shrunk by `ridge * tr(S_w) / D * I`.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Singular-value ratio below which deflated data is treated as having no
/// variance left.
const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T: Real> {
    pub mean: DVector<T>,
    /// `k × D`, orthonormal rows sorted by decreasing explained variance.
    pub components: DMatrix<T>,
    pub explained_variance: Vec<T>,
}

impl<T: Real> PcaModel<T> {
    /// Fits the top `k` principal components from the SVD of the centered data.
    ///
    /// Each component is oriented so its largest-magnitude entry is positive.
    pub fn fit(features: &DMatrix<T>, k: usize) -> Result<Self> {
        let (n, d) = features.shape();
        let max_k = (n.saturating_sub(1)).min(d);
        if k == 0 || k > max_k {
            return Err(Error::Config(format!(
                "PCA dimension {k} outside 1..={max_k} for {n} points in {d} dimensions"
            )));
        }
        let mean = column_mean(features);
        let centered = center(features, &mean);
        if centered.iter().all(|v| *v == T::zero()) {
            return Err(Error::Degenerate(
                "zero-variance dataset: all points are identical".into(),
            ));
        }
        let (singular, vt) = sorted_svd(centered)?;
        let denom = T::from_usize_lossy(n - 1);
        let mut components = DMatrix::zeros(k, d);
        let mut explained_variance = Vec::with_capacity(k);
        for (row, &(s, idx)) in singular.iter().take(k).enumerate() {
            let mut v = vt.row(idx).transpose();
            orient_largest_positive(&mut v);
            components.set_row(row, &v.transpose());
            explained_variance.push(s * s / denom);
        }
        Ok(Self {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    /// Centered projection onto the components (`n × k`).
    pub fn transform(&self, features: &DMatrix<T>) -> DMatrix<T> {
        center(features, &self.mean) * self.components.transpose()
    }

    pub fn inverse_transform(&self, reduced: &DMatrix<T>) -> DMatrix<T> {
        let mut out = reduced * &self.components;
        for mut row in out.row_iter_mut() {
            row += self.mean.transpose();
        }
        out
    }
}

/// Projects the dataset onto its top `k` principal components.
///
/// The reduced dataset must itself hold at least two features, so `k >= 2`
/// here; use [`PcaModel::fit`] directly for a one-dimensional reduction.
pub fn pca_reduce<T: Real>(ds: &Dataset<T>, k: usize) -> Result<(Dataset<T>, PcaModel<T>)> {
    if k < 2 {
        return Err(Error::Config(format!(
            "PCA dimension {k} would leave fewer than 2 features"
        )));
    }
    let model = PcaModel::fit(ds.features(), k)?;
    let reduced = ds.with_features(model.transform(ds.features()))?;
    Ok((reduced, model))
}

/// Unit-norm direction in feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LinearAxis<T: Real> {
    direction: Vec<T>,
}

impl<T: Real> LinearAxis<T> {
    /// Normalizes `v`; fails for zero or non-finite vectors.
    pub fn new(v: DVector<T>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm <= T::zero() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("axis has zero or non-finite norm".into()));
        }
        Ok(Self {
            direction: (v / norm).iter().copied().collect(),
        })
    }

    /// Accepts an already normalized vector as is (e.g. when deserializing),
    /// rejecting norms further than `1e-6` from one.
    pub fn from_unit(direction: Vec<T>) -> Result<Self> {
        let norm = DVector::from_column_slice(&direction).norm();
        if !norm.is_finite() || (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::InvalidData(format!("axis norm {norm} is not 1")));
        }
        Ok(Self { direction })
    }

    pub fn direction(&self) -> DVector<T> {
        DVector::from_column_slice(&self.direction)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn dot(&self, other: &LinearAxis<T>) -> T {
        self.direction
            .iter()
            .zip(&other.direction)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Scores every row of `points` on this axis.
    pub fn project(&self, points: &DMatrix<T>) -> DVector<T> {
        points * self.direction()
    }

    fn negated(mut self) -> Self {
        for x in &mut self.direction {
            *x = -*x;
        }
        self
    }
}

/// Two-class Fisher discriminant direction
/// `(S_w + ridge * tr(S_w) / D * I)^-1 (mean_a - mean_b)`, oriented so class
/// `a` projects above class `b`.
///
/// When the pooled scatter vanishes entirely (e.g. singleton classes) the
/// direction is the mean difference itself.
pub fn fisher_lda_axis<T: Real>(
    points_a: &DMatrix<T>,
    points_b: &DMatrix<T>,
    ridge: T,
) -> Result<LinearAxis<T>> {
    fisher_direction(points_a, points_b, ridge, None)
}

fn fisher_direction<T: Real>(
    points_a: &DMatrix<T>,
    points_b: &DMatrix<T>,
    ridge: T,
    removed: Option<&LinearAxis<T>>,
) -> Result<LinearAxis<T>> {
    let d = points_a.ncols();
    if points_b.ncols() != d {
        return Err(Error::InvalidData(format!(
            "class point sets have {} and {} columns",
            d,
            points_b.ncols()
        )));
    }
    if points_a.nrows() == 0 || points_b.nrows() == 0 {
        return Err(Error::InvalidData("Fisher LDA needs points in both classes".into()));
    }
    if !ridge.is_finite() || ridge < T::zero() {
        return Err(Error::Config(format!("ridge must be finite and nonnegative, got {ridge}")));
    }

    let mean_a = column_mean(points_a);
    let mean_b = column_mean(points_b);
    let mut diff = &mean_a - &mean_b;
    if let Some(axis) = removed {
        let w = axis.direction();
        let along = diff.dot(&w);
        diff.axpy(-along, &w, T::one());
    }
    let diff_scale = mean_a.norm().max(mean_b.norm());
    if diff.norm() <= T::default_epsilon() * T::lit(16.0) * diff_scale {
        return Err(Error::Degenerate(
            "class means coincide: no discriminating direction".into(),
        ));
    }

    let ca = center(points_a, &mean_a);
    let cb = center(points_b, &mean_b);
    let mut scatter = ca.tr_mul(&ca) + cb.tr_mul(&cb);
    let trace = scatter.trace();

    let raw = if trace <= T::zero() {
        diff.clone()
    } else {
        let shrink = ridge * trace / T::from_usize_lossy(d);
        for i in 0..d {
            scatter[(i, i)] += shrink;
        }
        if let Some(axis) = removed {
            // Pin the removed direction to a positive eigenvalue so the solve
            // happens in its orthogonal complement.
            let w = axis.direction();
            scatter.ger(trace / T::from_usize_lossy(d), &w, &w, T::one());
        }
        solve_spd(scatter, &diff)?
    };

    let mut raw = raw;
    if let Some(axis) = removed {
        let w = axis.direction();
        let along = raw.dot(&w);
        raw.axpy(-along, &w, T::one());
    }
    let axis = LinearAxis::new(raw)?;
    // The sign is fixed on the original mean difference.
    if axis.direction().dot(&(&mean_a - &mean_b)) < T::zero() {
        Ok(axis.negated())
    } else {
        Ok(axis)
    }
}

fn solve_spd<T: Real>(matrix: DMatrix<T>, rhs: &DVector<T>) -> Result<DVector<T>> {
    let max_diag = matrix.diagonal().iter().fold(T::zero(), |m, &v| m.max(v));
    let chol = matrix.cholesky().ok_or_else(|| {
        Error::Degenerate("within-class scatter is singular; use a positive ridge".into())
    })?;
    let floor = T::default_epsilon() * T::lit(16.0) * max_diag;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| l[(i, i)] * l[(i, i)] <= floor) {
        return Err(Error::Degenerate(
            "within-class scatter is numerically singular; use a positive ridge".into(),
        ));
    }
    Ok(chol.solve(rhs))
}

/// Between-class over within-class variance of the data projected on `direction`.
pub fn fisher_ratio<T: Real>(points_a: &DMatrix<T>, points_b: &DMatrix<T>, direction: &DVector<T>) -> T {
    let pa = points_a * direction;
    let pb = points_b * direction;
    let ma = pa.mean();
    let mb = pb.mean();
    let within = pa.iter().map(|&x| (x - ma) * (x - ma)).fold(T::zero(), |s, v| s + v)
        + pb.iter().map(|&x| (x - mb) * (x - mb)).fold(T::zero(), |s, v| s + v);
    (ma - mb) * (ma - mb) / within
}

/// Removes each row's component along `axis`: `x - (x·w) w`.
pub fn deflate<T: Real>(points: &DMatrix<T>, axis: &LinearAxis<T>) -> DMatrix<T> {
    let w = axis.direction();
    let scores = points * &w;
    let mut out = points.clone();
    out.ger(-T::one(), &scores, &w, T::one());
    out
}

/// Both discriminant axes for one class pair and the coordinates of every
/// point of the dataset on them.
#[derive(Debug, Clone, PartialEq)]
pub struct PairProjection<T: Real> {
    pub class_a: usize,
    pub class_b: usize,
    pub axis1: LinearAxis<T>,
    pub axis2: LinearAxis<T>,
    /// `n × 2`: column 0 on `axis1`, column 1 on `axis2`.
    pub coords: DMatrix<T>,
    pub point_class: Vec<usize>,
}

impl<T: Real> PairProjection<T> {
    /// Mean `axis`-coordinate (0 or 1) of the points of `class`.
    pub fn class_mean(&self, class: usize, axis: usize) -> T {
        let (sum, count) = self
            .point_class
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .fold((T::zero(), 0usize), |(s, c), (i, _)| (s + self.coords[(i, axis)], c + 1));
        sum / T::from_usize_lossy(count.max(1))
    }
}

pub fn pair_projection<T: Real>(ds: &Dataset<T>, class_a: usize, class_b: usize, ridge: T) -> Result<PairProjection<T>> {
    let k = ds.num_classes();
    if class_a == class_b || class_a >= k || class_b >= k {
        return Err(Error::Config(format!(
            "invalid class pair ({class_a}, {class_b}) for {k} classes"
        )));
    }
    let idx_a = ds.class_indices(class_a);
    let idx_b = ds.class_indices(class_b);
    let axis1 = fisher_lda_axis(&ds.rows(&idx_a), &ds.rows(&idx_b), ridge)?;
    let deflated = deflate(ds.features(), &axis1);

    let axis2 = if k > 2 {
        let (pair, rest): (Vec<usize>, Vec<usize>) = (0..ds.len())
            .partition(|&i| ds.labels()[i] == class_a || ds.labels()[i] == class_b);
        fisher_direction(
            &deflated.select_rows(&pair),
            &deflated.select_rows(&rest),
            ridge,
            Some(&axis1),
        )?
    } else {
        leading_orthogonal_component(ds.features(), &deflated, &axis1)?
    };

    let coords = DMatrix::from_columns(&[axis1.project(ds.features()), axis2.project(ds.features())]);
    Ok(PairProjection {
        class_a,
        class_b,
        axis1,
        axis2,
        coords,
        point_class: ds.labels().to_vec(),
    })
}

fn leading_orthogonal_component<T: Real>(
    original: &DMatrix<T>,
    deflated: &DMatrix<T>,
    axis1: &LinearAxis<T>,
) -> Result<LinearAxis<T>> {
    let reference = center(original, &column_mean(original)).norm();
    let (singular, vt) = sorted_svd(center(deflated, &column_mean(deflated)))?;
    let (top, idx) = singular[0];
    if !top.is_finite() || top <= T::lit(RANK_TOLERANCE) * reference {
        return Err(Error::Degenerate(
            "no orthogonal variance: data is rank one along the discriminant axis".into(),
        ));
    }
    let mut v = vt.row(idx).transpose();
    let along = v.dot(&axis1.direction());
    v.axpy(-along, &axis1.direction(), T::one());
    orient_largest_positive(&mut v);
    LinearAxis::new(v)
}

/// Singular values paired with their row index in `V^T`, largest first.
type RankedSvd<T> = (Vec<(T, usize)>, DMatrix<T>);

fn sorted_svd<T: Real>(matrix: DMatrix<T>) -> Result<RankedSvd<T>> {
    let svd = SVD::new(matrix, false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD did not produce right singular vectors".into()))?;
    let mut singular: Vec<(T, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    singular.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    Ok((singular, vt))
}

fn orient_largest_positive<T: Real>(v: &mut DVector<T>) {
    let mut best = T::zero();
    let mut sign_negative = false;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign_negative = x < T::zero();
        }
    }
    if sign_negative {
        v.neg_mut();
    }
}

pub(crate) fn column_mean<T: Real>(m: &DMatrix<T>) -> DVector<T> {
    let n = T::from_usize_lossy(m.nrows().max(1));
    m.row_sum().transpose() / n
}

fn center<T: Real>(m: &DMatrix<T>, mean: &DVector<T>) -> DMatrix<T> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= mean.transpose();
    }
    out
}
