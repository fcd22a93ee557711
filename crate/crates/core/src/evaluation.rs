//! ROC curves, bootstrap AUC averages and confusion-matrix statistics.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::projection::fisher_lda_axis;
use crate::scalar::Real;

/// Bootstrap replicates whose out-of-bag set misses a class are redrawn at
/// most this many times.
pub const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RocCurve<T: Real> {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct threshold.
    pub points: Vec<(T, T)>,
    pub auc: T,
}

impl<T: Real> RocCurve<T> {
    /// Trapezoidal area under `points`.
    pub fn trapezoid_area(points: &[(T, T)]) -> T {
        let half = T::lit(0.5);
        points.windows(2).fold(T::zero(), |acc, w| {
            acc + (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * half
        })
    }
}

fn check_labels(len: usize, is_positive: &[bool]) -> Result<(usize, usize)> {
    if len != is_positive.len() {
        return Err(Error::InvalidData(format!(
            "{len} scores for {} labels",
            is_positive.len()
        )));
    }
    let pos = is_positive.iter().filter(|&&p| p).count();
    let neg = len - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidData(
            "ROC needs at least one positive and one negative".into(),
        ));
    }
    Ok((pos, neg))
}

/// Sweeps the threshold from `+inf` down through the distinct scores. Tied
/// scores enter together, giving a diagonal step and half credit in the area.
pub fn roc_curve<T: Real>(scores: &[T], is_positive: &[bool]) -> Result<RocCurve<T>> {
    let (pos, neg) = check_labels(scores.len(), is_positive)?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidData("ROC scores must be finite".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap_or(Ordering::Equal));

    let (p, n) = (T::from_usize_lossy(pos), T::from_usize_lossy(neg));
    let mut points = vec![(T::zero(), T::zero())];
    // Twice the area in units of one positive-negative pair.
    let mut doubled_area: u128 = 0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (tp_prev, fp_prev) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if is_positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        doubled_area += ((fp - fp_prev) * (tp + tp_prev)) as u128;
        points.push((T::from_usize_lossy(fp) / n, T::from_usize_lossy(tp) / p));
    }
    let pairs = (2 * pos * neg) as u128;
    let auc = T::lit(doubled_area as f64 / pairs as f64);
    Ok(RocCurve { points, auc })
}

/// Mann-Whitney statistic by exhaustive pair counting (ties count one half).
pub fn auc_pair_count_oracle<T: Real>(scores: &[T], is_positive: &[bool]) -> Result<T> {
    let (pos, neg) = check_labels(scores.len(), is_positive)?;
    let positives = scores.iter().zip(is_positive).filter(|(_, &p)| p);
    let mut doubled: u128 = 0;
    for (&sp, _) in positives {
        for (&sn, _) in scores.iter().zip(is_positive).filter(|(_, &p)| !p) {
            if sp > sn {
                doubled += 2;
            } else if sp == sn {
                doubled += 1;
            }
        }
    }
    Ok(T::lit(doubled as f64 / (2 * pos * neg) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BootstrapRocSummary<T: Real> {
    pub observed: RocCurve<T>,
    pub bootstrap_curves: Vec<RocCurve<T>>,
    /// Mean of the bootstrap AUCs.
    pub aucba: T,
    /// Population standard deviation of the bootstrap AUCs.
    pub aucba_std: T,
}

impl<T: Real> BootstrapRocSummary<T> {
    /// Builds the summary, deriving mean and spread from the curves.
    pub fn from_curves(observed: RocCurve<T>, bootstrap_curves: Vec<RocCurve<T>>) -> Self {
        let (aucba, aucba_std) = mean_and_std(bootstrap_curves.iter().map(|c| c.auc));
        Self {
            observed,
            bootstrap_curves,
            aucba,
            aucba_std,
        }
    }

    pub fn replicates(&self) -> usize {
        self.bootstrap_curves.len()
    }

    pub fn bootstrap_aucs(&self) -> Vec<T> {
        self.bootstrap_curves.iter().map(|c| c.auc).collect()
    }
}

fn mean_and_std<T: Real>(values: impl Iterator<Item = T> + Clone) -> (T, T) {
    let count = values.clone().count();
    if count == 0 {
        return (T::zero(), T::zero());
    }
    let n = T::from_usize_lossy(count);
    let mean = values.clone().fold(T::zero(), |s, v| s + v) / n;
    let var = values.fold(T::zero(), |s, v| s + (v - mean) * (v - mean)) / n;
    (mean, var.sqrt())
}

/// Observed ROC of the pair's discriminant scores (positives = `class_a`)
/// plus `replicates` out-of-bag bootstrap ROCs.
///
/// Each replicate resamples both classes with replacement at their original
/// sizes, refits the discriminant on the resample and scores the points left
/// out of it. Replicate `r` draws from its own ChaCha stream keyed by
/// `(seed, r)`, so results do not depend on scheduling.
pub fn bootstrap_aucba<T: Real>(
    ds: &Dataset<T>,
    class_a: usize,
    class_b: usize,
    ridge: T,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapRocSummary<T>> {
    let k = ds.num_classes();
    if class_a == class_b || class_a >= k || class_b >= k {
        return Err(Error::Config(format!(
            "invalid class pair ({class_a}, {class_b}) for {k} classes"
        )));
    }
    if replicates == 0 {
        return Err(Error::Config("bootstrap needs at least one replicate".into()));
    }
    let points_a = ds.rows(&ds.class_indices(class_a));
    let points_b = ds.rows(&ds.class_indices(class_b));
    let (m_a, m_b) = (points_a.nrows(), points_b.nrows());

    let axis = fisher_lda_axis(&points_a, &points_b, ridge)?;
    let mut scores: Vec<T> = axis.project(&points_a).iter().copied().collect();
    scores.extend(axis.project(&points_b).iter().copied());
    let labels: Vec<bool> = (0..m_a + m_b).map(|i| i < m_a).collect();
    let observed = roc_curve(&scores, &labels)?;

    let curves = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            for _ in 0..MAX_REDRAWS {
                let (in_a, oob_a) = resample(&mut rng, m_a);
                let (in_b, oob_b) = resample(&mut rng, m_b);
                if oob_a.is_empty() || oob_b.is_empty() {
                    continue;
                }
                let axis = fisher_lda_axis(
                    &points_a.select_rows(&in_a),
                    &points_b.select_rows(&in_b),
                    ridge,
                )?;
                let mut scores: Vec<T> = axis.project(&points_a.select_rows(&oob_a)).iter().copied().collect();
                scores.extend(axis.project(&points_b.select_rows(&oob_b)).iter().copied());
                let labels: Vec<bool> = (0..scores.len()).map(|i| i < oob_a.len()).collect();
                return roc_curve(&scores, &labels);
            }
            Err(Error::Degenerate(format!(
                "bootstrap replicate {r}: no out-of-bag points in both classes after {MAX_REDRAWS} draws"
            )))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BootstrapRocSummary::from_curves(observed, curves))
}

/// Indices drawn with replacement (`size` draws from `0..size`) and the
/// sorted indices never drawn.
fn resample(rng: &mut ChaCha8Rng, size: usize) -> (Vec<usize>, Vec<usize>) {
    let mut drawn = vec![false; size];
    let picks = (0..size)
        .map(|_| {
            let i = rng.random_range(0..size);
            drawn[i] = true;
            i
        })
        .collect();
    let oob = (0..size).filter(|&i| !drawn[i]).collect();
    (picks, oob)
}

/// `counts[i][j]`: points of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    /// Per predicted class: diagonal over column sum (0 for an empty column).
    pub precision: Vec<f64>,
    /// Per true class: diagonal over row sum (0 for an empty row).
    pub recall: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidData("confusion counts must be square".into()));
        }
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let mut out = Self {
            counts,
            precision: Vec::new(),
            recall: Vec::new(),
        };
        let (rows, cols) = (out.true_totals(), out.predicted_totals());
        out.precision = (0..k).map(|j| ratio(out.counts[j][j], cols[j])).collect();
        out.recall = (0..k).map(|i| ratio(out.counts[i][i], rows[i])).collect();
        Ok(out)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    /// Row sums: number of points per true class.
    pub fn true_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// Column sums: number of points per predicted class.
    pub fn predicted_totals(&self) -> Vec<u64> {
        (0..self.num_classes())
            .map(|j| self.counts.iter().map(|row| row[j]).sum())
            .collect()
    }
}

pub fn confusion_matrix(true_labels: &[usize], predicted_labels: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::InvalidData(format!(
            "{} true labels but {} predictions",
            true_labels.len(),
            predicted_labels.len()
        )));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        if t >= k || p >= k {
            return Err(Error::InvalidData(format!(
                "label pair ({t}, {p}) out of range for {k} classes"
            )));
        }
        counts[t][p] += 1;
    }
    ConfusionMatrix::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn perfect_separation_curve() {
        let roc = roc_curve(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(
            roc.points,
            vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(roc.auc, 1.0);
    }

    #[test]
    fn all_ties_give_diagonal() {
        let roc = roc_curve(&[0.3; 5], &[true, false, false, true, false]).unwrap();
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(roc.auc, 0.5);
        assert_eq!(auc_pair_count_oracle(&[0.3; 5], &[true, false, false, true, false]).unwrap(), 0.5);
    }

    #[test]
    fn three_of_four_pairs() {
        let scores = [0.8, 0.6, 0.4, 0.2];
        let labels = [true, false, true, false];
        assert_eq!(roc_curve(&scores, &labels).unwrap().auc, 0.75);
        assert_eq!(auc_pair_count_oracle(&scores, &labels).unwrap(), 0.75);
        assert_eq!(auc_pair_count_oracle(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap(), 1.0);
    }

    #[test]
    fn roc_errors() {
        assert!(roc_curve(&[1.0, 2.0], &[true, true]).is_err());
        assert!(roc_curve(&[1.0, 2.0], &[false, false]).is_err());
        assert!(roc_curve(&[1.0, 2.0], &[true]).is_err());
        assert!(roc_curve(&[1.0, f64::NAN], &[true, false]).is_err());
        assert!(auc_pair_count_oracle(&[1.0], &[true]).is_err());
    }

    #[test]
    fn auc_matches_trapezoid_of_points() {
        let scores = [0.1, 0.5, 0.5, 0.7, 0.2, 0.9, 0.5];
        let labels = [false, true, false, true, false, true, true];
        let roc = roc_curve(&scores, &labels).unwrap();
        let area: f64 = RocCurve::trapezoid_area(&roc.points);
        assert!((area - roc.auc).abs() < 1e-12);
    }

    fn five_class_counts() -> Vec<Vec<u64>> {
        vec![
            vec![221, 15, 57, 13, 9],
            vec![45, 121, 82, 12, 5],
            vec![74, 43, 199, 18, 14],
            vec![19, 17, 20, 218, 5],
            vec![80, 21, 66, 22, 166],
        ]
    }

    #[test]
    fn precision_recall_of_fixture_classes() {
        let cm = ConfusionMatrix::from_counts(five_class_counts()).unwrap();
        assert!((cm.precision[3] - 218.0 / 283.0).abs() < 1e-15);
        assert!((cm.recall[3] - 218.0 / 279.0).abs() < 1e-15);
        assert!((100.0 * cm.precision[3] - 77.0).abs() < 0.05);
        assert!((100.0 * cm.recall[3] - 78.1).abs() < 0.05);
        assert!((100.0 * cm.precision[4] - 83.4).abs() < 0.05);
        assert!((100.0 * cm.recall[4] - 46.8).abs() < 0.05);
    }

    #[test]
    fn confusion_from_labels() {
        let truth = [0, 0, 1, 2, 2, 2];
        let cm = confusion_matrix(&truth, &truth, 4).unwrap();
        assert_eq!(cm.precision, vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(cm.recall, vec![1.0, 1.0, 1.0, 0.0]);
        let cm = confusion_matrix(&truth, &[0, 1, 1, 2, 0, 2], 3).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1, 0], vec![0, 1, 0], vec![1, 0, 2]]);
        assert_eq!(cm.true_totals(), vec![2, 1, 3]);
        assert_eq!(cm.predicted_totals(), vec![2, 2, 2]);
        assert!(confusion_matrix(&[0, 3], &[0, 0], 3).is_err());
        assert!(confusion_matrix(&[0], &[0, 0], 3).is_err());
    }

    fn line_dataset() -> Dataset<f64> {
        // Two classes on the x-axis separated by the empty interval (3, 10).
        let xs = [0.0, 1.0, 2.0, 3.0, 0.5, 1.5, 10.0, 11.0, 12.0, 13.0, 10.5, 11.5];
        let features = DMatrix::from_fn(12, 3, |i, j| if j == 0 { xs[i] } else { 0.0 });
        let labels = (0..12).map(|i| usize::from(i >= 6)).collect();
        Dataset::new(features, labels, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn bootstrap_counts_and_determinism() {
        let ds = line_dataset();
        let s1 = bootstrap_aucba(&ds, 0, 1, 1e-6, 100, 5).unwrap();
        assert_eq!(s1.replicates(), 100);
        let s2 = bootstrap_aucba(&ds, 0, 1, 1e-6, 100, 5).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.observed.auc, 1.0);
        assert_eq!(s1.aucba, 1.0);
        assert_eq!(s1.aucba_std, 0.0);
    }

    #[test]
    fn summary_stats_recomputable() {
        let curve = |auc: f64| RocCurve {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
            auc,
        };
        let s = BootstrapRocSummary::from_curves(curve(0.9), vec![curve(0.6), curve(0.8), curve(1.0)]);
        assert!((s.aucba - 0.8).abs() < 1e-12);
        assert!((s.aucba_std - (0.08f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_errors() {
        let ds = line_dataset();
        assert!(bootstrap_aucba(&ds, 0, 1, 1e-6, 0, 0).is_err());
        assert!(bootstrap_aucba(&ds, 0, 0, 1e-6, 10, 0).is_err());
    }
}
