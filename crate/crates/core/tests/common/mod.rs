//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use classsplom::nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Sample covariance (divide by n - 1) built with plain loops.
pub fn sample_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    cov
}

/// Exhaustive search over undirected 2-D unit directions `(cos t, sin t)`,
/// `t in [0, pi)`, for the largest Fisher ratio. Returns the best angle.
pub fn grid_fisher_angle(a: &[[f64; 2]], b: &[[f64; 2]], step: f64) -> f64 {
    let mean = |pts: &[[f64; 2]]| {
        let n = pts.len() as f64;
        [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n]
    };
    let (ma, mb) = (mean(a), mean(b));
    let mut sw = [[0.0f64; 2]; 2];
    for (pts, m) in [(a, ma), (b, mb)] {
        for p in pts {
            let d = [p[0] - m[0], p[1] - m[1]];
            for i in 0..2 {
                for j in 0..2 {
                    sw[i][j] += d[i] * d[j];
                }
            }
        }
    }
    let diff = [ma[0] - mb[0], ma[1] - mb[1]];
    let steps = (std::f64::consts::PI / step).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for s in 0..steps {
        let t = s as f64 * step;
        let w = [t.cos(), t.sin()];
        let between = (w[0] * diff[0] + w[1] * diff[1]).powi(2);
        let within = w[0] * w[0] * sw[0][0] + 2.0 * w[0] * w[1] * sw[0][1] + w[1] * w[1] * sw[1][1];
        let ratio = between / within;
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    best.1
}

/// Angle between two undirected 2-D directions, in `[0, pi/2]`.
pub fn undirected_angle(u: [f64; 2], angle: f64) -> f64 {
    let v = [angle.cos(), angle.sin()];
    let norm = (u[0] * u[0] + u[1] * u[1]).sqrt();
    let cos = ((u[0] * v[0] + u[1] * v[1]) / norm).abs().min(1.0);
    cos.acos()
}

/// Two anisotropic Gaussian clouds in the plane sharing a random covariance.
pub fn random_two_class_2d(seed: u64) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m_a = rng.random_range(8..40);
    let m_b = rng.random_range(8..40);
    let mix = [
        [rng.random_range(0.3..2.0), rng.random_range(-1.0..1.0)],
        [rng.random_range(-1.0..1.0), rng.random_range(0.3..2.0)],
    ];
    let shift = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let mut gauss = || {
        let u1: f64 = rng.random_range(1e-12..1.0);
        let u2: f64 = rng.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut cloud = |m: usize, offset: [f64; 2]| -> Vec<[f64; 2]> {
        (0..m)
            .map(|_| {
                let z = [gauss(), gauss()];
                [
                    offset[0] + mix[0][0] * z[0] + mix[0][1] * z[1],
                    offset[1] + mix[1][0] * z[0] + mix[1][1] * z[1],
                ]
            })
            .collect()
    };
    let a = cloud(m_a, [0.0, 0.0]);
    let b = cloud(m_b, shift);
    (a, b)
}

pub fn to_matrix(points: &[[f64; 2]]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 2, |i, j| points[i][j])
}

/// Mann-Whitney AUC by direct comparison of every positive-negative pair.
pub fn pair_count_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}
