//! Two-component PCA for scatterplot projections.
//!
//! The sample covariance (divisor `n - 1`) of the optionally masked features
//! is diagonalised with cyclic Jacobi rotations. Eigenpairs are ordered by
//! eigenvalue, then by original column, and each axis is signed so that its
//! first non-negligible component is positive.

#![allow(clippy::needless_range_loop)]

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::FeatureMask;

const JACOBI_TOL: f64 = 1e-10;
const SIGN_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    /// Length of the vectors accepted by [`project`].
    pub input_len: usize,
    /// Input columns the model uses, ascending.
    pub features: Vec<usize>,
    pub mean: Vec<f64>,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub eigenvalue1: f64,
    pub eigenvalue2: f64,
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues and column eigenvectors,
/// in the order the Jacobi sweep leaves them.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i][j]` is component `i` of eigenvector `j`.
    pub vectors: Vec<Vec<f64>>,
}

fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i][j] * a[i][j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi diagonalisation, sweeping pairs `(p, q)` in row-major order
/// until the off-diagonal Frobenius norm drops below `1e-10` relative to the
/// matrix norm (absolute for tiny matrices).
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> SymmetricEigen {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen {
        values: (0..n).map(|i| a[i][i]).collect(),
        vectors: v,
    }
}

fn apply_sign_convention(axis: &mut [f64]) {
    if let Some(first) = axis.iter().find(|x| x.abs() > SIGN_TOL) {
        if *first < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Sample covariance (divisor `n - 1`) of the given columns, plus their means.
pub fn covariance(d: &Dataset, features: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = d.len();
    let m = features.len();
    let mut mean = vec![0.0; m];
    for s in d.samples() {
        for (a, &j) in features.iter().enumerate() {
            mean[a] += s.features[j];
        }
    }
    mean.iter_mut().for_each(|x| *x /= n as f64);
    let mut cov = vec![vec![0.0; m]; m];
    let mut centred = vec![0.0; m];
    for s in d.samples() {
        for (a, &j) in features.iter().enumerate() {
            centred[a] = s.features[j] - mean[a];
        }
        for a in 0..m {
            for b in a..m {
                cov[a][b] += centred[a] * centred[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..m {
        for b in a..m {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }
    (mean, cov)
}

pub fn fit_pca2(d: &Dataset, mask: Option<&FeatureMask>) -> Result<ProjectionModel> {
    let features: Vec<usize> = match mask {
        Some(m) => {
            if m.len() != d.feature_count() {
                return Err(Error::LengthMismatch {
                    expected: d.feature_count(),
                    found: m.len(),
                });
            }
            m.active().to_vec()
        }
        None => (0..d.feature_count()).collect(),
    };
    if d.len() < 2 {
        return Err(Error::Pca("at least 2 samples".into()));
    }
    if features.len() < 2 {
        return Err(Error::Pca("at least 2 active features".into()));
    }

    let (mean, cov) = covariance(d, &features);
    let eig = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]).then(a.cmp(&b)));
    let column = |j: usize| -> Vec<f64> {
        let mut axis: Vec<f64> = eig.vectors.iter().map(|row| row[j]).collect();
        apply_sign_convention(&mut axis);
        axis
    };
    Ok(ProjectionModel {
        input_len: d.feature_count(),
        features,
        mean,
        axis1: column(order[0]),
        axis2: column(order[1]),
        eigenvalue1: eig.values[order[0]].max(0.0),
        eigenvalue2: eig.values[order[1]].max(0.0),
    })
}

pub fn project(model: &ProjectionModel, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != model.input_len {
        return Err(Error::LengthMismatch {
            expected: model.input_len,
            found: x.len(),
        });
    }
    let mut pc1 = 0.0;
    let mut pc2 = 0.0;
    for (a, &j) in model.features.iter().enumerate() {
        let c = x[j] - model.mean[a];
        pc1 += model.axis1[a] * c;
        pc2 += model.axis2[a] * c;
    }
    Ok((pc1, pc2))
}
