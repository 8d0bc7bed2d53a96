//! Principal component analysis for outcome spaces too wide to draw.
//!
//! The model is fit on the pooled agent states of every step so that all
//! columns of a diagram share one coordinate system. Eigenvectors of the
//! sample covariance come from cyclic Jacobi rotations, which are exact
//! enough for the handful of outcome variables typical here.

use serde::Serialize;

use crate::cluster::mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k x N`, orthonormal rows, strongest component first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PcaModel {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matching eigenvectors (as rows), unsorted.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    // v holds eigenvectors as columns while rotating
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale || off == 0.0 {
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
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

fn check_rows(data: &[Vec<f64>]) -> Result<usize> {
    let n = data.first().map_or(0, |r| r.len());
    if n == 0 {
        return Err(Error::Usage("data has no columns".into()));
    }
    if let Some(i) = data.iter().position(|r| r.len() != n) {
        return Err(Error::Usage(format!(
            "row {i} has {} columns, expected {n}",
            data[i].len()
        )));
    }
    if data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Usage("data contains non-finite values".into()));
    }
    Ok(n)
}

/// Sample covariance (divisor `P - 1`) of the rows of `data`.
pub fn covariance(data: &[Vec<f64>], column_means: &[f64]) -> Vec<Vec<f64>> {
    let n = column_means.len();
    let denom = (data.len() - 1) as f64;
    let mut cov = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let s: f64 = data
                .iter()
                .map(|r| (r[a] - column_means[a]) * (r[b] - column_means[b]))
                .sum();
            cov[a][b] = s / denom;
            cov[b][a] = cov[a][b];
        }
    }
    cov
}

/// Fits the top-`k` principal components of the rows of `data`.
pub fn fit_pca(data: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    if data.len() < 2 {
        return Err(Error::Config(format!(
            "PCA needs at least 2 rows, got {}",
            data.len()
        )));
    }
    let n = check_rows(data)?;
    if k == 0 || k > n.min(data.len()) {
        return Err(Error::Config(format!(
            "cannot extract {k} components from {} rows of dimension {n}",
            data.len()
        )));
    }
    let means: Vec<f64> = (0..n)
        .map(|i| mean(&data.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect();
    let cov = covariance(data, &means);
    let (values, vectors) = symmetric_eigen(&cov);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let mut row = vectors[i].clone();
        let lead = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (c, x)| if x.abs() > best.1 { (c, x.abs()) } else { best })
            .0;
        if row[lead] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(row);
        explained.push(values[i].max(0.0));
    }
    let mut warnings = Vec::new();
    if explained.iter().all(|&v| v == 0.0) {
        warnings.push("data has zero variance; all components are arbitrary".to_string());
    }
    Ok(PcaModel {
        mean: means,
        components,
        explained_variance: explained,
        warnings,
    })
}

/// Scores of each row on the model's components.
pub fn project(model: &PcaModel, data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(i) = data.iter().position(|r| r.len() != model.dim()) {
        return Err(Error::Usage(format!(
            "row {i} has {} columns, model expects {}",
            data[i].len(),
            model.dim()
        )));
    }
    Ok(data
        .iter()
        .map(|r| {
            model
                .components
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(r.iter().zip(&model.mean))
                        .map(|(w, (x, m))| w * (x - m))
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// Maps component scores back to the original space.
pub fn reconstruct(model: &PcaModel, scores: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(i) = scores.iter().position(|r| r.len() != model.num_components()) {
        return Err(Error::Usage(format!(
            "score row {i} has {} entries, model has {} components",
            scores[i].len(),
            model.num_components()
        )));
    }
    Ok(scores
        .iter()
        .map(|s| {
            (0..model.dim())
                .map(|d| {
                    model.mean[d]
                        + s.iter()
                            .zip(&model.components)
                            .map(|(w, c)| w * c[d])
                            .sum::<f64>()
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::memory_experiment;

    #[test]
    fn collinear_points() {
        let data: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let m = fit_pca(&data, 1).unwrap();
        let s5 = 5f64.sqrt();
        assert!((m.components[0][0] - 1.0 / s5).abs() < 1e-12);
        assert!((m.components[0][1] - 2.0 / s5).abs() < 1e-12);
        let full = fit_pca(&data, 2).unwrap();
        assert!(full.explained_variance[1].abs() < 1e-12);
    }

    #[test]
    fn full_rank_reconstruction() {
        let data = memory_experiment().pooled_states();
        let m = fit_pca(&data, 2).unwrap();
        let back = reconstruct(&m, &project(&m, &data).unwrap()).unwrap();
        for (a, b) in data.iter().zip(&back) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn memory_two_by_two_quadratic_formula() {
        let data = memory_experiment().pooled_states();
        let m = fit_pca(&data, 2).unwrap();
        // hand route: 2x2 covariance and the closed-form eigenvalues
        let p = data.len() as f64;
        let mx = data.iter().map(|r| r[0]).sum::<f64>() / p;
        let my = data.iter().map(|r| r[1]).sum::<f64>() / p;
        let sxx = data.iter().map(|r| (r[0] - mx).powi(2)).sum::<f64>() / (p - 1.0);
        let syy = data.iter().map(|r| (r[1] - my).powi(2)).sum::<f64>() / (p - 1.0);
        let sxy = data.iter().map(|r| (r[0] - mx) * (r[1] - my)).sum::<f64>() / (p - 1.0);
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        let disc = (tr * tr / 4.0 - det).sqrt();
        assert!((m.explained_variance[0] - (tr / 2.0 + disc)).abs() < 1e-9);
        assert!((m.explained_variance[1] - (tr / 2.0 - disc)).abs() < 1e-9);
    }

    #[test]
    fn projected_columns_are_centered() {
        let data = memory_experiment().pooled_states();
        let m = fit_pca(&data, 2).unwrap();
        let proj = project(&m, &data).unwrap();
        for c in 0..2 {
            let mean: f64 = proj.iter().map(|r| r[c]).sum::<f64>() / proj.len() as f64;
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_point() {
        let data = vec![vec![0.3, 0.7, 1.0]; 4];
        let m = fit_pca(&data, 2).unwrap();
        assert_eq!(m.explained_variance, vec![0.0, 0.0]);
        assert_eq!(m.warnings.len(), 1);
        for r in project(&m, &data).unwrap() {
            assert!(r.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn errors() {
        let data = memory_experiment().pooled_states();
        assert!(matches!(fit_pca(&data, 3), Err(Error::Config(_))));
        assert!(matches!(fit_pca(&data, 0), Err(Error::Config(_))));
        assert!(matches!(fit_pca(&data[..1], 1), Err(Error::Config(_))));
        let m = fit_pca(&data, 1).unwrap();
        assert!(matches!(project(&m, &[vec![1.0, 2.0, 3.0]]), Err(Error::Usage(_))));
    }
}
