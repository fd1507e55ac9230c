//! Principal component analysis by eigendecomposition of the sample
//! covariance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{LabeledDataset, Provenance};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// d x k, orthonormal columns.
    components: Matrix,
    /// Leading k covariance eigenvalues.
    explained_variance: Vec<f64>,
    /// `explained_variance / total variance`, non-increasing.
    explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    /// Centres `x` (samples x d) and keeps the top `k` eigenvectors of the
    /// sample covariance. Each component's largest-magnitude entry is made
    /// positive so results are reproducible.
    pub fn fit(x: &Matrix, k: usize) -> Result<Self> {
        let (n, d) = (x.rows(), x.cols());
        if k == 0 || k > d {
            return Err(Error::invalid(format!(
                "requested {k} components from {d} features"
            )));
        }
        if n < 2 {
            return Err(Error::invalid("PCA needs at least two samples"));
        }
        let mut mean = alloc::vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut centered = x.clone();
        for i in 0..n {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
                *v -= m;
            }
        }
        let mut cov = centered.t_matmul(&centered);
        cov.as_mut_slice()
            .iter_mut()
            .for_each(|c| *c /= (n - 1) as f64);
        // Symmetrise away rounding noise before the Jacobi sweeps.
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = avg;
                cov[(j, i)] = avg;
            }
        }

        let (values, vectors) = symmetric_eigen(&cov);
        let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
        let total: f64 = values.iter().sum();

        let mut components = vectors.truncate_cols(k);
        for j in 0..k {
            let pivot = (0..d)
                .max_by(|&a, &b| {
                    components[(a, j)]
                        .abs()
                        .total_cmp(&components[(b, j)].abs())
                        .then(b.cmp(&a))
                })
                .unwrap_or(0);
            if components[(pivot, j)] < 0.0 {
                for i in 0..d {
                    components[(i, j)] = -components[(i, j)];
                }
            }
        }
        let explained_variance: Vec<f64> = values[..k].to_vec();
        let explained_variance_ratio = explained_variance
            .iter()
            .map(|v| if total > 0.0 { v / total } else { 0.0 })
            .collect();
        Ok(PcaModel {
            mean,
            components,
            explained_variance,
            explained_variance_ratio,
        })
    }

    pub fn num_components(&self) -> usize {
        self.components.cols()
    }

    pub fn num_features(&self) -> usize {
        self.components.rows()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn explained_variance_ratio(&self) -> &[f64] {
        &self.explained_variance_ratio
    }

    /// `(x - mean) · components`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.num_features() {
            return Err(Error::invalid(format!(
                "PCA expects {} columns, got {}",
                self.num_features(),
                x.cols()
            )));
        }
        let mut centered = x.clone();
        for i in 0..x.rows() {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&self.mean) {
                *v -= m;
            }
        }
        Ok(centered.matmul(&self.components))
    }

    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.num_components() {
            return Err(Error::invalid("inverse transform: component count mismatch"));
        }
        let mut x = z.matmul(&self.components.transpose());
        for i in 0..x.rows() {
            for (v, m) in x.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(x)
    }

    /// `(component index, explained-variance ratio)` pairs.
    pub fn scree(&self) -> Vec<(usize, f64)> {
        self.explained_variance_ratio
            .iter()
            .copied()
            .enumerate()
            .collect()
    }

    /// Projects a dataset's features, keeping its labels.
    pub fn transform_dataset(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        let z = self.transform(ds.features())?;
        let names: Vec<String> = (0..self.num_components()).map(|j| format!("pc{j}")).collect();
        ds.with_features(z, names, Provenance::Pca(self.num_components()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn covariance(z: &Matrix) -> Matrix {
        let n = z.rows() as f64;
        let mut c = z.t_matmul(z);
        c.as_mut_slice().iter_mut().for_each(|v| *v /= n - 1.0);
        c
    }

    #[test]
    fn points_on_a_line_have_a_single_component() {
        let x = Matrix::from_vec(4, 2, vec![0.0, 0.0, 1.0, 2.0, 2.0, 4.0, -1.0, -2.0]);
        let pca = PcaModel::fit(&x, 1).unwrap();
        assert!((pca.explained_variance_ratio()[0] - 1.0).abs() < 1e-10);
        let full = PcaModel::fit(&x, 2).unwrap();
        let scree = full.scree();
        assert!((scree[0].1 - 1.0).abs() < 1e-10);
        assert!(scree[1].1.abs() < 1e-10);
    }

    #[test]
    fn isotropic_gaussian_splits_variance_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let data: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let pca = PcaModel::fit(&Matrix::from_vec(2000, 2, data), 2).unwrap();
        for r in pca.explained_variance_ratio() {
            assert!((r - 0.5).abs() < 0.05, "ratio {r}");
        }
    }

    #[test]
    fn full_rank_transform_round_trips_and_decorrelates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..200 * 4).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut x = Matrix::from_vec(200, 4, data);
        for i in 0..200 {
            let r = x.row_mut(i);
            r[1] += 2.0 * r[0];
            r[3] = 0.5 * r[2] - r[1];
        }
        let pca = PcaModel::fit(&x, 4).unwrap();
        let g = pca.components().t_matmul(pca.components());
        assert!(g.max_abs_diff(&Matrix::identity(4)) < 1e-10);
        let ratios = pca.explained_variance_ratio();
        assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
        assert!((ratios.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        let z = pca.transform(&x).unwrap();
        assert!(pca.inverse_transform(&z).unwrap().max_abs_diff(&x) < 1e-8);
        let c = covariance(&z);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(c[(i, j)].abs() < 1e-8);
                }
            }
        }
        let mean_row = Matrix::from_vec(1, 4, pca.mean().to_vec());
        let zm = pca.transform(&mean_row).unwrap();
        assert!(zm.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_arguments() {
        let x = Matrix::zeros(3, 2);
        assert!(PcaModel::fit(&x, 3).is_err());
        assert!(PcaModel::fit(&Matrix::zeros(1, 2), 1).is_err());
        let pca = PcaModel::fit(&Matrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]), 1).unwrap();
        assert!(pca.transform(&Matrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn component_signs_are_canonical() {
        let x = Matrix::from_vec(3, 2, vec![0.0, 0.0, -1.0, -3.0, 1.0, 3.0]);
        let pca = PcaModel::fit(&x, 1).unwrap();
        assert!(pca.components()[(1, 0)] > 0.0);
    }
}
