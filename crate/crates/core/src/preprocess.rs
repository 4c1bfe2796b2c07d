//! Standardization, correlation ranking/pruning and PCA. Everything here is
//! fitted on one matrix and applied to others; the harness decides which
//! partition is fitted on.

use log::warn;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{nested, symmetric_eigen};

fn is_zero_std(std: f64, mean: f64) -> bool {
    !(std > 1e-12 * mean.abs().max(1.0))
}

fn column_stats(x: ArrayView2<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let means: Vec<f64> = x.axis_iter(Axis(1)).map(|c| c.sum() / n).collect();
    let stds = x
        .axis_iter(Axis(1))
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt())
        .collect();
    (means, stds)
}

/// Indices of columns with (numerically) zero sample variance.
pub fn zero_variance_columns(x: ArrayView2<f64>) -> Vec<usize> {
    if x.nrows() < 2 {
        return (0..x.ncols()).collect();
    }
    let (means, stds) = column_stats(x);
    (0..x.ncols()).filter(|&j| is_zero_std(stds[j], means[j])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

pub fn fit_scaler(x: ArrayView2<f64>) -> Result<Scaler> {
    if x.nrows() < 2 {
        return Err(Error::invalid("scaler needs at least two rows"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("scaler input contains non-finite values"));
    }
    let (means, stds) = column_stats(x);
    if let Some(j) = (0..stds.len()).find(|&j| is_zero_std(stds[j], means[j])) {
        return Err(Error::ZeroVariance(format!("column {j}")));
    }
    Ok(Scaler { means, stds })
}

pub fn apply_scaler(s: &Scaler, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != s.means.len() {
        return Err(Error::DimensionMismatch {
            expected: s.means.len(),
            found: x.ncols(),
        });
    }
    let mut out = x.to_owned();
    for mut row in out.outer_iter_mut() {
        for ((v, m), sd) in row.iter_mut().zip(&s.means).zip(&s.stds) {
            *v = (*v - m) / sd;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    pub index: usize,
    pub r: f64,
}

/// Pearson correlation of each feature with the label, by |r| descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRanking {
    pub entries: Vec<FeatureCorrelation>,
}

impl CorrelationRanking {
    /// Columns with `|r| >= min_abs_r`, in original order; never empty.
    pub fn retained_columns(&self, min_abs_r: f64) -> Vec<usize> {
        let mut keep: Vec<usize> = self
            .entries
            .iter()
            .filter(|e| e.r.abs() >= min_abs_r)
            .map(|e| e.index)
            .collect();
        if keep.is_empty() {
            if let Some(best) = self.entries.first() {
                keep.push(best.index);
            }
        }
        keep.sort_unstable();
        keep
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["feature", "r"])?;
        for e in &self.entries {
            w.write_record([e.feature.clone(), e.r.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

pub fn correlation_rank(x: ArrayView2<f64>, y: &[u8], names: &[String]) -> Result<CorrelationRanking> {
    if y.len() != x.nrows() {
        return Err(Error::invalid("label length differs from row count"));
    }
    if names.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: names.len(),
        });
    }
    let n = y.len() as f64;
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::SingleClass("correlation target".into()));
    }
    let y_mean = pos as f64 / n;
    let y_ss: f64 = y.iter().map(|&v| (v as f64 - y_mean).powi(2)).sum();

    let mut entries = Vec::with_capacity(x.ncols());
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for (v, &t) in col.iter().zip(y) {
            let dx = v - mean;
            sxy += dx * (t as f64 - y_mean);
            sxx += dx * dx;
        }
        let r = if is_zero_std(sxx.sqrt(), mean * n.sqrt()) {
            warn!("feature {} has zero variance; correlation set to 0", names[j]);
            0.0
        } else {
            (sxy / (sxx.sqrt() * y_ss.sqrt())).clamp(-1.0, 1.0)
        };
        entries.push(FeatureCorrelation {
            feature: names[j].clone(),
            index: j,
            r,
        });
    }
    entries.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()).then(a.index.cmp(&b.index)));
    Ok(CorrelationRanking { entries })
}

pub fn prune_features(d: &Dataset, ranking: &CorrelationRanking, min_abs_r: f64) -> Result<Dataset> {
    if ranking.entries.len() != d.n_features() {
        return Err(Error::DimensionMismatch {
            expected: d.n_features(),
            found: ranking.entries.len(),
        });
    }
    d.select_columns(&ranking.retained_columns(min_abs_r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// All principal axes as rows, by descending eigenvalue; the first
    /// `n_components` are used for projection.
    #[serde(with = "nested")]
    pub components: Array2<f64>,
    /// Eigenvalues of the sample covariance, aligned with `components`.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub n_components: usize,
    pub variance_threshold: f64,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }

    pub fn selected_components(&self) -> ArrayView2<'_, f64> {
        self.components.slice(ndarray::s![..self.n_components, ..])
    }

    pub fn cumulative_ratio(&self, k: usize) -> f64 {
        self.explained_variance_ratio[..k].iter().sum()
    }

    /// Maps projected rows back to feature space (exact when every component is kept).
    pub fn inverse_transform(&self, z: ArrayView2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.n_components {
            return Err(Error::DimensionMismatch {
                expected: self.n_components,
                found: z.ncols(),
            });
        }
        Ok(z.dot(&self.selected_components()))
    }

    /// Same model with a different number of retained components.
    pub fn with_components(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.components.nrows() {
            return Err(Error::invalid(format!("component count {k} out of range")));
        }
        Ok(PcaModel {
            n_components: k,
            ..self.clone()
        })
    }
}

/// Smallest `k` whose cumulative explained-variance ratio exceeds `threshold`.
pub fn select_component_count(ratios: &[f64], threshold: f64) -> usize {
    let mut cum = 0.0;
    for (k, r) in ratios.iter().enumerate() {
        cum += r;
        if cum > threshold {
            return k + 1;
        }
    }
    ratios.len()
}

pub fn fit_pca(x: ArrayView2<f64>, variance_threshold: f64) -> Result<PcaModel> {
    if !(variance_threshold > 0.0 && variance_threshold < 1.0) {
        return Err(Error::invalid(format!(
            "variance threshold {variance_threshold} not in (0, 1)"
        )));
    }
    let (n, p) = x.dim();
    if n < 2 || p == 0 {
        return Err(Error::invalid("PCA needs at least two rows and one column"));
    }
    if n <= p {
        warn!("PCA fitted on {n} rows for {p} features");
    }
    let mean: Array1<f64> = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);

    let (values, vectors) = symmetric_eigen(&cov);
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("PCA input has no variance"));
    }

    let mut components = vectors.t().to_owned();
    for mut row in components.outer_iter_mut() {
        let pivot = row
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0f64), |best, (j, v)| if v.abs() > best.1.abs() { (j, v) } else { best });
        if pivot.1 < 0.0 {
            row.mapv_inplace(|v| -v);
        }
    }

    let ratios: Vec<f64> = values.iter().map(|v| v / total).collect();
    let n_components = select_component_count(&ratios, variance_threshold);
    Ok(PcaModel {
        components,
        explained_variance: values,
        explained_variance_ratio: ratios,
        n_components,
        variance_threshold,
    })
}

pub fn pca_transform(m: &PcaModel, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != m.n_features() {
        return Err(Error::DimensionMismatch {
            expected: m.n_features(),
            found: x.ncols(),
        });
    }
    Ok(x.dot(&m.selected_components().t()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn random(n: usize, p: usize, seed: u64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, p), |_| rng.random_range(-3.0..3.0))
    }

    #[test]
    fn scaler_on_simple_column() {
        let s = fit_scaler(array![[1.0], [2.0], [3.0]].view()).unwrap();
        assert_eq!(s.means, vec![2.0]);
        assert!((s.stds[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_zero_variance() {
        let x = array![[1.0, 0.1], [2.0, 0.1], [3.0, 0.1]];
        assert!(matches!(fit_scaler(x.view()), Err(Error::ZeroVariance(_))));
        assert_eq!(zero_variance_columns(x.view()), vec![1]);
    }

    #[test]
    fn standardized_columns_have_unit_stats() {
        let x = random(100, 5, 1);
        let s = fit_scaler(x.view()).unwrap();
        let z = apply_scaler(&s, x.view()).unwrap();
        let (m, sd) = column_stats(z.view());
        for j in 0..5 {
            assert!(m[j].abs() < 1e-10);
            assert!((sd[j] - 1.0).abs() < 1e-10);
        }
        let back = z.dot(&Array2::from_diag(&Array1::from(s.stds.clone()))) + &Array1::from(s.means.clone());
        for (a, b) in back.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaler_uses_fitted_statistics_on_new_data() {
        let s = fit_scaler(array![[0.0], [2.0]].view()).unwrap();
        let z = apply_scaler(&s, array![[5.0], [5.0]].view()).unwrap();
        assert!(z.iter().all(|&v| (v - 4.0 / 2f64.sqrt()).abs() < 1e-12));
        assert!(apply_scaler(&s, array![[1.0, 2.0]].view()).is_err());
    }

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("c{j}")).collect()
    }

    #[test]
    fn correlation_signs_and_hand_value() {
        let y = [0u8, 0, 1, 1];
        let x = array![[0.0, 1.0, 1.0], [0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [1.0, 0.0, 4.0]];
        let r = correlation_rank(x.view(), &y, &names(3)).unwrap();
        let get = |i: usize| r.entries.iter().find(|e| e.index == i).unwrap().r;
        assert!((get(0) - 1.0).abs() < 1e-12);
        assert!((get(1) + 1.0).abs() < 1e-12);
        // r = 2 / sqrt(5 * 1)
        assert!((get(2) - 0.894_427_190_999_915_9).abs() < 1e-12);
        assert!((get(2) - 0.8944).abs() < 5e-5);
    }

    #[test]
    fn zero_variance_feature_gets_zero_r() {
        let x = array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]];
        let r = correlation_rank(x.view(), &[0, 1, 1], &names(2)).unwrap();
        assert_eq!(r.entries[1].r, 0.0);
        assert!(correlation_rank(x.view(), &[1, 1, 1], &names(2)).is_err());
    }

    fn ranking(rs: &[f64]) -> CorrelationRanking {
        let mut entries: Vec<FeatureCorrelation> = rs
            .iter()
            .enumerate()
            .map(|(i, &r)| FeatureCorrelation {
                feature: format!("c{i}"),
                index: i,
                r,
            })
            .collect();
        entries.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()));
        CorrelationRanking { entries }
    }

    #[test]
    fn pruning_thresholds() {
        let rk = ranking(&[0.5, -0.2, 0.04, 0.01, 0.0]);
        assert_eq!(rk.retained_columns(0.0).len(), 5);
        assert_eq!(rk.retained_columns(0.03), vec![0, 1, 2]);
        assert_eq!(rk.retained_columns(1.1), vec![0]);

        let d = Dataset::new(
            Array2::zeros((2, 5)),
            names(5),
            vec![0, 1],
            vec!["Normal".into(), "Generic".into()],
        )
        .unwrap();
        let pruned = prune_features(&d, &rk, 0.03).unwrap();
        assert_eq!(pruned.feature_names, vec!["c0", "c1", "c2"]);
    }

    #[test]
    fn rank_one_data_needs_one_component() {
        let x = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [-1.0, -1.0]];
        let m = fit_pca(x.view(), 0.95).unwrap();
        assert_eq!(m.n_components, 1);
        assert!((m.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(fit_pca(x.view(), 1.0).is_err());
        assert!(fit_pca(x.view(), 0.0).is_err());
    }

    #[test]
    fn transform_variances_match_eigenvalues() {
        let x = random(80, 6, 4);
        let m = fit_pca(x.view(), 0.99).unwrap().with_components(6).unwrap();
        let z = pca_transform(&m, x.view()).unwrap();
        let (_, sd) = column_stats(z.view());
        for (s, ev) in sd.iter().zip(&m.explained_variance) {
            assert!((s * s - ev).abs() < 1e-8);
        }
        let back = m.inverse_transform(z.view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        let zeros = pca_transform(&m, Array2::zeros((3, 6)).view()).unwrap();
        assert!(zeros.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pca_json_is_nested_arrays() {
        let m = fit_pca(random(20, 3, 2).view(), 0.9).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert!(json["components"][0].is_array());
        let back: PcaModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }
}
