//! Kernelized Pegasos: stochastic subgradient training for the SVM primal.
//!
//! The weight vector lives in feature space as `w = scale * sum_j coeffs_j
//! y_j phi(x_j)`, so the multiplicative decay `(1 - eta_t lambda)` of each
//! step touches only `scale`, and a margin violation bumps a single
//! coefficient. With `eta_t = 1/(lambda t)` the decay factor is `1 - 1/t`,
//! which is exactly zero at `t = 1`: the representation is reset to a fresh
//! scale of 1 whenever the decay collapses it. After every step the weight
//! norm is projected onto the ball of radius `1/sqrt(lambda)`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMapSpec;
use crate::kernel::{kernel_matrix, kernel_row, kernel_rows, KernelMatrix};
use crate::labels::signed_labels;

/// Steps between exact recomputations of the squared weight norm, which is
/// otherwise maintained incrementally.
const NORM_REFRESH_INTERVAL: usize = 4096;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PegasosParams {
    /// Regularization strength; also sets the projection radius.
    pub lambda: f64,
    /// Number of stochastic steps.
    pub steps: usize,
    pub seed: u64,
}

impl PegasosParams {
    /// Conventional defaults for a training set of `n` samples.
    pub fn defaults_for(n: usize) -> Self {
        PegasosParams { lambda: 1e-3, steps: 1000 * n.max(1), seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "pegasos regularization must be positive, got {}",
                self.lambda
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("pegasos needs at least one step".into()));
        }
        Ok(())
    }
}

/// Raw output of the training loop.
#[derive(Debug, Clone)]
pub struct PegasosFit {
    pub coeffs: Vec<f64>,
    pub scale: f64,
    /// Largest post-projection weight norm seen during training.
    pub max_norm: f64,
    pub steps: usize,
}

/// The decay applied to `scale` at step `t` (1-based): `1 - eta_t lambda`
/// with `eta_t = 1/(lambda t)`, i.e. `1 - 1/t` independent of lambda.
pub(crate) fn decay_factor(t: usize) -> f64 {
    1.0 - 1.0 / t as f64
}

/// Runs the stochastic training loop on a precomputed kernel matrix and
/// labels in `{-1, +1}`.
pub fn train_pegasos(k: &KernelMatrix, y: &[i8], params: &PegasosParams) -> Result<PegasosFit> {
    params.validate()?;
    let n = k.n();
    if y.len() != n {
        return Err(Error::Usage(format!(
            "kernel matrix is {n}x{n} but there are {} labels",
            y.len()
        )));
    }
    if !y.contains(&1) || !y.contains(&-1) {
        return Err(Error::Data("training labels must include both classes".into()));
    }
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let bound = 1.0 / params.lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut coeffs = vec![0.0f64; n];
    let mut scale = 1.0f64;
    // squared norm of the unscaled expansion: ||w||^2 = scale^2 * norm_sq
    let mut norm_sq = 0.0f64;
    let mut max_norm = 0.0f64;

    for t in 1..=params.steps {
        let i = rng.gen_range(0..n);
        let eta = 1.0 / (params.lambda * t as f64);
        // margin against the current weights, before this step's decay
        let sigma: f64 = (0..n).map(|j| coeffs[j] * yf[j] * k.get(j, i)).sum();
        let margin = yf[i] * scale * sigma;

        scale *= decay_factor(t);
        if margin < 1.0 {
            let sigma = if scale == 0.0 {
                coeffs.fill(0.0);
                norm_sq = 0.0;
                scale = 1.0;
                0.0
            } else {
                sigma
            };
            let delta = eta / scale;
            norm_sq += 2.0 * delta * yf[i] * sigma + delta * delta * k.get(i, i);
            coeffs[i] += delta;
        }

        if t % NORM_REFRESH_INTERVAL == 0 {
            norm_sq = exact_norm_sq(k, &yf, &coeffs);
        }
        let norm = scale * norm_sq.max(0.0).sqrt();
        if norm > bound {
            scale *= bound / norm;
        }
        max_norm = max_norm.max(scale * norm_sq.max(0.0).sqrt());
    }

    Ok(PegasosFit { coeffs, scale, max_norm, steps: params.steps })
}

fn exact_norm_sq(k: &KernelMatrix, yf: &[f64], coeffs: &[f64]) -> f64 {
    let nonzero: Vec<usize> = (0..coeffs.len()).filter(|&j| coeffs[j] != 0.0).collect();
    let mut total = 0.0;
    for &a in &nonzero {
        for &b in &nonzero {
            total += coeffs[a] * coeffs[b] * yf[a] * yf[b] * k.get(a, b);
        }
    }
    total
}

/// A trained Pegasos classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PegasosModel {
    pub feature_map: FeatureMapSpec,
    pub coeffs: Vec<f64>,
    pub scale: f64,
    /// Training labels in {-1, +1}.
    pub labels: Vec<i8>,
    pub lambda: f64,
    pub training_x: Array2<f64>,
}

impl PegasosModel {
    /// Trains on feature rows with labels in `{0, 1}`.
    pub fn train(
        feature_map: FeatureMapSpec,
        x: &Array2<f64>,
        y: &[u8],
        params: &PegasosParams,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Usage(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        let signed = signed_labels(y)?;
        let k = kernel_matrix(&feature_map, x)?;
        let fit = train_pegasos(&k, &signed, params)?;
        Ok(PegasosModel {
            feature_map,
            coeffs: fit.coeffs,
            scale: fit.scale,
            labels: signed,
            lambda: params.lambda,
            training_x: x.clone(),
        })
    }

    /// Decision value from a kernel row against the training set:
    /// `scale * sum_j coeffs_j y_j k_row[j]`.
    pub fn decision(&self, k_row: &[f64]) -> Result<f64> {
        if k_row.len() != self.coeffs.len() {
            return Err(Error::Usage(format!(
                "kernel row has {} entries but the model was trained on {}",
                k_row.len(),
                self.coeffs.len()
            )));
        }
        let raw: f64 = self
            .coeffs
            .iter()
            .zip(&self.labels)
            .zip(k_row)
            .map(|((&c, &l), &kv)| c * l as f64 * kv)
            .sum();
        Ok(self.scale * raw)
    }

    pub fn decision_for(&self, x: &[f64]) -> Result<f64> {
        let row = kernel_row(&self.feature_map, x, &self.training_x)?;
        self.decision(&row)
    }

    pub fn decision_batch(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        let cross = kernel_rows(&self.feature_map, x, &self.training_x)?;
        cross.rows().into_iter().map(|row| self.decision(&row.to_vec())).collect()
    }

    /// Predicted class in `{0, 1}`; a decision value of exactly zero maps
    /// to class 1.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(if self.decision_for(x)? >= 0.0 { 1 } else { 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn identity_kernel(n: usize) -> KernelMatrix {
        KernelMatrix::from_values(Array2::eye(n)).unwrap()
    }

    #[test]
    fn one_step_on_the_identity_kernel_sets_one_unit_coefficient() {
        let k = identity_kernel(2);
        let params = PegasosParams { lambda: 1.0, steps: 1, seed: 3 };
        let fit = train_pegasos(&k, &[1, -1], &params).unwrap();
        let nonzero: Vec<f64> = fit.coeffs.iter().copied().filter(|&c| c != 0.0).collect();
        assert_eq!(nonzero, vec![1.0]);
        assert_eq!(fit.scale, 1.0);
        assert_abs_diff_eq!(fit.max_norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_alone_collapses_the_scale_to_exactly_zero() {
        // the t = 1 factor is exactly 0, so any decay-only prefix is 0
        let mut scale = 1.0f64;
        for t in 1..=50 {
            scale *= decay_factor(t);
            assert_eq!(scale, 0.0);
        }
    }

    #[test]
    fn weight_norm_stays_inside_the_projection_ball() {
        let x = array![
            [0.3, 0.25],
            [0.35, 0.3],
            [0.25, 0.4],
            [2.4, 2.5],
            [2.5, 2.45],
            [2.6, 2.35],
        ];
        let y: Vec<i8> = vec![1, 1, 1, -1, -1, -1];
        let spec = FeatureMapSpec::new(crate::featuremap::FeatureMapKind::Zz, 2);
        let k = kernel_matrix(&spec, &x).unwrap();
        let params = PegasosParams { lambda: 1e-2, steps: 5000, seed: 11 };
        let fit = train_pegasos(&k, &y, &params).unwrap();
        assert!(fit.max_norm <= 1.0 / params.lambda.sqrt() + 1e-6);
    }

    #[test]
    fn training_is_deterministic_for_a_seed() {
        let k = identity_kernel(4);
        let y = [1, -1, 1, -1];
        let params = PegasosParams { lambda: 0.1, steps: 500, seed: 42 };
        let a = train_pegasos(&k, &y, &params).unwrap();
        let b = train_pegasos(&k, &y, &params).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        assert_eq!(a.scale, b.scale);
        let other = train_pegasos(&k, &y, &PegasosParams { seed: 43, ..params }).unwrap();
        assert!(a.coeffs != other.coeffs || a.scale != other.scale);
    }

    #[test]
    fn separable_clusters_are_classified_correctly() {
        let x = array![
            [0.3, 0.25],
            [0.35, 0.3],
            [0.25, 0.4],
            [0.4, 0.35],
            [2.4, 2.5],
            [2.5, 2.45],
            [2.6, 2.35],
            [2.45, 2.55],
        ];
        let y: Vec<u8> = vec![1, 1, 1, 1, 0, 0, 0, 0];
        let spec = FeatureMapSpec::new(crate::featuremap::FeatureMapKind::Zz, 2);
        let params = PegasosParams { lambda: 1e-3, steps: 4000, seed: 7 };
        let model = PegasosModel::train(spec, &x, &y, &params).unwrap();
        for (row, &label) in x.rows().into_iter().zip(&y) {
            assert_eq!(model.predict(&row.to_vec()).unwrap(), label);
        }
        let batch = model.decision_batch(&x).unwrap();
        for (row, score) in x.rows().into_iter().zip(&batch) {
            assert_abs_diff_eq!(model.decision_for(&row.to_vec()).unwrap(), *score, epsilon = 1e-12);
        }
    }

    #[test]
    fn margin_decision_uses_the_folded_scale() {
        let model = PegasosModel {
            feature_map: FeatureMapSpec::new(crate::featuremap::FeatureMapKind::Z, 1),
            coeffs: vec![2.0, 1.0],
            scale: 0.5,
            labels: vec![1, -1],
            lambda: 1.0,
            training_x: array![[0.0], [1.0]],
        };
        // 0.5 * (2*1*0.8 + 1*(-1)*0.2) = 0.7
        assert_abs_diff_eq!(model.decision(&[0.8, 0.2]).unwrap(), 0.7, epsilon = 1e-12);
        assert!(matches!(model.decision(&[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn invalid_params_and_labels_are_rejected() {
        let k = identity_kernel(2);
        assert!(matches!(
            train_pegasos(&k, &[1, -1], &PegasosParams { lambda: 0.0, steps: 10, seed: 0 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            train_pegasos(&k, &[1, -1], &PegasosParams { lambda: 1.0, steps: 0, seed: 0 }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            train_pegasos(&k, &[1, 1], &PegasosParams::defaults_for(2)),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            train_pegasos(&k, &[1], &PegasosParams::defaults_for(2)),
            Err(Error::Usage(_))
        ));
    }
}
