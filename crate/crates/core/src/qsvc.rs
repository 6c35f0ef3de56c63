//! Kernel support vector classification.
//!
//! Training maximizes the dual objective
//! `W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij` subject to
//! `0 <= a_i <= C` and `sum a_i y_i = 0`, by sequential minimal
//! optimization: each step picks the pair of coefficients that most violates
//! the KKT conditions and solves the two-variable subproblem in closed form.
//! The pair step never decreases the dual objective, and for a positive
//! semidefinite kernel the subproblem curvature is non-negative, which the
//! solver uses as a cheap runtime check of the kernel's validity.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMapSpec;
use crate::kernel::{kernel_matrix, kernel_row, kernel_rows, KernelMatrix};
use crate::labels::signed_labels;

/// Coefficients below this are treated as zero when collecting support
/// vectors and free (unbounded) vectors.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Subproblem curvature below this is treated as zero (degenerate pair);
/// anything clearly negative means the kernel matrix is not PSD.
const CURVATURE_FLOOR: f64 = 1e-12;
const CURVATURE_NEGATIVE: f64 = -1e-7;

/// Box bound and stopping settings for the dual solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QsvcParams {
    /// Box bound on the dual coefficients.
    pub c: f64,
    /// Largest tolerated KKT violation at convergence.
    pub tol: f64,
    /// Cap on pair updates.
    pub max_passes: usize,
}

impl QsvcParams {
    /// Conventional defaults for a training set of `n` samples.
    pub fn defaults_for(n: usize) -> Self {
        QsvcParams { c: 1.0, tol: 1e-4, max_passes: 10 * n.max(1) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("svm box bound must be positive, got {}", self.c)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("svm tolerance must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("svm solver needs at least one pass".into()));
        }
        Ok(())
    }
}

/// Output of the dual solver.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Pair updates performed.
    pub iterations: usize,
    /// Whether the KKT gap closed below `tol` before `max_passes` ran out.
    pub converged: bool,
    /// Final dual objective, recomputed exactly from the coefficients.
    pub objective: f64,
    /// Dual objective before any update and after each pair update.
    pub objective_history: Vec<f64>,
}

/// Solves the SVM dual for a precomputed kernel matrix and labels in
/// `{-1, +1}`.
pub fn solve_dual(k: &KernelMatrix, y: &[i8], params: &QsvcParams) -> Result<DualSolution> {
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
    let c = params.c;
    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();

    let mut alphas = vec![0.0f64; n];
    // gradient of the minimization form f = 1/2 a'Qa - sum a
    let mut grad = vec![-1.0f64; n];
    let mut objective = 0.0;
    let mut history = vec![0.0];
    let mut iterations = 0;
    let mut converged = false;

    loop {
        // maximal violating pair: i maximizes d = -y * grad over the set
        // that can still grow along +y, j minimizes d over the set that can
        // still shrink.
        let mut i_best: Option<(usize, f64)> = None;
        let mut j_best: Option<(usize, f64)> = None;
        for t in 0..n {
            let d = -yf[t] * grad[t];
            let in_up = (y[t] == 1 && alphas[t] < c) || (y[t] == -1 && alphas[t] > 0.0);
            let in_low = (y[t] == -1 && alphas[t] < c) || (y[t] == 1 && alphas[t] > 0.0);
            if in_up && i_best.is_none_or(|(_, best)| d > best) {
                i_best = Some((t, d));
            }
            if in_low && j_best.is_none_or(|(_, best)| d < best) {
                j_best = Some((t, d));
            }
        }
        let ((i, d_up), (j, d_low)) = match (i_best, j_best) {
            (Some(a), Some(b)) => (a, b),
            // every coefficient pinned: nothing movable, treat as converged
            _ => {
                converged = true;
                break;
            }
        };
        if d_up - d_low <= params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_passes {
            break;
        }

        let curv = k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j);
        if curv < CURVATURE_NEGATIVE {
            return Err(Error::Numeric(format!(
                "kernel matrix is not positive semidefinite: pair ({i}, {j}) has curvature {curv}"
            )));
        }

        // step along a_i += y_i * delta, a_j -= y_j * delta, which keeps
        // sum a y fixed; the box puts an upper limit on delta.
        let hi_i = if y[i] == 1 { c - alphas[i] } else { alphas[i] };
        let hi_j = if y[j] == 1 { alphas[j] } else { c - alphas[j] };
        let hi = hi_i.min(hi_j);
        let delta = if curv > CURVATURE_FLOOR {
            ((d_up - d_low) / curv).min(hi)
        } else {
            hi
        };

        alphas[i] += yf[i] * delta;
        alphas[j] -= yf[j] * delta;
        snap_to_bounds(&mut alphas[i], c);
        snap_to_bounds(&mut alphas[j], c);

        objective += delta * (d_up - d_low) - 0.5 * delta * delta * curv;
        history.push(objective);
        for t in 0..n {
            grad[t] += yf[t] * delta * (k.get(t, i) - k.get(t, j));
        }
        iterations += 1;
    }

    // bias from the free vectors: for each, y_k * f(x_k) = 1 exactly at the
    // optimum, which gives bias = y_k * grad_k; fall back to the midpoint of
    // the violating-pair interval when every vector sits on a bound.
    let free: Vec<usize> = (0..n)
        .filter(|&t| alphas[t] > SUPPORT_TOL && alphas[t] < c - SUPPORT_TOL)
        .collect();
    let bias = if free.is_empty() {
        let mut d_up = f64::NEG_INFINITY;
        let mut d_low = f64::INFINITY;
        for t in 0..n {
            let d = -yf[t] * grad[t];
            let in_up = (y[t] == 1 && alphas[t] < c) || (y[t] == -1 && alphas[t] > 0.0);
            let in_low = (y[t] == -1 && alphas[t] < c) || (y[t] == 1 && alphas[t] > 0.0);
            if in_up {
                d_up = d_up.max(d);
            }
            if in_low {
                d_low = d_low.min(d);
            }
        }
        if d_up.is_finite() && d_low.is_finite() {
            -(d_up + d_low) / 2.0
        } else {
            0.0
        }
    } else {
        free.iter().map(|&t| yf[t] * grad[t]).sum::<f64>() / free.len() as f64
    };

    let exact = exact_objective(k, &yf, &alphas);
    Ok(DualSolution { alphas, bias, iterations, converged, objective: exact, objective_history: history })
}

fn snap_to_bounds(alpha: &mut f64, c: f64) {
    let tol = 1e-10 * c.max(1.0);
    if *alpha < tol {
        *alpha = 0.0;
    } else if *alpha > c - tol {
        *alpha = c;
    }
}

fn exact_objective(k: &KernelMatrix, yf: &[f64], alphas: &[f64]) -> f64 {
    let nonzero: Vec<usize> = (0..alphas.len()).filter(|&t| alphas[t] != 0.0).collect();
    let mut quad = 0.0;
    for &i in &nonzero {
        for &j in &nonzero {
            quad += alphas[i] * alphas[j] * yf[i] * yf[j] * k.get(i, j);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// A trained kernel SVM: dual coefficients plus everything needed to score
/// new samples (the retained training rows and the feature map).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub feature_map: FeatureMapSpec,
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Training labels in {-1, +1}.
    pub labels: Vec<i8>,
    pub c: f64,
    /// Indices with `alpha > SUPPORT_TOL`.
    pub support_indices: Vec<usize>,
    pub training_x: Array2<f64>,
}

impl SvmModel {
    /// Trains on feature rows with labels in `{0, 1}`.
    pub fn train(
        feature_map: FeatureMapSpec,
        x: &Array2<f64>,
        y: &[u8],
        params: &QsvcParams,
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
        let solution = solve_dual(&k, &signed, params)?;
        let support_indices: Vec<usize> = (0..signed.len())
            .filter(|&t| solution.alphas[t] > SUPPORT_TOL)
            .collect();
        Ok(SvmModel {
            feature_map,
            alphas: solution.alphas,
            bias: solution.bias,
            labels: signed,
            c: params.c,
            support_indices,
            training_x: x.clone(),
        })
    }

    /// Signed decision value from a precomputed kernel row against the
    /// training set: `sum_i a_i y_i k_row[i] - bias`.
    pub fn decision(&self, k_row: &[f64]) -> Result<f64> {
        if k_row.len() != self.alphas.len() {
            return Err(Error::Usage(format!(
                "kernel row has {} entries but the model was trained on {}",
                k_row.len(),
                self.alphas.len()
            )));
        }
        let score: f64 = self
            .support_indices
            .iter()
            .map(|&i| self.alphas[i] * self.labels[i] as f64 * k_row[i])
            .sum();
        Ok(score - self.bias)
    }

    /// Decision value for a raw feature vector.
    pub fn decision_for(&self, x: &[f64]) -> Result<f64> {
        let row = kernel_row(&self.feature_map, x, &self.training_x)?;
        self.decision(&row)
    }

    /// Decision values for a batch of feature rows; encodes the training
    /// set once.
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
