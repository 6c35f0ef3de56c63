//! The two variational classifiers.
//!
//! Both share the same circuit family (feature map followed by a trainable
//! ansatz) and differ in readout and loss. The VQC reads the Z-parity of
//! the whole register, turns it into a class-1 probability `p = (1 + e)/2`,
//! and trains on binary cross-entropy. The QNN reads `<Z>` on qubit 0 as a
//! value in `[-1, 1]` and trains on squared error against `{-1, +1}`
//! targets. Costs are nonlinear in the circuit expectations, so their
//! gradients chain the analytic outer derivative with the parameter-shift
//! derivative of each per-sample expectation; this keeps the gradient exact
//! (finite differences agree to 1e-6) while every sample's encoding is
//! computed once and reused across shifts.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::{encode, FeatureMapSpec};
use crate::labels::signed_labels;
use crate::statevector::StateVector;
use crate::variational::{
    expectation_from_encoded, minimize, model_expectation, random_initial_theta, AnsatzSpec,
    Objective, OptimizerConfig, TrainingTrace,
};

/// Probabilities are clamped to this interval before the logarithm.
const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Vqc,
    Qnn,
}

/// A trained variational classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalModel {
    pub kind: ModelKind,
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub observable_qubits: Vec<usize>,
    pub trace: TrainingTrace,
}

fn vqc_observable(n_qubits: usize) -> Vec<usize> {
    (0..n_qubits).collect()
}

/// Class-1 probability of the VQC: `(1 + e)/2` with `e` the full-register
/// Z-parity expectation.
pub fn vqc_forward(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &[f64],
) -> Result<f64> {
    let e = model_expectation(fspec, aspec, theta, x, &vqc_observable(fspec.n_qubits))?;
    Ok((1.0 + e) / 2.0)
}

/// QNN readout: `<Z>` on qubit 0, in `[-1, 1]`.
pub fn qnn_forward(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &[f64],
) -> Result<f64> {
    model_expectation(fspec, aspec, theta, x, &[0])
}

fn check_dataset(x: &Array2<f64>, n_labels: usize) -> Result<()> {
    if x.nrows() != n_labels {
        return Err(Error::Usage(format!("{} feature rows but {} labels", x.nrows(), n_labels)));
    }
    if x.nrows() == 0 {
        return Err(Error::Data("training set is empty".into()));
    }
    Ok(())
}

fn encode_dataset(fspec: &FeatureMapSpec, x: &Array2<f64>) -> Result<Vec<StateVector>> {
    x.rows().into_iter().map(|row| encode(fspec, &row.to_vec())).collect()
}

/// Per-sample scalar loss pieces for each head.
enum Head {
    /// Binary cross-entropy on `p = (1 + e)/2` against labels in {0, 1}.
    Vqc,
    /// Squared error on `e` against targets in {-1, +1}.
    Qnn,
}

impl Head {
    fn loss(&self, e: f64, target: f64) -> f64 {
        match self {
            Head::Vqc => {
                let p = ((1.0 + e) / 2.0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
            }
            Head::Qnn => (e - target).powi(2),
        }
    }

    /// d loss / d e at the clamped point (zero where the clamp is active).
    fn dloss_de(&self, e: f64, target: f64) -> f64 {
        match self {
            Head::Vqc => {
                let raw = (1.0 + e) / 2.0;
                if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&raw) {
                    0.0
                } else {
                    -(target / raw - (1.0 - target) / (1.0 - raw)) / 2.0
                }
            }
            Head::Qnn => 2.0 * (e - target),
        }
    }
}

/// Mean loss over a dataset with cached sample encodings.
struct CostObjective<'a> {
    encoded: Vec<StateVector>,
    targets: Vec<f64>,
    aspec: &'a AnsatzSpec,
    observable: Vec<usize>,
    head: Head,
}

impl<'a> CostObjective<'a> {
    fn expectations(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.encoded
            .iter()
            .map(|s| expectation_from_encoded(s, self.aspec, theta, &self.observable))
            .collect()
    }
}

impl<'a> Objective for CostObjective<'a> {
    fn value(&self, theta: &[f64]) -> Result<f64> {
        let n = self.encoded.len() as f64;
        let mut total = 0.0;
        for (s, &t) in self.encoded.iter().zip(&self.targets) {
            let e = expectation_from_encoded(s, self.aspec, theta, &self.observable)?;
            total += self.head.loss(e, t);
        }
        Ok(total / n)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let n = self.encoded.len() as f64;
        let center = self.expectations(theta)?;
        let weights: Vec<f64> = center
            .iter()
            .zip(&self.targets)
            .map(|(&e, &t)| self.head.dloss_de(e, t) / n)
            .collect();
        let mut grad = vec![0.0; theta.len()];
        let mut shifted = theta.to_vec();
        for k in 0..theta.len() {
            shifted[k] = theta[k] + std::f64::consts::FRAC_PI_2;
            let plus = self.expectations(&shifted)?;
            shifted[k] = theta[k] - std::f64::consts::FRAC_PI_2;
            let minus = self.expectations(&shifted)?;
            shifted[k] = theta[k];
            grad[k] = weights
                .iter()
                .zip(&plus)
                .zip(&minus)
                .map(|((w, p), m)| w * (p - m) / 2.0)
                .sum();
        }
        Ok(grad)
    }
}

/// Mean binary cross-entropy of the VQC on labels in `{0, 1}`.
pub fn vqc_cost(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &Array2<f64>,
    y: &[u8],
) -> Result<f64> {
    vqc_objective(fspec, aspec, x, y)?.value(theta)
}

/// Gradient of [`vqc_cost`] in `theta` (chain rule over parameter shifts).
pub fn vqc_cost_gradient(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &Array2<f64>,
    y: &[u8],
) -> Result<Vec<f64>> {
    vqc_objective(fspec, aspec, x, y)?.gradient(theta)
}

/// Mean squared error of the QNN against `{-1, +1}` targets derived from
/// labels in `{0, 1}`.
pub fn qnn_cost(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &Array2<f64>,
    y: &[u8],
) -> Result<f64> {
    qnn_objective(fspec, aspec, x, y)?.value(theta)
}

/// Gradient of [`qnn_cost`] in `theta`.
pub fn qnn_cost_gradient(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &Array2<f64>,
    y: &[u8],
) -> Result<Vec<f64>> {
    qnn_objective(fspec, aspec, x, y)?.gradient(theta)
}

fn vqc_objective<'a>(
    fspec: &FeatureMapSpec,
    aspec: &'a AnsatzSpec,
    x: &Array2<f64>,
    y: &[u8],
) -> Result<CostObjective<'a>> {
    check_dataset(x, y.len())?;
    if let Some(pos) = y.iter().position(|&v| v > 1) {
        return Err(Error::Data(format!("label at row {pos} is {}, expected 0 or 1", y[pos])));
    }
    if fspec.n_qubits != aspec.n_qubits {
        return Err(Error::Usage(format!(
            "feature map is over {} qubits but the ansatz over {}",
            fspec.n_qubits, aspec.n_qubits
        )));
    }
    Ok(CostObjective {
        encoded: encode_dataset(fspec, x)?,
        targets: y.iter().map(|&v| v as f64).collect(),
        aspec,
        observable: vqc_observable(fspec.n_qubits),
        head: Head::Vqc,
    })
}

fn qnn_objective<'a>(
    fspec: &FeatureMapSpec,
    aspec: &'a AnsatzSpec,
    x: &Array2<f64>,
    y: &[u8],
) -> Result<CostObjective<'a>> {
    check_dataset(x, y.len())?;
    if fspec.n_qubits != aspec.n_qubits {
        return Err(Error::Usage(format!(
            "feature map is over {} qubits but the ansatz over {}",
            fspec.n_qubits, aspec.n_qubits
        )));
    }
    let targets: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
    if let Some(pos) = y.iter().position(|&v| v > 1) {
        return Err(Error::Data(format!("label at row {pos} is {}, expected 0 or 1", y[pos])));
    }
    Ok(CostObjective {
        encoded: encode_dataset(fspec, x)?,
        targets,
        aspec,
        observable: vec![0],
        head: Head::Qnn,
    })
}

fn train(
    kind: ModelKind,
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    x: &Array2<f64>,
    y: &[u8],
    optimizer: &OptimizerConfig,
) -> Result<VariationalModel> {
    let objective = match kind {
        ModelKind::Vqc => vqc_objective(&feature_map, &ansatz, x, y)?,
        ModelKind::Qnn => qnn_objective(&feature_map, &ansatz, x, y)?,
    };
    // reject single-class data; a classifier trained on one class is a
    // constant function
    signed_labels(y)?;
    let initial = random_initial_theta(ansatz.parameter_count(), optimizer.seed);
    let (theta, trace) = minimize(optimizer, &objective, &initial)?;
    let observable_qubits = objective.observable.clone();
    Ok(VariationalModel { kind, feature_map, ansatz, theta, observable_qubits, trace })
}

/// Trains a VQC on labels in `{0, 1}`. Initial parameters are drawn
/// uniformly from `[-pi, pi)` using the optimizer seed.
pub fn train_vqc(
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    x: &Array2<f64>,
    y: &[u8],
    optimizer: &OptimizerConfig,
) -> Result<VariationalModel> {
    train(ModelKind::Vqc, feature_map, ansatz, x, y, optimizer)
}

/// Trains a QNN on labels in `{0, 1}` (mapped internally to `{-1, +1}`).
pub fn train_qnn(
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    x: &Array2<f64>,
    y: &[u8],
    optimizer: &OptimizerConfig,
) -> Result<VariationalModel> {
    train(ModelKind::Qnn, feature_map, ansatz, x, y, optimizer)
}

impl VariationalModel {
    /// Raw model output: class-1 probability for a VQC, `<Z>` on qubit 0
    /// for a QNN.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            ModelKind::Vqc => vqc_forward(&self.feature_map, &self.ansatz, &self.theta, x),
            ModelKind::Qnn => qnn_forward(&self.feature_map, &self.ansatz, &self.theta, x),
        }
    }

    /// Class-1 score in `[0, 1]` regardless of head: the probability itself
    /// for a VQC, `(1 + forward)/2` for a QNN.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self.kind {
            ModelKind::Vqc => self.forward(x),
            ModelKind::Qnn => Ok((1.0 + self.forward(x)?) / 2.0),
        }
    }

    /// Predicted class in `{0, 1}`. A VQC predicts 1 when its probability
    /// reaches 0.5; a QNN predicts by the sign of its readout, with an
    /// exactly zero readout mapping to class 1.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let decided = match self.kind {
            ModelKind::Vqc => self.forward(x)? >= 0.5,
            ModelKind::Qnn => self.forward(x)? >= 0.0,
        };
        Ok(decided as u8)
    }
}
