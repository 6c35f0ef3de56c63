//! Trainable circuit machinery shared by the variational classifiers:
//! layered ansatz construction, expectation evaluation, parameter-shift
//! gradients, and two optimizers (plain gradient descent and SPSA).
//!
//! Gradient conventions. For objectives that are expectations of
//! rotation-generated parameters, the parameter-shift rule
//! `g_k = (f(theta + pi/2 e_k) - f(theta - pi/2 e_k)) / 2` is the exact
//! derivative, and it is the default gradient of every [`Objective`].
//! Objectives that post-process expectations nonlinearly (cross-entropy,
//! squared error) override [`Objective::gradient`] with the chain rule so
//! the optimizer always descends the true gradient.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::{encode, FeatureMapSpec};
use crate::statevector::{Circuit, Gate, StateVector, MAX_QUBITS};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

/// Rotation generator used by one ansatz layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    Rx,
    Ry,
    Rz,
}

/// CNOT pattern appended after each rotation layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// `CNOT(q, q+1 mod n)` for every qubit; `n` gates per layer.
    CnotRing,
    /// `CNOT(q, q+1)` for `q < n-1`; `n-1` gates per layer.
    CnotLinear,
}

/// Shape of the trainable circuit: one rotation per qubit per layer (all
/// qubits of a layer share the axis) followed by the entangler. Registers
/// with a single qubit skip entanglement entirely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub layers: usize,
    /// One axis per layer.
    pub rotation_axes: Vec<RotationAxis>,
    pub entangler: Entangler,
}

impl AnsatzSpec {
    /// The conventional default: three all-RY layers with a CNOT ring.
    pub fn new(n_qubits: usize) -> Self {
        AnsatzSpec {
            n_qubits,
            layers: 3,
            rotation_axes: vec![RotationAxis::Ry; 3],
            entangler: Entangler::CnotRing,
        }
    }

    /// Sets the layer count, keeping every layer on the RY axis.
    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = layers;
        self.rotation_axes = vec![RotationAxis::Ry; layers];
        self
    }

    pub fn with_axes(mut self, axes: Vec<RotationAxis>) -> Self {
        self.layers = axes.len();
        self.rotation_axes = axes;
        self
    }

    pub fn with_entangler(mut self, entangler: Entangler) -> Self {
        self.entangler = entangler;
        self
    }

    pub fn parameter_count(&self) -> usize {
        self.layers * self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "ansatz qubit count must be between 1 and {MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.layers == 0 {
            return Err(Error::Config("ansatz needs at least one layer".into()));
        }
        if self.rotation_axes.len() != self.layers {
            return Err(Error::Config(format!(
                "ansatz declares {} layers but {} rotation axes",
                self.layers,
                self.rotation_axes.len()
            )));
        }
        Ok(())
    }
}

/// Builds the ansatz circuit for one parameter vector, laid out layer by
/// layer: `theta[l * n + q]` drives the rotation on qubit `q` in layer `l`.
pub fn build_ansatz_circuit(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    if theta.len() != spec.parameter_count() {
        return Err(Error::Usage(format!(
            "ansatz expects {} parameters, got {}",
            spec.parameter_count(),
            theta.len()
        )));
    }
    if let Some(pos) = theta.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("parameter {pos} is not finite")));
    }
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n)?;
    for (layer, &axis) in spec.rotation_axes.iter().enumerate() {
        for q in 0..n {
            let angle = theta[layer * n + q];
            let gate = match axis {
                RotationAxis::Rx => Gate::Rx { qubit: q, angle },
                RotationAxis::Ry => Gate::Ry { qubit: q, angle },
                RotationAxis::Rz => Gate::Rz { qubit: q, angle },
            };
            circuit.push(gate)?;
        }
        if n >= 2 {
            match spec.entangler {
                Entangler::CnotRing => {
                    for q in 0..n {
                        circuit.push(Gate::Cnot { control: q, target: (q + 1) % n })?;
                    }
                }
                Entangler::CnotLinear => {
                    for q in 0..n - 1 {
                        circuit.push(Gate::Cnot { control: q, target: q + 1 })?;
                    }
                }
            }
        }
    }
    Ok(circuit)
}

/// Expectation of the Z-parity observable over `observable_qubits` on the
/// state `ansatz(theta) . encode(x) |0>`.
pub fn model_expectation(
    fspec: &FeatureMapSpec,
    aspec: &AnsatzSpec,
    theta: &[f64],
    x: &[f64],
    observable_qubits: &[usize],
) -> Result<f64> {
    if fspec.n_qubits != aspec.n_qubits {
        return Err(Error::Usage(format!(
            "feature map is over {} qubits but the ansatz over {}",
            fspec.n_qubits, aspec.n_qubits
        )));
    }
    let encoded = encode(fspec, x)?;
    expectation_from_encoded(&encoded, aspec, theta, observable_qubits)
}

/// Same as [`model_expectation`] but starting from an already-encoded
/// state, so training loops can encode each sample once.
pub fn expectation_from_encoded(
    encoded: &StateVector,
    aspec: &AnsatzSpec,
    theta: &[f64],
    observable_qubits: &[usize],
) -> Result<f64> {
    let circuit = build_ansatz_circuit(aspec, theta)?;
    encoded.apply_circuit(&circuit)?.expect_z_parity(observable_qubits)
}

/// A scalar function of a parameter vector with an optional analytic
/// gradient. The default gradient is the parameter-shift rule, exact when
/// the value is an expectation whose parameters all enter through
/// single-qubit rotations.
pub trait Objective {
    fn value(&self, theta: &[f64]) -> Result<f64>;

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        parameter_shift_grad(|t| self.value(t), theta)
    }
}

impl<F: Fn(&[f64]) -> Result<f64>> Objective for F {
    fn value(&self, theta: &[f64]) -> Result<f64> {
        self(theta)
    }
}

/// Parameter-shift gradient of a black-box objective: component `k` is
/// `(f(theta + pi/2 e_k) - f(theta - pi/2 e_k)) / 2`.
pub fn parameter_shift_grad<F>(objective: F, theta: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut grad = Vec::with_capacity(theta.len());
    let mut shifted = theta.to_vec();
    for k in 0..theta.len() {
        shifted[k] = theta[k] + HALF_PI;
        let plus = objective(&shifted)?;
        shifted[k] = theta[k] - HALF_PI;
        let minus = objective(&shifted)?;
        shifted[k] = theta[k];
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

/// Which update rule [`minimize`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMethod {
    GradientDescent,
    Spsa,
}

/// Optimizer settings. `tolerance` is both the target objective level and
/// (for gradient descent) the minimum per-iteration improvement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    /// Drives SPSA's perturbation draws; ignored by gradient descent.
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(method: OptimizerMethod) -> Self {
        OptimizerConfig { method, learning_rate: 0.2, max_iters: 200, tolerance: 1e-6, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("optimizer needs at least one iteration".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Objective value at each iterate, starting with iteration 0 at the
/// initial parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub entries: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
}

impl TrainingTrace {
    pub fn push(&mut self, iteration: usize, objective: f64) {
        self.entries.push(TraceEntry { iteration, objective });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_objective(&self) -> Option<f64> {
        self.entries.first().map(|e| e.objective)
    }

    pub fn last_objective(&self) -> Option<f64> {
        self.entries.last().map(|e| e.objective)
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.objective).reduce(f64::min)
    }

    /// Writes `iteration,objective` rows; floats round-trip bit for bit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,objective")?;
        for e in &self.entries {
            writeln!(out, "{},{}", e.iteration, e.objective)?;
        }
        Ok(())
    }

    /// Reads a trace written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "iteration,objective" => {}
            _ => return Err(Error::Data("trace csv must start with iteration,objective".into())),
        }
        let mut trace = TrainingTrace::default();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            let mut fields = line.split(',');
            let parse = |f: Option<&str>| {
                f.and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Data(format!("trace csv line {} is malformed", lineno + 2)))
            };
            let iteration = parse(fields.next())? as usize;
            let objective = parse(fields.next())?;
            trace.push(iteration, objective);
        }
        Ok(trace)
    }
}

/// Uniform initial parameters in `[-pi, pi)`, deterministic for a seed.
pub fn random_initial_theta(count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-PI..PI)).collect()
}

/// Minimizes an objective from the given starting point.
///
/// Gradient descent steps along `Objective::gradient` and stops when the
/// objective drops below `tolerance`, improves by less than `tolerance`,
/// or `max_iters` runs out. SPSA perturbs all parameters simultaneously
/// along seeded Rademacher directions with decaying gains `a_k =
/// learning_rate / (k+1)^0.602` and `c_k = 0.1 / (k+1)^0.101`; being
/// stochastic it only stops on the objective level or the iteration cap.
/// Returns the best parameters seen and the full per-iteration trace.
pub fn minimize<O: Objective>(
    config: &OptimizerConfig,
    objective: &O,
    initial: &[f64],
) -> Result<(Vec<f64>, TrainingTrace)> {
    config.validate()?;
    if initial.is_empty() {
        return Err(Error::Usage("cannot optimize an empty parameter vector".into()));
    }
    if let Some(pos) = initial.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("initial parameter {pos} is not finite")));
    }

    let check = |v: f64, iteration: usize| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("objective is not finite at iteration {iteration}")))
        }
    };

    let mut theta = initial.to_vec();
    let mut value = check(objective.value(&theta)?, 0)?;
    let mut trace = TrainingTrace::default();
    trace.push(0, value);
    let mut best_theta = theta.clone();
    let mut best_value = value;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for k in 1..=config.max_iters {
        match config.method {
            OptimizerMethod::GradientDescent => {
                let grad = objective.gradient(&theta)?;
                if grad.len() != theta.len() {
                    return Err(Error::Usage(format!(
                        "gradient has {} components for {} parameters",
                        grad.len(),
                        theta.len()
                    )));
                }
                for (t, g) in theta.iter_mut().zip(&grad) {
                    *t -= config.learning_rate * g;
                }
            }
            OptimizerMethod::Spsa => {
                let gain_a = config.learning_rate / ((k as f64).powf(0.602));
                let gain_c = 0.1 / ((k as f64).powf(0.101));
                let directions: Vec<f64> =
                    (0..theta.len()).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
                let plus: Vec<f64> =
                    theta.iter().zip(&directions).map(|(t, d)| t + gain_c * d).collect();
                let minus: Vec<f64> =
                    theta.iter().zip(&directions).map(|(t, d)| t - gain_c * d).collect();
                let f_plus = check(objective.value(&plus)?, k)?;
                let f_minus = check(objective.value(&minus)?, k)?;
                let diff = (f_plus - f_minus) / (2.0 * gain_c);
                for (t, d) in theta.iter_mut().zip(&directions) {
                    *t -= gain_a * diff / d;
                }
            }
        }

        let prev = value;
        value = check(objective.value(&theta)?, k)?;
        trace.push(k, value);
        if value < best_value {
            best_value = value;
            best_theta = theta.clone();
        }
        if value < config.tolerance {
            break;
        }
        if config.method == OptimizerMethod::GradientDescent
            && (prev - value).abs() < config.tolerance
        {
            break;
        }
    }

    Ok((best_theta, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featuremap::FeatureMapKind;
    use approx::assert_abs_diff_eq;

    struct Quadratic;

    impl Objective for Quadratic {
        fn value(&self, theta: &[f64]) -> Result<f64> {
            Ok((theta[0] - 1.0).powi(2))
        }

        fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![2.0 * (theta[0] - 1.0)])
        }
    }

    #[test]
    fn ansatz_layout_matches_the_declared_shape() {
        let spec = AnsatzSpec::new(2).with_layers(1).with_entangler(Entangler::CnotLinear);
        let c = build_ansatz_circuit(&spec, &[0.1, 0.2]).unwrap();
        assert_eq!(
            c.gates(),
            &[
                Gate::Ry { qubit: 0, angle: 0.1 },
                Gate::Ry { qubit: 1, angle: 0.2 },
                Gate::Cnot { control: 0, target: 1 },
            ]
        );

        let spec = AnsatzSpec::new(4);
        assert_eq!(spec.parameter_count(), 12);
        let c = build_ansatz_circuit(&spec, &[0.0; 12]).unwrap();
        let rotations = c.gates().iter().filter(|g| matches!(g, Gate::Ry { .. })).count();
        let cnots = c.gates().iter().filter(|g| matches!(g, Gate::Cnot { .. })).count();
        assert_eq!((rotations, cnots), (12, 12));

        // a single qubit has nothing to entangle
        let spec = AnsatzSpec::new(1).with_layers(2);
        let c = build_ansatz_circuit(&spec, &[0.3, 0.4]).unwrap();
        assert!(c.gates().iter().all(|g| g.operands().len() == 1));
    }

    #[test]
    fn ansatz_validation_catches_shape_errors() {
        let spec = AnsatzSpec::new(2);
        assert!(matches!(build_ansatz_circuit(&spec, &[0.0; 3]), Err(Error::Usage(_))));
        assert!(matches!(
            build_ansatz_circuit(&AnsatzSpec::new(0), &[]),
            Err(Error::Config(_))
        ));
        let bad_axes = AnsatzSpec { rotation_axes: vec![RotationAxis::Ry], ..AnsatzSpec::new(2) };
        assert!(matches!(bad_axes.validate(), Err(Error::Config(_))));
        assert!(matches!(
            build_ansatz_circuit(&AnsatzSpec::new(1).with_layers(1), &[f64::NAN]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn single_qubit_expectation_has_the_closed_form() {
        // encode(x=0) = H|0>, then RY(theta): <Z> = -sin(theta)
        let fspec = FeatureMapSpec::new(FeatureMapKind::Z, 1).with_reps(1);
        let aspec = AnsatzSpec::new(1).with_layers(1);
        for theta in [-1.2, 0.0, 0.5, 2.4] {
            let e = model_expectation(&fspec, &aspec, &[theta], &[0.0], &[0]).unwrap();
            assert_abs_diff_eq!(e, -theta.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rz_layers_commute_with_the_parity_observable() {
        let aspec = AnsatzSpec::new(2)
            .with_axes(vec![RotationAxis::Rz, RotationAxis::Rz])
            .with_entangler(Entangler::CnotLinear);
        let basis = StateVector::basis(2, 1).unwrap();
        let before = basis.expect_z_parity(&[0, 1]).unwrap();
        let rotated = basis
            .apply_circuit(&build_ansatz_circuit(&aspec, &[0.7, -1.1, 0.2, 0.9]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(rotated.expect_z_parity(&[0, 1]).unwrap(), before, epsilon = 1e-12);
    }

    #[test]
    fn expectation_stays_in_the_unit_interval() {
        let fspec = FeatureMapSpec::new(FeatureMapKind::Zz, 3);
        let aspec = AnsatzSpec::new(3);
        let theta = random_initial_theta(aspec.parameter_count(), 5);
        let e = model_expectation(&fspec, &aspec, &theta, &[0.3, 1.2, 2.8], &[0, 1, 2]).unwrap();
        assert!((-1.0..=1.0).contains(&e));
    }

    #[test]
    fn mismatched_widths_are_a_usage_error() {
        let fspec = FeatureMapSpec::new(FeatureMapKind::Z, 2);
        let aspec = AnsatzSpec::new(3);
        let theta = vec![0.0; aspec.parameter_count()];
        assert!(matches!(
            model_expectation(&fspec, &aspec, &theta, &[0.1, 0.2], &[0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn parameter_shift_recovers_known_derivatives() {
        // f(theta) = <Z> after RY(theta)|0> = cos(theta); f' = -sin(theta)
        let f = |theta: &[f64]| -> Result<f64> {
            StateVector::zero(1)?
                .apply_gate(&Gate::Ry { qubit: 0, angle: theta[0] })?
                .expect_z_parity(&[0])
        };
        for theta in [0.0, HALF_PI, 1.1, -2.0] {
            let g = parameter_shift_grad(f, &[theta]).unwrap();
            assert_abs_diff_eq!(g[0], -theta.sin(), epsilon = 1e-12);
        }
        let constant = |_: &[f64]| -> Result<f64> { Ok(0.25) };
        let g = parameter_shift_grad(constant, &[0.4, 1.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn parameter_shift_matches_finite_differences_on_expectations() {
        let fspec = FeatureMapSpec::new(FeatureMapKind::Zz, 2);
        let aspec = AnsatzSpec::new(2).with_layers(2);
        let x = [0.9, 2.1];
        let obs = [0, 1];
        let f = |theta: &[f64]| model_expectation(&fspec, &aspec, theta, &x, &obs);
        let theta = random_initial_theta(aspec.parameter_count(), 9);
        let g = parameter_shift_grad(f, &theta).unwrap();
        let h = 1e-5;
        for k in 0..theta.len() {
            let mut tp = theta.clone();
            tp[k] += h;
            let mut tm = theta.clone();
            tm[k] -= h;
            let fd = (f(&tp).unwrap() - f(&tm).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(g[k], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn gradient_descent_converges_on_the_quadratic() {
        let config = OptimizerConfig {
            method: OptimizerMethod::GradientDescent,
            learning_rate: 0.4,
            max_iters: 50,
            tolerance: 1e-10,
            seed: 0,
        };
        let (theta, trace) = minimize(&config, &Quadratic, &[0.0]).unwrap();
        assert_abs_diff_eq!(theta[0], 1.0, epsilon = 1e-3);
        assert!(trace.len() <= 51);
        assert_eq!(trace.entries[0].iteration, 0);
    }

    #[test]
    fn gradient_descent_decreases_every_iteration_for_small_rates() {
        for lr in [0.1, 0.4, 0.9] {
            let config = OptimizerConfig {
                method: OptimizerMethod::GradientDescent,
                learning_rate: lr,
                max_iters: 30,
                tolerance: 1e-14,
                seed: 0,
            };
            let (_, trace) = minimize(&config, &Quadratic, &[0.0]).unwrap();
            for w in trace.entries.windows(2) {
                assert!(
                    w[1].objective < w[0].objective,
                    "objective rose at lr {lr}: {} -> {}",
                    w[0].objective,
                    w[1].objective
                );
            }
        }
    }

    #[test]
    fn a_loose_tolerance_stops_after_one_iteration() {
        let config = OptimizerConfig {
            method: OptimizerMethod::GradientDescent,
            learning_rate: 0.4,
            max_iters: 50,
            tolerance: 10.0,
            seed: 0,
        };
        let (_, trace) = minimize(&config, &Quadratic, &[0.0]).unwrap();
        assert_eq!(trace.len(), 2); // iteration 0 and iteration 1
    }

    #[test]
    fn spsa_is_deterministic_per_seed_and_makes_progress() {
        let objective =
            |theta: &[f64]| -> Result<f64> { Ok(theta.iter().map(|t| (t - 0.5).powi(2)).sum()) };
        let config = OptimizerConfig {
            method: OptimizerMethod::Spsa,
            learning_rate: 0.2,
            max_iters: 150,
            tolerance: 1e-12,
            seed: 21,
        };
        let initial = [2.0, -1.0, 0.0];
        let (theta_a, trace_a) = minimize(&config, &objective, &initial).unwrap();
        let (theta_b, trace_b) = minimize(&config, &objective, &initial).unwrap();
        assert_eq!(theta_a, theta_b);
        assert_eq!(trace_a, trace_b);
        let (_, trace_c) =
            minimize(&OptimizerConfig { seed: 22, ..config }, &objective, &initial).unwrap();
        assert_ne!(trace_a, trace_c);
        assert!(
            trace_a.best_objective().unwrap() < 0.5 * trace_a.first_objective().unwrap(),
            "spsa failed to reduce the objective"
        );
    }

    #[test]
    fn returned_parameters_achieve_the_best_traced_value() {
        let objective =
            |theta: &[f64]| -> Result<f64> { Ok(theta.iter().map(|t| (t - 0.5).powi(2)).sum()) };
        let config = OptimizerConfig {
            method: OptimizerMethod::Spsa,
            learning_rate: 0.3,
            max_iters: 80,
            tolerance: 1e-12,
            seed: 4,
        };
        let (theta, trace) = minimize(&config, &objective, &[1.5, -0.5]).unwrap();
        let best = trace.best_objective().unwrap();
        assert_abs_diff_eq!(objective.value(&theta).unwrap(), best, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_objectives_name_the_iteration() {
        let objective = |theta: &[f64]| -> Result<f64> {
            Ok(if theta[0] == 0.0 { 1.0 } else { f64::NAN })
        };
        let config = OptimizerConfig {
            method: OptimizerMethod::GradientDescent,
            learning_rate: 0.1,
            max_iters: 10,
            tolerance: 1e-8,
            seed: 0,
        };
        let err = minimize(&config, &objective, &[0.0]).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("iteration"), "message: {msg}"),
            other => panic!("expected a numeric error, got {other:?}"),
        }
    }

    #[test]
    fn optimizer_config_validation() {
        let ok = OptimizerConfig::new(OptimizerMethod::Spsa);
        assert!(ok.validate().is_ok());
        assert!(OptimizerConfig { learning_rate: 0.0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { max_iters: 0, ..ok.clone() }.validate().is_err());
        assert!(OptimizerConfig { tolerance: -1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn trace_csv_round_trips() {
        let mut trace = TrainingTrace::default();
        trace.push(0, 0.5);
        trace.push(1, 0.25);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "iteration,objective\n0,0.5\n1,0.25\n");
        assert_eq!(TrainingTrace::read_csv(buf.as_slice()).unwrap(), trace);
        assert!(matches!(TrainingTrace::read_csv("bogus\n".as_bytes()), Err(Error::Data(_))));
    }

    #[test]
    fn initial_parameters_are_seeded_and_bounded() {
        let a = random_initial_theta(6, 1);
        let b = random_initial_theta(6, 1);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| (-PI..PI).contains(t)));
        assert_ne!(a, random_initial_theta(6, 2));
    }
}
