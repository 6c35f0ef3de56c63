//! Data-encoding circuits.
//!
//! A feature vector `x` in `[0, pi]^n` is mapped to an `n`-qubit state by a
//! layered circuit: each repetition opens with a Hadamard wall and then
//! applies diagonal phase evolutions whose angles are functions of `x`. The
//! first-order term puts `Phase(2 x_i)` on qubit `i`; higher-order terms act
//! on qubit subsets with angle `2 * prod (pi - x_q)`, conjugated by a CNOT
//! chain so the phase picks up the subset parity. The `Pauli` kind further
//! conjugates by basis changes (`H` for X, `RX(pi/2)` for Y) so the
//! evolution generator can be any Pauli word, which reduces to the `Z` and
//! `Zz` kinds for the words `Z` and `Z, ZZ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Gate, StateVector, MAX_QUBITS};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

/// Which family of encoding circuits to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMapKind {
    /// First-order phases only; never entangles.
    Z,
    /// First-order phases plus pairwise ZZ evolutions.
    Zz,
    /// Arbitrary Pauli words supplied in `pauli_strings`.
    Pauli,
}

/// Which qubit subsets the multi-qubit evolutions range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// Every size-`l` combination, lexicographic.
    Full,
    /// Consecutive windows `(i, .., i+l-1)` only.
    Linear,
}

/// Settings that fully determine an encoding circuit for a given `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub kind: FeatureMapKind,
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
    /// Pauli words over {X, Y, Z}; only consulted for `FeatureMapKind::Pauli`.
    pub pauli_strings: Vec<String>,
}

impl FeatureMapSpec {
    /// A spec with the conventional defaults: two repetitions, full
    /// entanglement, and (for the Pauli kind) the words `Z` and `ZZ`.
    pub fn new(kind: FeatureMapKind, n_qubits: usize) -> Self {
        let pauli_strings = match kind {
            FeatureMapKind::Pauli if n_qubits >= 2 => vec!["Z".to_string(), "ZZ".to_string()],
            FeatureMapKind::Pauli => vec!["Z".to_string()],
            _ => Vec::new(),
        };
        FeatureMapSpec { kind, n_qubits, reps: 2, entanglement: Entanglement::Full, pauli_strings }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn with_pauli_strings<S: Into<String>>(mut self, strings: Vec<S>) -> Self {
        self.pauli_strings = strings.into_iter().map(Into::into).collect();
        self
    }

    /// Checks every field against its allowed range.
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "feature map qubit count must be between 1 and {MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("feature map needs at least one repetition".into()));
        }
        match self.kind {
            FeatureMapKind::Pauli => {
                if self.pauli_strings.is_empty() {
                    return Err(Error::Config(
                        "pauli feature map needs at least one pauli string".into(),
                    ));
                }
                for s in &self.pauli_strings {
                    if s.is_empty() || s.len() > self.n_qubits {
                        return Err(Error::Config(format!(
                            "pauli string \"{s}\" must have between 1 and {} characters",
                            self.n_qubits
                        )));
                    }
                    if let Some(bad) = s.chars().find(|c| !matches!(c, 'X' | 'Y' | 'Z')) {
                        return Err(Error::Config(format!(
                            "pauli string \"{s}\" contains '{bad}'; only X, Y, Z are allowed"
                        )));
                    }
                }
            }
            _ => {
                if !self.pauli_strings.is_empty() {
                    return Err(Error::Config(
                        "pauli strings are only meaningful for the pauli feature map".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn effective_words(&self) -> Vec<&str> {
        match self.kind {
            FeatureMapKind::Z => vec!["Z"],
            FeatureMapKind::Zz => vec!["Z", "ZZ"],
            FeatureMapKind::Pauli => self.pauli_strings.iter().map(String::as_str).collect(),
        }
    }
}

fn check_features(spec: &FeatureMapSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.n_qubits {
        return Err(Error::Usage(format!(
            "feature vector has {} entries but the map encodes {}",
            x.len(),
            spec.n_qubits
        )));
    }
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("feature {pos} is not finite")));
    }
    Ok(())
}

/// Subsets of `0..n` of size `l` in the order fixed by the entanglement
/// setting.
fn qubit_subsets(n: usize, l: usize, entanglement: Entanglement) -> Vec<Vec<usize>> {
    match entanglement {
        Entanglement::Linear => (0..=n.saturating_sub(l)).map(|i| (i..i + l).collect()).collect(),
        Entanglement::Full => {
            let mut out = Vec::new();
            let mut current = Vec::with_capacity(l);
            fn rec(start: usize, n: usize, l: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if current.len() == l {
                    out.push(current.clone());
                    return;
                }
                for q in start..n {
                    current.push(q);
                    rec(q + 1, n, l, current, out);
                    current.pop();
                }
            }
            rec(0, n, l, &mut current, &mut out);
            out
        }
    }
}

/// The phase angle for one evolution term: `2 x_i` for single qubits,
/// `2 * prod (pi - x_q)` for larger subsets.
fn phase_angle(x: &[f64], subset: &[usize]) -> f64 {
    if subset.len() == 1 {
        2.0 * x[subset[0]]
    } else {
        2.0 * subset.iter().map(|&q| PI - x[q]).product::<f64>()
    }
}

fn push_word_evolution(circuit: &mut Circuit, word: &str, subset: &[usize], angle: f64) -> Result<()> {
    let chars: Vec<char> = word.chars().collect();
    // into the word's eigenbasis
    for (k, &q) in subset.iter().enumerate() {
        match chars[k] {
            'X' => circuit.push(Gate::H { qubit: q })?,
            'Y' => circuit.push(Gate::Rx { qubit: q, angle: HALF_PI })?,
            _ => {}
        }
    }
    for w in subset.windows(2) {
        circuit.push(Gate::Cnot { control: w[0], target: w[1] })?;
    }
    circuit.push(Gate::Phase { qubit: *subset.last().expect("subset non-empty"), angle })?;
    for w in subset.windows(2).rev() {
        circuit.push(Gate::Cnot { control: w[0], target: w[1] })?;
    }
    for (k, &q) in subset.iter().enumerate().rev() {
        match chars[k] {
            'X' => circuit.push(Gate::H { qubit: q })?,
            'Y' => circuit.push(Gate::Rx { qubit: q, angle: -HALF_PI })?,
            _ => {}
        }
    }
    Ok(())
}

/// Builds the encoding circuit for one feature vector.
pub fn build_feature_circuit(spec: &FeatureMapSpec, x: &[f64]) -> Result<Circuit> {
    spec.validate()?;
    check_features(spec, x)?;
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n)?;
    for _ in 0..spec.reps {
        for q in 0..n {
            circuit.push(Gate::H { qubit: q })?;
        }
        for word in spec.effective_words() {
            for subset in qubit_subsets(n, word.len(), spec.entanglement) {
                let angle = phase_angle(x, &subset);
                push_word_evolution(&mut circuit, word, &subset, angle)?;
            }
        }
    }
    Ok(circuit)
}

/// Encodes a feature vector into a state: the encoding circuit applied to
/// `|0...0>`.
pub fn encode(spec: &FeatureMapSpec, x: &[f64]) -> Result<StateVector> {
    let circuit = build_feature_circuit(spec, x)?;
    StateVector::zero(spec.n_qubits)?.apply_circuit(&circuit)
}
