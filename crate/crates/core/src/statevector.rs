//! Dense statevector simulation.
//!
//! A register of `n` qubits is a vector of `2^n` complex amplitudes in the
//! computational basis. Qubit 0 is the least significant bit of the basis
//! index, so amplitude `k` describes the basis state whose bit `q` is
//! `(k >> q) & 1`. Gate application walks the amplitude array in place with
//! bit-masked strides; no gate ever builds the full `2^n x 2^n` matrix.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hard cap on register width. Dense simulation above this is not something
/// this crate is built for; 2^12 amplitudes keep every workload exact and
/// snappy on a laptop.
pub const MAX_QUBITS: usize = 12;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One gate of the supported set, carrying its operand qubits and angle.
///
/// Angles are radians. `Phase(theta)` is `diag(1, e^{i theta})`; the
/// rotation gates use the half-angle convention `R_P(theta) =
/// exp(-i theta P / 2)`; `Rzz` applies `e^{-i theta/2}` on even-parity
/// basis states of its two operands and `e^{+i theta/2}` on odd ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H { qubit: usize },
    X { qubit: usize },
    Y { qubit: usize },
    Z { qubit: usize },
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Phase { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    Rzz { a: usize, b: usize, angle: f64 },
}

impl Gate {
    /// Operand qubits in declaration order.
    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Y { qubit }
            | Gate::Z { qubit }
            | Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::Phase { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz { a, b } => vec![a, b],
            Gate::Rzz { a, b, .. } => vec![a, b],
        }
    }

    /// The inverse gate. Self-inverse gates return a copy; rotations and
    /// phases negate their angle.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx { qubit, angle } => Gate::Rx { qubit, angle: -angle },
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::Rz { qubit, angle } => Gate::Rz { qubit, angle: -angle },
            Gate::Phase { qubit, angle } => Gate::Phase { qubit, angle: -angle },
            Gate::Rzz { a, b, angle } => Gate::Rzz { a, b, angle: -angle },
            ref g => g.clone(),
        }
    }

    /// 2x2 matrix of a single-qubit gate, row-major; `None` for two-qubit
    /// gates. Exposed so tests can check unitarity and build brute-force
    /// circuit unitaries.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        let m = match *self {
            Gate::H { .. } => [[re(SQRT_HALF), re(SQRT_HALF)], [re(SQRT_HALF), re(-SQRT_HALF)]],
            Gate::X { .. } => [[re(0.0), re(1.0)], [re(1.0), re(0.0)]],
            Gate::Y { .. } => [[re(0.0), im(-1.0)], [im(1.0), re(0.0)]],
            Gate::Z { .. } => [[re(1.0), re(0.0)], [re(0.0), re(-1.0)]],
            Gate::Rx { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                [[re(c), im(-s)], [im(-s), re(c)]]
            }
            Gate::Ry { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                [[re(c), re(-s)], [re(s), re(c)]]
            }
            Gate::Rz { angle, .. } => {
                let p = Complex64::from_polar(1.0, angle / 2.0);
                [[p.conj(), re(0.0)], [re(0.0), p]]
            }
            Gate::Phase { angle, .. } => {
                [[re(1.0), re(0.0)], [re(0.0), Complex64::from_polar(1.0, angle)]]
            }
            _ => return None,
        };
        Some(m)
    }

    /// 4x4 matrix of a two-qubit gate over basis order `|q_low q_high>` =
    /// 00, 01, 10, 11 with the FIRST operand as the low bit; `None` for
    /// single-qubit gates.
    pub fn two_qubit_matrix(&self) -> Option<[[Complex64; 4]; 4]> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut m = [[z; 4]; 4];
        match *self {
            // first operand (control) is the low bit: states 1 and 3 have
            // the control set, and the target flip maps 1 <-> 3.
            Gate::Cnot { .. } => {
                m[0][0] = one;
                m[2][2] = one;
                m[1][3] = one;
                m[3][1] = one;
            }
            Gate::Cz { .. } => {
                m[0][0] = one;
                m[1][1] = one;
                m[2][2] = one;
                m[3][3] = -one;
            }
            Gate::Rzz { angle, .. } => {
                let p = Complex64::from_polar(1.0, angle / 2.0);
                m[0][0] = p.conj();
                m[1][1] = p;
                m[2][2] = p;
                m[3][3] = p.conj();
            }
            _ => return None,
        }
        Some(m)
    }
}

/// An ordered list of gates over a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        Ok(Circuit { n_qubits, gates: Vec::new() })
    }

    /// Appends a gate after checking its operands fit the register and are
    /// distinct.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let ops = gate.operands();
        for &q in &ops {
            if q >= self.n_qubits {
                return Err(Error::Usage(format!(
                    "gate references qubit {q} but the circuit has {} qubits",
                    self.n_qubits
                )));
            }
        }
        if ops.len() == 2 && ops[0] == ops[1] {
            return Err(Error::Usage(format!(
                "two-qubit gate with identical operands (qubit {})",
                ops[0]
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The circuit applying the inverse: gates reversed, angles negated.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Concatenates another circuit of the same width onto this one.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Usage(format!(
                "cannot extend a {}-qubit circuit with a {}-qubit circuit",
                self.n_qubits, other.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "qubit count must be between 1 and {MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Normalized pure state of an `n`-qubit register.
///
/// Values are immutable once built; gate application returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// The computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Usage(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes. The length must be a power of two
    /// matching a register of 1..=12 qubits and the norm must already be 1
    /// (within 1e-8); this is a constructor for tests and oracles, not a
    /// normalizer.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Usage(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-8 {
            return Err(Error::Usage(format!(
                "amplitudes have squared norm {norm_sq}, expected 1"
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Applies one gate, returning the new state.
    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector> {
        let mut next = self.clone();
        next.apply_in_place(gate)?;
        Ok(next)
    }

    /// Applies every gate of a circuit in order, returning the final state.
    pub fn apply_circuit(&self, circuit: &Circuit) -> Result<StateVector> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Usage(format!(
                "circuit is over {} qubits but the state has {}",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        let mut next = self.clone();
        for gate in circuit.gates() {
            next.apply_in_place(gate)?;
        }
        Ok(next)
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Usage(format!(
                "overlap between a {}-qubit and a {}-qubit state",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of each basis outcome, `|amp_k|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Expectation of the tensor product of Pauli Z over the given qubits:
    /// `sum_k (-1)^{popcount(k & mask)} |amp_k|^2`. The set must be
    /// non-empty and free of duplicates.
    pub fn expect_z_parity(&self, qubits: &[usize]) -> Result<f64> {
        if qubits.is_empty() {
            return Err(Error::Usage("parity observable over an empty qubit set".into()));
        }
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::Usage(format!(
                    "observable qubit {q} out of range for {} qubits",
                    self.n_qubits
                )));
            }
            let bit = 1usize << q;
            if mask & bit != 0 {
                return Err(Error::Usage(format!("observable lists qubit {q} twice")));
            }
            mask |= bit;
        }
        let mut value = 0.0;
        for (k, amp) in self.amps.iter().enumerate() {
            let sign = if (k & mask).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            value += sign * amp.norm_sqr();
        }
        Ok(value)
    }

    /// Draws `shots` measurement outcomes in the computational basis and
    /// returns the histogram. Deterministic for a fixed seed.
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(Error::Usage("sampling requires at least one shot".into()));
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut total = 0.0;
        for amp in &self.amps {
            total += amp.norm_sqr();
            cumulative.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(k).or_insert(0u64) += 1;
        }
        Ok(counts)
    }

    fn apply_in_place(&mut self, gate: &Gate) -> Result<()> {
        for &q in &gate.operands() {
            if q >= self.n_qubits {
                return Err(Error::Usage(format!(
                    "gate references qubit {q} but the state has {} qubits",
                    self.n_qubits
                )));
            }
        }
        match *gate {
            Gate::Cnot { control, target } => {
                if control == target {
                    return Err(Error::Usage(format!(
                        "two-qubit gate with identical operands (qubit {control})"
                    )));
                }
                let (cbit, tbit) = (1usize << control, 1usize << target);
                for k in 0..self.amps.len() {
                    if k & cbit != 0 && k & tbit == 0 {
                        self.amps.swap(k, k | tbit);
                    }
                }
            }
            Gate::Cz { a, b } => {
                if a == b {
                    return Err(Error::Usage(format!(
                        "two-qubit gate with identical operands (qubit {a})"
                    )));
                }
                let mask = (1usize << a) | (1usize << b);
                for (k, amp) in self.amps.iter_mut().enumerate() {
                    if k & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Rzz { a, b, angle } => {
                if a == b {
                    return Err(Error::Usage(format!(
                        "two-qubit gate with identical operands (qubit {a})"
                    )));
                }
                let phase = Complex64::from_polar(1.0, angle / 2.0);
                let (abit, bbit) = (1usize << a, 1usize << b);
                for (k, amp) in self.amps.iter_mut().enumerate() {
                    let parity = ((k & abit != 0) as u8) ^ ((k & bbit != 0) as u8);
                    *amp *= if parity == 1 { phase } else { phase.conj() };
                }
            }
            ref g => {
                let m = g
                    .single_qubit_matrix()
                    .expect("all remaining gate kinds are single-qubit");
                let step = 1usize << g.operands()[0];
                for block in (0..self.amps.len()).step_by(2 * step) {
                    for offset in 0..step {
                        let i0 = block + offset;
                        let i1 = i0 | step;
                        let v0 = self.amps[i0];
                        let v1 = self.amps[i1];
                        self.amps[i0] = m[0][0] * v0 + m[0][1] * v1;
                        self.amps[i1] = m[1][0] * v0 + m[1][1] * v1;
                    }
                }
            }
        }
        Ok(())
    }
}
