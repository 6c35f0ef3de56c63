//! Synthetic labelled sequence generation.
//!
//! Sequences are drawn from first-order Markov chains over {A, C, G, T}.
//! Two built-in chains give the classes distinguishable k-mer statistics:
//! one GC-rich with smooth transitions (class 1), one AT-leaning with a
//! strong CG depletion (class 0). A small N rate injects ambiguous bases
//! so downstream window handling gets exercised. Everything is driven by
//! one seed, so a spec regenerates its dataset byte for byte.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pipeline::SequenceRecord;

const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

/// First-order Markov chain over A, C, G, T.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    /// Distribution of the first base.
    pub initial: [f64; 4],
    /// `transitions[i][j]` is the probability of base j following base i,
    /// rows and columns in A, C, G, T order.
    pub transitions: [[f64; 4]; 4],
}

impl MarkovModel {
    /// GC-rich chain with mild transition structure; used for class 1.
    pub fn coding_like() -> Self {
        MarkovModel {
            initial: [0.22, 0.28, 0.28, 0.22],
            transitions: [
                [0.20, 0.28, 0.30, 0.22],
                [0.18, 0.30, 0.28, 0.24],
                [0.22, 0.28, 0.28, 0.22],
                [0.16, 0.30, 0.30, 0.24],
            ],
        }
    }

    /// AT-leaning chain with a pronounced CG dinucleotide depletion; used
    /// for class 0.
    pub fn intergenic_like() -> Self {
        MarkovModel {
            initial: [0.31, 0.18, 0.17, 0.34],
            transitions: [
                [0.33, 0.17, 0.20, 0.30],
                [0.32, 0.20, 0.04, 0.44],
                [0.30, 0.20, 0.18, 0.32],
                [0.28, 0.18, 0.22, 0.32],
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_row = |name: &str, row: &[f64; 4]| -> Result<()> {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Config(format!("{name} has probabilities outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("{name} sums to {sum}, expected 1")));
            }
            Ok(())
        };
        check_row("initial distribution", &self.initial)?;
        for (i, row) in self.transitions.iter().enumerate() {
            check_row(&format!("transition row {}", BASES[i]), row)?;
        }
        Ok(())
    }

    /// Draws one sequence of the given length.
    pub fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> String {
        let mut seq = String::with_capacity(len);
        let mut state = pick(&self.initial, rng);
        seq.push(BASES[state]);
        for _ in 1..len {
            state = pick(&self.transitions[state], rng);
            seq.push(BASES[state]);
        }
        seq
    }
}

fn pick<R: Rng>(dist: &[f64; 4], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    3
}

/// Recipe for a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub n_sequences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Per-position probability of masking the base as N.
    pub n_rate: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(n_sequences: usize, seed: u64) -> Self {
        DatasetSpec { n_sequences, min_len: 150, max_len: 250, n_rate: 0.002, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sequences < 2 {
            return Err(Error::Config(format!(
                "n_sequences {} too small, need at least one per class",
                self.n_sequences
            )));
        }
        if self.min_len < 1 || self.min_len > self.max_len {
            return Err(Error::Config(format!(
                "length range {}..={} is invalid",
                self.min_len, self.max_len
            )));
        }
        if !(0.0..1.0).contains(&self.n_rate) {
            return Err(Error::Config(format!("n_rate {} must be in [0, 1)", self.n_rate)));
        }
        Ok(())
    }
}

/// Generates a balanced labelled dataset: even indices come from the
/// class-0 chain, odd indices from the class-1 chain.
pub fn synthetic_dataset(spec: &DatasetSpec) -> Result<Vec<SequenceRecord>> {
    spec.validate()?;
    let class0 = MarkovModel::intergenic_like();
    let class1 = MarkovModel::coding_like();
    class0.validate()?;
    class1.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n_sequences);
    for i in 0..spec.n_sequences {
        let label = (i % 2) as u8;
        let chain = if label == 1 { &class1 } else { &class0 };
        let len = rng.gen_range(spec.min_len..=spec.max_len);
        let mut seq = chain.sample(&mut rng, len);
        if spec.n_rate > 0.0 {
            seq = seq
                .chars()
                .map(|c| if rng.gen_bool(spec.n_rate) { 'N' } else { c })
                .collect();
        }
        records.push(SequenceRecord { sequence: seq, label });
    }
    Ok(records)
}
