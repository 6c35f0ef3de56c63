//! Run configuration.
//!
//! Every run is described by one flat set of keys. Values come from three
//! layers, later layers winning: built-in defaults, an optional key=value
//! config file, then command-line flags. Flag names and config keys are
//! identical, so a config file is exactly a saved set of flags.

use std::path::{Path, PathBuf};

use helixq_core::featuremap::{Entanglement, FeatureMapKind, FeatureMapSpec};
use helixq_core::variational::{AnsatzSpec, Entangler, OptimizerConfig, OptimizerMethod};
use helixq_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Qsvc,
    Pegasos,
    Vqc,
    Qnn,
}

impl ModelChoice {
    pub const ALL: [ModelChoice; 4] =
        [ModelChoice::Qsvc, ModelChoice::Pegasos, ModelChoice::Vqc, ModelChoice::Qnn];

    pub fn name(self) -> &'static str {
        match self {
            ModelChoice::Qsvc => "qsvc",
            ModelChoice::Pegasos => "pegasos",
            ModelChoice::Vqc => "vqc",
            ModelChoice::Qnn => "qnn",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "qsvc" => Ok(ModelChoice::Qsvc),
            "pegasos" => Ok(ModelChoice::Pegasos),
            "vqc" => Ok(ModelChoice::Vqc),
            "qnn" => Ok(ModelChoice::Qnn),
            other => Err(Error::Config(format!(
                "unknown model {other:?}; expected qsvc, pegasos, vqc or qnn"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Fasta,
}

pub fn feature_map_name(kind: FeatureMapKind) -> &'static str {
    match kind {
        FeatureMapKind::Z => "z",
        FeatureMapKind::Zz => "zz",
        FeatureMapKind::Pauli => "pauli",
    }
}

fn parse_feature_map(s: &str) -> Result<FeatureMapKind> {
    match s {
        "z" => Ok(FeatureMapKind::Z),
        "zz" => Ok(FeatureMapKind::Zz),
        "pauli" => Ok(FeatureMapKind::Pauli),
        other => {
            Err(Error::Config(format!("unknown feature map {other:?}; expected z, zz or pauli")))
        }
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: {value:?} is not a non-negative integer")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: {value:?} is not a non-negative integer")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| Error::Config(format!("{key}: {value:?} is not a number")))
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub data: Option<PathBuf>,
    pub format: Option<DataFormat>,
    pub model: ModelChoice,
    pub feature_map: FeatureMapKind,
    pub reps: usize,
    pub entanglement: Entanglement,
    pub pauli_strings: Option<Vec<String>>,
    pub qubits: usize,
    pub kmer: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Use only the first N input records.
    pub limit: Option<usize>,
    // SVM dual solver
    pub cost: f64,
    pub svm_tol: f64,
    pub max_passes: Option<usize>,
    // Pegasos
    pub lambda: f64,
    pub steps: Option<usize>,
    // variational training
    pub optimizer: Option<OptimizerMethod>,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub ansatz_layers: usize,
    pub ansatz_entangler: Entangler,
    // benchmark cross product
    pub models: Vec<ModelChoice>,
    pub feature_maps: Vec<FeatureMapKind>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            data: None,
            format: None,
            model: ModelChoice::Qsvc,
            feature_map: FeatureMapKind::Zz,
            reps: 2,
            entanglement: Entanglement::Full,
            pauli_strings: None,
            qubits: 4,
            kmer: 3,
            test_fraction: 0.25,
            seed: 0,
            out: PathBuf::from("out"),
            limit: None,
            cost: 1.0,
            svm_tol: 1e-4,
            max_passes: None,
            lambda: 1e-3,
            steps: None,
            optimizer: None,
            learning_rate: 0.2,
            max_iters: 200,
            tolerance: 1e-6,
            ansatz_layers: 3,
            ansatz_entangler: Entangler::CnotRing,
            models: ModelChoice::ALL.to_vec(),
            feature_maps: vec![FeatureMapKind::Z, FeatureMapKind::Zz, FeatureMapKind::Pauli],
        }
    }
}

impl Settings {
    /// Builds settings from defaults, then the config file, then flags.
    pub fn resolve(config: Option<&Path>, flags: &[(&'static str, String)]) -> Result<Self> {
        let mut settings = Settings::default();
        if let Some(path) = config {
            for (lineno, key, value) in read_config_file(path)? {
                settings.set(&key, &value).map_err(|e| match e {
                    Error::Config(m) => {
                        Error::Config(format!("{} line {lineno}: {m}", path.display()))
                    }
                    other => other,
                })?;
            }
        }
        for (key, value) in flags {
            settings.set(key, value)?;
        }
        settings.validate()?;
        Ok(settings)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "format" => {
                self.format = Some(match value {
                    "csv" => DataFormat::Csv,
                    "fasta" => DataFormat::Fasta,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown format {other:?}; expected csv or fasta"
                        )))
                    }
                })
            }
            "model" => self.model = ModelChoice::parse(value)?,
            "feature-map" => self.feature_map = parse_feature_map(value)?,
            "reps" => self.reps = parse_usize(key, value)?,
            "entanglement" => {
                self.entanglement = match value {
                    "full" => Entanglement::Full,
                    "linear" => Entanglement::Linear,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown entanglement {other:?}; expected full or linear"
                        )))
                    }
                }
            }
            "pauli-strings" => {
                self.pauli_strings =
                    Some(value.split(',').map(|s| s.trim().to_string()).collect())
            }
            "qubits" => self.qubits = parse_usize(key, value)?,
            "kmer" => self.kmer = parse_usize(key, value)?,
            "test-fraction" => self.test_fraction = parse_f64(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "limit" => self.limit = Some(parse_usize(key, value)?),
            "cost" => self.cost = parse_f64(key, value)?,
            "svm-tol" => self.svm_tol = parse_f64(key, value)?,
            "max-passes" => self.max_passes = Some(parse_usize(key, value)?),
            "lambda" => self.lambda = parse_f64(key, value)?,
            "steps" => self.steps = Some(parse_usize(key, value)?),
            "optimizer" => {
                self.optimizer = Some(match value {
                    "gd" => OptimizerMethod::GradientDescent,
                    "spsa" => OptimizerMethod::Spsa,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown optimizer {other:?}; expected gd or spsa"
                        )))
                    }
                })
            }
            "learning-rate" => self.learning_rate = parse_f64(key, value)?,
            "max-iters" => self.max_iters = parse_usize(key, value)?,
            "tolerance" => self.tolerance = parse_f64(key, value)?,
            "ansatz-layers" => self.ansatz_layers = parse_usize(key, value)?,
            "ansatz-entangler" => {
                self.ansatz_entangler = match value {
                    "ring" => Entangler::CnotRing,
                    "linear" => Entangler::CnotLinear,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown ansatz entangler {other:?}; expected ring or linear"
                        )))
                    }
                }
            }
            "models" => {
                self.models = value
                    .split(',')
                    .map(|s| ModelChoice::parse(s.trim()))
                    .collect::<Result<_>>()?
            }
            "feature-maps" => {
                self.feature_maps = value
                    .split(',')
                    .map(|s| parse_feature_map(s.trim()))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Cheap well-formedness checks so a bad run dies before any data or
    /// simulator work starts. Module-level preconditions still apply.
    fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{key} must be positive and finite, got {v}")))
            }
        };
        positive("cost", self.cost)?;
        positive("svm-tol", self.svm_tol)?;
        positive("lambda", self.lambda)?;
        positive("learning-rate", self.learning_rate)?;
        positive("tolerance", self.tolerance)?;
        positive("test-fraction", self.test_fraction)?;
        if self.test_fraction >= 1.0 {
            return Err(Error::Config(format!(
                "test-fraction {} must be below 1",
                self.test_fraction
            )));
        }
        if self.models.is_empty() || self.feature_maps.is_empty() {
            return Err(Error::Config("models and feature-maps must be non-empty".into()));
        }
        // benchmark list entries are deliberately not validated here: a bad
        // cell should fail and be recorded per cell, not kill the grid
        self.feature_map_spec(self.feature_map).validate()
    }

    /// Spec for one feature-map kind. `pauli-strings` parameterizes only
    /// pauli maps; z and zz maps have fixed word sets.
    pub fn feature_map_spec(&self, kind: FeatureMapKind) -> FeatureMapSpec {
        let mut spec = FeatureMapSpec::new(kind, self.qubits)
            .with_reps(self.reps)
            .with_entanglement(self.entanglement);
        if kind == FeatureMapKind::Pauli {
            if let Some(strings) = &self.pauli_strings {
                spec = spec.with_pauli_strings(strings.clone());
            }
        }
        spec
    }

    pub fn ansatz_spec(&self) -> AnsatzSpec {
        AnsatzSpec::new(self.qubits)
            .with_layers(self.ansatz_layers)
            .with_entangler(self.ansatz_entangler)
    }

    pub fn optimizer_config(&self, default: OptimizerMethod, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            method: self.optimizer.unwrap_or(default),
            learning_rate: self.learning_rate,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            seed,
        }
    }
}

/// Parses a key=value config file: one pair per line, `#` comments and
/// blank lines ignored, whitespace around key and value trimmed.
fn read_config_file(path: &Path) -> Result<Vec<(usize, String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "{} line {}: expected key = value, found {line:?}",
                path.display(),
                idx + 1
            ))
        })?;
        pairs.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}
