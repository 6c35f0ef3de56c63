//! Quantum kernel and variational classifiers for genomic sequences.
//!
//! Everything runs on an exact dense statevector simulator, so results are
//! deterministic given a seed and need no quantum hardware or SDK. The crate
//! covers four classifiers (kernel SVM, kernelized Pegasos, a variational
//! classifier trained on binary cross-entropy, and a single-qubit-readout
//! network trained on squared error), the genomic preprocessing pipeline that
//! feeds them (k-mer counts, PCA, angle scaling), and the evaluation metrics
//! used to compare them.

pub mod datagen;
pub mod error;
pub mod featuremap;
pub mod kernel;
mod labels;
pub mod metrics;
pub mod models;
pub mod pegasos;
pub mod pipeline;
pub mod qsvc;
pub mod statevector;
pub mod variational;

pub use error::{Error, Result};

// re-exported so downstream crates can name the matrix types our public
// API returns without pinning their own ndarray version
pub use ndarray;
