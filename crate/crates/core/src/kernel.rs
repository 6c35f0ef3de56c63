//! Fidelity kernel between encoded feature vectors.
//!
//! The kernel of two samples is the squared overlap of their encoded states,
//! `K(x, x') = |<psi(x)|psi(x')>|^2`, so every Gram matrix is symmetric,
//! has a unit diagonal, lies in `[0, 1]` entrywise, and is positive
//! semidefinite by construction. Building a Gram matrix encodes each row
//! once and then takes pairwise overlaps.

use std::io::{BufRead, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::featuremap::{encode, FeatureMapSpec};
use crate::statevector::StateVector;

/// A kernel Gram matrix together with its sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: Array2<f64>,
}

impl KernelMatrix {
    /// Wraps a precomputed matrix after checking it is square, symmetric
    /// (within 1e-10), and has a unit diagonal (within 1e-10). Positive
    /// semidefiniteness is not verified here; it holds for matrices built
    /// by [`kernel_matrix`] and is the caller's burden otherwise.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r == 0 || r != c {
            return Err(Error::Usage(format!("kernel matrix must be square and non-empty, got {r}x{c}")));
        }
        for i in 0..r {
            if (values[[i, i]] - 1.0).abs() > 1e-10 {
                return Err(Error::Numeric(format!(
                    "kernel diagonal entry {i} is {}, expected 1",
                    values[[i, i]]
                )));
            }
            for j in (i + 1)..r {
                if (values[[i, j]] - values[[j, i]]).abs() > 1e-10 {
                    return Err(Error::Numeric(format!(
                        "kernel matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(KernelMatrix { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

fn encode_rows(spec: &FeatureMapSpec, x: &Array2<f64>) -> Result<Vec<StateVector>> {
    if x.nrows() == 0 {
        return Err(Error::Usage("kernel computation needs at least one sample".into()));
    }
    x.rows().into_iter().map(|row| encode(spec, &row.to_vec())).collect()
}

fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Kernel value for one pair of feature vectors.
pub fn kernel_entry(spec: &FeatureMapSpec, xi: &[f64], xj: &[f64]) -> Result<f64> {
    fidelity(&encode(spec, xi)?, &encode(spec, xj)?)
}

/// Gram matrix over the rows of `x`.
pub fn kernel_matrix(spec: &FeatureMapSpec, x: &Array2<f64>) -> Result<KernelMatrix> {
    let states = encode_rows(spec, x)?;
    let n = states.len();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let f = fidelity(&states[i], &states[j])?;
            values[[i, j]] = f;
            values[[j, i]] = f;
        }
    }
    Ok(KernelMatrix { values })
}

/// Kernel values of one vector against every row of `x`.
pub fn kernel_row(spec: &FeatureMapSpec, x: &[f64], rows: &Array2<f64>) -> Result<Vec<f64>> {
    let state = encode(spec, x)?;
    let states = encode_rows(spec, rows)?;
    states.iter().map(|s| fidelity(&state, s)).collect()
}

/// Kernel values of every row of `a` against every row of `b`; row `i`
/// holds `K(a_i, b_j)` for all `j`. Each side is encoded once.
pub fn kernel_rows(spec: &FeatureMapSpec, a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let sa = encode_rows(spec, a)?;
    let sb = encode_rows(spec, b)?;
    let mut values = Array2::zeros((sa.len(), sb.len()));
    for (i, si) in sa.iter().enumerate() {
        for (j, sj) in sb.iter().enumerate() {
            values[[i, j]] = fidelity(si, sj)?;
        }
    }
    Ok(values)
}

/// Writes a Gram matrix as CSV: a `n=<count>` header line followed by one
/// comma-separated row per sample. Floats use the shortest representation
/// that round-trips, so rereading reproduces the matrix bit for bit.
pub fn write_gram_csv<W: Write>(matrix: &KernelMatrix, mut out: W) -> Result<()> {
    writeln!(out, "n={}", matrix.n())?;
    for row in matrix.values.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a Gram matrix written by [`write_gram_csv`].
pub fn read_gram_csv<R: BufRead>(input: R) -> Result<KernelMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data("gram csv is empty".into()))?
        .map_err(Error::Io)?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Data(format!("gram csv header must be n=<count>, got \"{header}\"")))?;
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Data(format!("gram csv ends after {i} of {n} rows")))?
            .map_err(Error::Io)?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n {
            return Err(Error::Data(format!(
                "gram csv row {} has {} fields, expected {n}",
                i + 1,
                fields.len()
            )));
        }
        for (j, field) in fields.iter().enumerate() {
            values[[i, j]] = field.trim().parse().map_err(|_| {
                Error::Data(format!("gram csv row {} field {} is not a number", i + 1, j + 1))
            })?;
        }
    }
    KernelMatrix::from_values(values)
}
