//! Preprocessing pipeline from raw DNA sequences to circuit-ready angles.
//!
//! Stages: load labelled sequences (CSV or FASTA), count k-mer frequencies,
//! reduce dimension with PCA so one principal axis maps to one qubit, and
//! rescale each axis into a fixed angle window. The fitted PCA and scaler
//! are plain serializable structs so a trained model can carry its exact
//! preprocessing along with it.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angle window the scaler targets; encodings behave best when features
/// stay within half a period of the phase gates.
pub const ANGLE_LO: f64 = 0.0;
pub const ANGLE_HI: f64 = std::f64::consts::PI;

const MAX_KMER_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub sequence: String,
    pub label: u8,
}

fn validate_sequence(raw: &str, line: usize) -> Result<String> {
    if raw.is_empty() {
        return Err(Error::Data(format!("line {line}: empty sequence")));
    }
    let mut out = String::with_capacity(raw.len());
    for ch in raw.chars() {
        let up = ch.to_ascii_uppercase();
        match up {
            'A' | 'C' | 'G' | 'T' | 'N' => out.push(up),
            _ => {
                return Err(Error::Data(format!(
                    "line {line}: character {ch:?} is not one of A, C, G, T, N"
                )))
            }
        }
    }
    Ok(out)
}

fn parse_label(raw: &str, line: usize) -> Result<u8> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::Data(format!("line {line}: label {other:?} is not 0 or 1"))),
    }
}

/// Reads `sequence,label` CSV. The header line is required; labels are 0
/// or 1; sequences are upper-cased and restricted to A, C, G, T, N.
pub fn load_sequences_csv<R: BufRead>(input: R) -> Result<Vec<SequenceRecord>> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::Data("empty file, expected a sequence,label header".into())),
    };
    if header.trim() != "sequence,label" {
        return Err(Error::Data(format!(
            "line 1: expected header \"sequence,label\", found {:?}",
            header.trim()
        )));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.trim().split(',');
        let (seq, label) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(l), None) => (s, l),
            _ => {
                return Err(Error::Data(format!(
                    "line {lineno}: expected exactly 2 comma-separated fields"
                )))
            }
        };
        records.push(SequenceRecord {
            sequence: validate_sequence(seq.trim(), lineno)?,
            label: parse_label(label, lineno)?,
        });
    }
    if records.is_empty() {
        return Err(Error::Data("no sequence rows after the header".into()));
    }
    Ok(records)
}

/// Reads FASTA where every record header carries a `label=0` or `label=1`
/// token, e.g. `>seq12 label=1`. Sequence lines may wrap.
pub fn load_sequences_fasta<R: BufRead>(input: R) -> Result<Vec<SequenceRecord>> {
    let mut records = Vec::new();
    let mut current: Option<(usize, u8, String)> = None;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('>') {
            if let Some((start, label, seq)) = current.take() {
                if seq.is_empty() {
                    return Err(Error::Data(format!("line {start}: record has no sequence")));
                }
                records.push(SequenceRecord { sequence: seq, label });
            }
            let label_token = header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix("label="))
                .ok_or_else(|| {
                    Error::Data(format!("line {lineno}: header is missing a label= token"))
                })?;
            current = Some((lineno, parse_label(label_token, lineno)?, String::new()));
        } else {
            match current.as_mut() {
                Some((_, _, seq)) => seq.push_str(&validate_sequence(trimmed, lineno)?),
                None => {
                    return Err(Error::Data(format!(
                        "line {lineno}: sequence data before the first > header"
                    )))
                }
            }
        }
    }
    if let Some((start, label, seq)) = current.take() {
        if seq.is_empty() {
            return Err(Error::Data(format!("line {start}: record has no sequence")));
        }
        records.push(SequenceRecord { sequence: seq, label });
    }
    if records.is_empty() {
        return Err(Error::Data("no FASTA records found".into()));
    }
    Ok(records)
}

/// Reads sequences for prediction from CSV with either a bare `sequence`
/// header or the full `sequence,label` header; labels, when present, are
/// validated and discarded.
pub fn load_unlabeled_csv<R: BufRead>(input: R) -> Result<Vec<String>> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::Data("empty file, expected a sequence header".into())),
    };
    let labelled = match header.trim() {
        "sequence" => false,
        "sequence,label" => true,
        other => {
            return Err(Error::Data(format!(
                "line 1: expected header \"sequence\" or \"sequence,label\", found {other:?}"
            )))
        }
    };
    let mut sequences = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.trim().split(',');
        let seq = fields.next().expect("split yields at least one field");
        match (labelled, fields.next(), fields.next()) {
            (false, None, _) => {}
            (true, Some(label), None) => {
                parse_label(label, lineno)?;
            }
            _ => {
                return Err(Error::Data(format!(
                    "line {lineno}: field count does not match the header"
                )))
            }
        }
        sequences.push(validate_sequence(seq.trim(), lineno)?);
    }
    if sequences.is_empty() {
        return Err(Error::Data("no sequence rows after the header".into()));
    }
    Ok(sequences)
}

/// Writes records in the same `sequence,label` CSV format the loader
/// reads.
pub fn write_sequences_csv<W: std::io::Write>(
    records: &[SequenceRecord],
    mut out: W,
) -> Result<()> {
    writeln!(out, "sequence,label")?;
    for r in records {
        writeln!(out, "{},{}", r.sequence, r.label)?;
    }
    Ok(())
}

/// Loads sequences from a path, picking the parser by extension: `.csv`
/// for CSV, `.fa`, `.fasta` or `.fna` for FASTA.
pub fn load_sequences<P: AsRef<Path>>(path: P) -> Result<Vec<SequenceRecord>> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    match ext.as_str() {
        "csv" => load_sequences_csv(reader),
        "fa" | "fasta" | "fna" => load_sequences_fasta(reader),
        other => Err(Error::Usage(format!(
            "unsupported input extension {other:?}; expected csv, fa, fasta or fna"
        ))),
    }
}

/// Normalized k-mer frequency rows for a batch of sequences.
#[derive(Debug, Clone)]
pub struct KmerFeatures {
    /// One row per sequence, `4^k` columns in lexicographic k-mer order
    /// (A < C < G < T). Each row sums to 1, except all-zero rows.
    pub matrix: Array2<f64>,
    /// Rows with no countable window (too short, or every window touched
    /// an N). These stay all-zero; callers should surface them.
    pub zero_rows: Vec<usize>,
}

fn base_index(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// Counts overlapping k-mers in each sequence and normalizes per row.
/// Windows containing N (or any non-ACGT byte) are skipped.
pub fn kmer_features(sequences: &[String], k: usize) -> Result<KmerFeatures> {
    if !(1..=MAX_KMER_LEN).contains(&k) {
        return Err(Error::Config(format!("k-mer length {k} out of range 1..={MAX_KMER_LEN}")));
    }
    if sequences.is_empty() {
        return Err(Error::Data("no sequences to vectorize".into()));
    }
    let dim = 4usize.pow(k as u32);
    let mut matrix = Array2::zeros((sequences.len(), dim));
    let mut zero_rows = Vec::new();
    for (row, seq) in sequences.iter().enumerate() {
        let bytes = seq.as_bytes();
        let mut total = 0usize;
        for window in bytes.windows(k) {
            let mut index = 0usize;
            let mut valid = true;
            for &b in window {
                match base_index(b) {
                    Some(d) => index = index * 4 + d,
                    None => {
                        valid = false;
                        break;
                    }
                }
            }
            if valid {
                matrix[[row, index]] += 1.0;
                total += 1;
            }
        }
        if total == 0 {
            zero_rows.push(row);
        } else {
            let norm = total as f64;
            matrix.row_mut(row).mapv_inplace(|v| v / norm);
        }
    }
    Ok(KmerFeatures { matrix, zero_rows })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// diagonal (unsorted eigenvalues) and the accumulated rotation whose
/// columns are the eigenvectors.
fn jacobi_eigen(mut a: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut v = Array2::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[[p, q]] * a[[p, q]])
            .sum();
        if off.sqrt() <= 1e-13 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let tau = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = c * aip - s * aiq;
                    a[[i, q]] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[[p, i]];
                    let aqi = a[[q, i]];
                    a[[p, i]] = c * api - s * aqi;
                    a[[q, i]] = s * api + c * aqi;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

/// Fixes each component's overall sign so its largest-magnitude entry is
/// positive; eigenvectors are otherwise sign-ambiguous and reruns should
/// produce bit-identical models.
fn canonical_sign(component: &mut Array1<f64>) {
    let mut best = 0usize;
    for (i, v) in component.iter().enumerate() {
        if v.abs() > component[best].abs() {
            best = i;
        }
    }
    if component[best] < 0.0 {
        component.mapv_inplace(|v| -v);
    }
}

/// A fitted PCA projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-feature mean of the training data.
    pub mean: Vec<f64>,
    /// Row-major components, one row per retained axis, orthonormal.
    pub components: Array2<f64>,
    /// Sample variance of the training data along each retained axis,
    /// in descending order.
    pub explained_variance: Vec<f64>,
}

/// Fits PCA by eigendecomposition. When the feature count exceeds the row
/// count the n x n Gram matrix is decomposed instead of the d x d
/// covariance; the two give the same leading subspace.
pub fn fit_pca(x: &Array2<f64>, n_components: usize) -> Result<PcaModel> {
    let n = x.nrows();
    let d = x.ncols();
    if n < 2 {
        return Err(Error::Data(format!("pca needs at least 2 rows, got {n}")));
    }
    if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("feature matrix entry {bad} is not finite")));
    }
    let max_components = d.min(n - 1);
    if n_components < 1 || n_components > max_components {
        return Err(Error::Config(format!(
            "n_components {n_components} out of range 1..={max_components} for a {n} x {d} matrix (centered rank is at most rows - 1)"
        )));
    }
    let mean = x.mean_axis(ndarray::Axis(0)).expect("nrows >= 2");
    let centered = x - &mean.view().insert_axis(ndarray::Axis(0));
    let denom = (n - 1) as f64;

    let mut axes: Vec<(f64, Array1<f64>)> = if d <= n {
        let cov = centered.t().dot(&centered) / denom;
        let (eigvals, eigvecs) = jacobi_eigen(cov);
        (0..d).map(|j| (eigvals[j], eigvecs.column(j).to_owned())).collect()
    } else {
        // Gram trick: XXᵀ u = s² u gives the component as Xᵀu / ||Xᵀu||
        let gram = centered.dot(&centered.t());
        let (eigvals, eigvecs) = jacobi_eigen(gram);
        let mut out = Vec::with_capacity(n);
        for (j, &eigval) in eigvals.iter().enumerate() {
            let u = eigvecs.column(j);
            let unnormalized = centered.t().dot(&u);
            let norm = unnormalized.dot(&unnormalized).sqrt();
            let variance = eigval / denom;
            if norm > 1e-12 {
                out.push((variance, unnormalized / norm));
            } else {
                // numerically rank-deficient direction; keep the variance
                // (it is ~0) with a placeholder that sorts to the back
                out.push((variance.min(0.0), Array1::zeros(d)));
            }
        }
        out
    };

    axes.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite variances"));
    axes.truncate(n_components);
    let mut components = Array2::zeros((n_components, d));
    let mut explained_variance = Vec::with_capacity(n_components);
    for (row, (variance, mut axis)) in axes.into_iter().enumerate() {
        if axis.dot(&axis) < 0.5 {
            return Err(Error::Numeric(format!(
                "component {row} has vanishing variance; reduce n_components"
            )));
        }
        canonical_sign(&mut axis);
        components.row_mut(row).assign(&axis);
        explained_variance.push(variance.max(0.0));
    }
    Ok(PcaModel { mean: mean.to_vec(), components, explained_variance })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Projects rows of `x` onto the retained axes.
    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Usage(format!(
                "pca was fitted on {} features but got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mean = Array1::from(self.mean.clone());
        let centered = x - &mean.view().insert_axis(ndarray::Axis(0));
        Ok(centered.dot(&self.components.t()))
    }
}

/// A fitted per-column min-max rescaler onto `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

/// Fits column ranges from training data.
pub fn fit_scaler(x: &Array2<f64>, lo: f64, hi: f64) -> Result<ScalerModel> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("scaler range [{lo}, {hi}] must be finite with lo < hi")));
    }
    if x.nrows() == 0 {
        return Err(Error::Data("no rows to fit the scaler on".into()));
    }
    if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("feature matrix entry {bad} is not finite")));
    }
    let mut min = vec![f64::INFINITY; x.ncols()];
    let mut max = vec![f64::NEG_INFINITY; x.ncols()];
    for row in x.rows() {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(ScalerModel { min, max, lo, hi })
}

impl ScalerModel {
    /// Maps each column affinely onto `[lo, hi]`, clamping values that
    /// fall outside the fitted range (unseen data may exceed it). A
    /// constant training column maps to the window midpoint.
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::Usage(format!(
                "scaler was fitted on {} features but got {}",
                self.min.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span == 0.0 {
                    (self.lo + self.hi) / 2.0
                } else {
                    let unit = (*v - self.min[j]) / span;
                    (self.lo + unit * (self.hi - self.lo)).clamp(self.lo, self.hi)
                };
            }
        }
        Ok(out)
    }
}

/// The full fitted preprocessing chain, serializable alongside a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub k: usize,
    pub pca: PcaModel,
    pub scaler: ScalerModel,
}

impl Preprocessor {
    /// Fits k-mer counting, PCA and the angle scaler on training
    /// sequences. Returns the fitted chain, the transformed training
    /// features, and the indices of all-zero k-mer rows.
    pub fn fit(
        sequences: &[String],
        k: usize,
        n_components: usize,
    ) -> Result<(Self, Array2<f64>, Vec<usize>)> {
        let kmers = kmer_features(sequences, k)?;
        let pca = fit_pca(&kmers.matrix, n_components)?;
        let projected = pca.transform(&kmers.matrix)?;
        let scaler = fit_scaler(&projected, ANGLE_LO, ANGLE_HI)?;
        let features = scaler.apply(&projected)?;
        Ok((Preprocessor { k, pca, scaler }, features, kmers.zero_rows))
    }

    /// Applies the fitted chain to new sequences.
    pub fn transform(&self, sequences: &[String]) -> Result<(Array2<f64>, Vec<usize>)> {
        let kmers = kmer_features(sequences, self.k)?;
        let features = self.scaler.apply(&self.pca.transform(&kmers.matrix)?)?;
        Ok((features, kmers.zero_rows))
    }
}

/// Splits indices into train and test sets, preserving class balance.
/// Each class contributes `round(test_fraction * class_size)` test rows,
/// clamped so both sides keep at least one row of every class. Returned
/// index lists are sorted.
pub fn stratified_split(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test_fraction {test_fraction} must be in (0, 1)")));
    }
    if let Some(pos) = labels.iter().position(|&v| v > 1) {
        return Err(Error::Data(format!("label at row {pos} is {}, expected 0 or 1", labels[pos])));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::Data(format!(
                "class {class} has {} samples; need at least 2 to land in both splits",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let want = (test_fraction * members.len() as f64).round() as usize;
        let n_test = want.clamp(1, members.len() - 1);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn csv_round_trip_with_case_folding() {
        let input = "sequence,label\nACGT,1\nacgnt,0\n\nTTTT,1\n";
        let records = load_sequences_csv(input.as_bytes()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[1], SequenceRecord { sequence: "ACGNT".into(), label: 0 });
        assert_eq!(records[2].label, 1);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad_header = load_sequences_csv("seq,lab\nACGT,1\n".as_bytes());
        assert!(matches!(bad_header, Err(Error::Data(m)) if m.contains("line 1")));
        let bad_char = load_sequences_csv("sequence,label\nACGT,1\nACXT,0\n".as_bytes());
        assert!(matches!(bad_char, Err(Error::Data(m)) if m.contains("line 3") && m.contains("'X'")));
        let bad_label = load_sequences_csv("sequence,label\nACGT,7\n".as_bytes());
        assert!(matches!(bad_label, Err(Error::Data(m)) if m.contains("line 2")));
        let bad_fields = load_sequences_csv("sequence,label\nACGT,1,9\n".as_bytes());
        assert!(matches!(bad_fields, Err(Error::Data(m)) if m.contains("line 2")));
        let empty = load_sequences_csv("sequence,label\n".as_bytes());
        assert!(matches!(empty, Err(Error::Data(_))));
    }

    #[test]
    fn unlabeled_csv_accepts_both_headers() {
        let bare = load_unlabeled_csv("sequence\nACGT\nTTAA\n".as_bytes()).unwrap();
        assert_eq!(bare, vec!["ACGT".to_string(), "TTAA".to_string()]);
        let labelled = load_unlabeled_csv("sequence,label\nACGT,1\nttaa,0\n".as_bytes()).unwrap();
        assert_eq!(labelled, vec!["ACGT".to_string(), "TTAA".to_string()]);
        let bad_header = load_unlabeled_csv("id,sequence\nx,ACGT\n".as_bytes());
        assert!(matches!(bad_header, Err(Error::Data(m)) if m.contains("line 1")));
        let extra_field = load_unlabeled_csv("sequence\nACGT,1\n".as_bytes());
        assert!(matches!(extra_field, Err(Error::Data(m)) if m.contains("line 2")));
        let empty = load_unlabeled_csv("sequence\n".as_bytes());
        assert!(matches!(empty, Err(Error::Data(_))));
    }

    #[test]
    fn fasta_concatenates_wrapped_sequences() {
        let input = ">r0 label=1\nACGT\nACGT\n>r1 desc label=0 extra\nTT\n";
        let records = load_sequences_fasta(input.as_bytes()).unwrap();
        assert_eq!(records[0], SequenceRecord { sequence: "ACGTACGT".into(), label: 1 });
        assert_eq!(records[1], SequenceRecord { sequence: "TT".into(), label: 0 });
    }

    #[test]
    fn fasta_errors_carry_line_numbers() {
        let missing = load_sequences_fasta(">r0\nACGT\n".as_bytes());
        assert!(matches!(missing, Err(Error::Data(m)) if m.contains("line 1") && m.contains("label=")));
        let stray = load_sequences_fasta("ACGT\n>r0 label=1\nAC\n".as_bytes());
        assert!(matches!(stray, Err(Error::Data(m)) if m.contains("line 1")));
        let empty_record = load_sequences_fasta(">r0 label=1\n>r1 label=0\nAC\n".as_bytes());
        assert!(matches!(empty_record, Err(Error::Data(m)) if m.contains("line 1")));
        let bad_label = load_sequences_fasta(">r0 label=x\nAC\n".as_bytes());
        assert!(matches!(bad_label, Err(Error::Data(m)) if m.contains("line 1")));
    }

    #[test]
    fn kmer_counts_match_hand_tally() {
        // ACGTAC windows: AC CG GT TA AC
        let feats = kmer_features(&["ACGTAC".to_string()], 2).unwrap();
        let idx = |s: &str| {
            s.bytes().fold(0usize, |acc, b| acc * 4 + base_index(b).unwrap())
        };
        assert_eq!(feats.matrix.ncols(), 16);
        assert_abs_diff_eq!(feats.matrix[[0, idx("AC")]], 2.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(feats.matrix[[0, idx("CG")]], 1.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(feats.matrix[[0, idx("GT")]], 1.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(feats.matrix[[0, idx("TA")]], 1.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(feats.matrix.row(0).sum(), 1.0, epsilon = 1e-12);
        assert!(feats.zero_rows.is_empty());
    }

    #[test]
    fn windows_touching_n_are_skipped() {
        // ACGNAC: valid windows AC CG AC, the two crossing N are dropped
        let feats = kmer_features(&["ACGNAC".to_string()], 2).unwrap();
        let row = feats.matrix.row(0);
        assert_abs_diff_eq!(row[1], 2.0 / 3.0, epsilon = 1e-15); // AC
        assert_abs_diff_eq!(row[6], 1.0 / 3.0, epsilon = 1e-15); // CG
        assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uncountable_rows_are_flagged_and_zero() {
        let seqs = vec!["NNNN".to_string(), "ACGT".to_string(), "AG".to_string()];
        let feats = kmer_features(&seqs, 3).unwrap();
        assert_eq!(feats.zero_rows, vec![0, 2]);
        assert_eq!(feats.matrix.row(0).sum(), 0.0);
        assert_eq!(feats.matrix.row(2).sum(), 0.0);
        assert_abs_diff_eq!(feats.matrix.row(1).sum(), 1.0, epsilon = 1e-12);
        assert!(matches!(kmer_features(&seqs, 0), Err(Error::Config(_))));
        assert!(matches!(kmer_features(&seqs, 9), Err(Error::Config(_))));
    }

    fn random_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        let raw = random_matrix(6, 6, 3);
        let sym = (&raw + &raw.t()) / 2.0;
        let (vals, vecs) = jacobi_eigen(sym.clone());
        let na = nalgebra::DMatrix::from_fn(6, 6, |i, j| sym[[i, j]]);
        let mut expected: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut got = vals.clone();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-10);
        }
        // residual check: A v = lambda v for every pair
        for (j, &val) in vals.iter().enumerate() {
            let v = vecs.column(j).to_owned();
            let av = sym.dot(&v);
            for i in 0..6 {
                assert_abs_diff_eq!(av[i], val * v[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn pca_recovers_a_dominant_direction() {
        // points spread along (1, 1)/sqrt(2) with tiny noise across it
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let main = Normal::new(0.0, 2.0).unwrap();
        let cross = Normal::new(0.0, 0.05).unwrap();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut x = Array2::zeros((200, 2));
        for mut row in x.rows_mut() {
            let a = main.sample(&mut rng);
            let b = cross.sample(&mut rng);
            row[0] = a * inv + b * inv;
            row[1] = a * inv - b * inv;
        }
        let pca = fit_pca(&x, 1).unwrap();
        let c = pca.components.row(0);
        assert_abs_diff_eq!(c[0].abs(), inv, epsilon = 0.02);
        assert_abs_diff_eq!(c[1].abs(), inv, epsilon = 0.02);
        assert!(c[0] > 0.0, "sign convention puts the biggest entry positive");
        // projected variance matches the reported explained variance
        let proj = pca.transform(&x).unwrap();
        let col = proj.column(0);
        let mean = col.mean().unwrap();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
        assert_abs_diff_eq!(var, pca.explained_variance[0], epsilon = 1e-10);
    }

    #[test]
    fn components_are_orthonormal() {
        let x = random_matrix(30, 6, 21);
        let pca = fit_pca(&x, 4).unwrap();
        let gram = pca.components.dot(&pca.components.t());
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[[i, j]], expected, epsilon = 1e-10);
            }
        }
        let ev = &pca.explained_variance;
        assert!(ev.windows(2).all(|w| w[0] >= w[1] - 1e-12), "descending variances");
    }

    #[test]
    fn gram_trick_matches_covariance_path() {
        // same data, wide layout forces the Gram path; compare the top
        // component against the covariance path on the transposed problem
        let x = random_matrix(8, 20, 5);
        let pca = fit_pca(&x, 3).unwrap();
        assert_eq!(pca.components.nrows(), 3);
        // oracle: nalgebra eigen of the full covariance
        let n = x.nrows() as f64;
        let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
        let centered = &x - &mean.view().insert_axis(ndarray::Axis(0));
        let cov = centered.t().dot(&centered) / (n - 1.0);
        let na = nalgebra::DMatrix::from_fn(20, 20, |i, j| cov[[i, j]]);
        let eig = na.symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..20)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors.column(j).iter().copied().collect()))
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        for (comp, pair) in pairs.iter().take(3).enumerate() {
            assert_abs_diff_eq!(pca.explained_variance[comp], pair.0, epsilon = 1e-9);
            let dot: f64 = pca
                .components
                .row(comp)
                .iter()
                .zip(&pair.1)
                .map(|(a, b)| a * b)
                .sum();
            assert_abs_diff_eq!(dot.abs(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn pca_rejects_bad_shapes() {
        let x = random_matrix(5, 3, 1);
        assert!(matches!(fit_pca(&x, 0), Err(Error::Config(_))));
        assert!(matches!(fit_pca(&x, 4), Err(Error::Config(_))));
        assert!(matches!(fit_pca(&random_matrix(1, 3, 1), 1), Err(Error::Data(_))));
        let pca = fit_pca(&x, 2).unwrap();
        assert!(matches!(pca.transform(&random_matrix(2, 4, 2)), Err(Error::Usage(_))));
    }

    #[test]
    fn scaler_maps_range_and_clamps() {
        let x = array![[0.0, 5.0], [2.0, 5.0], [4.0, 5.0]];
        let scaler = fit_scaler(&x, 0.0, std::f64::consts::PI).unwrap();
        let scaled = scaler.apply(&x).unwrap();
        assert_abs_diff_eq!(scaled[[0, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled[[1, 0]], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled[[2, 0]], std::f64::consts::PI, epsilon = 1e-15);
        // constant column goes to the midpoint
        assert_abs_diff_eq!(scaled[[1, 1]], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        // unseen data beyond the fitted range clamps to the window
        let outside = scaler.apply(&array![[9.0, 5.0], [-3.0, 5.0]]).unwrap();
        assert_abs_diff_eq!(outside[[0, 0]], std::f64::consts::PI, epsilon = 1e-15);
        assert_abs_diff_eq!(outside[[1, 0]], 0.0, epsilon = 1e-15);
        assert!(matches!(fit_scaler(&x, 1.0, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn preprocessor_produces_angles_in_window() {
        let seqs: Vec<String> = ["ACGTACGTAA", "TTGACCGTTA", "AAAACCCGGT", "GGTTAACCGG"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (prep, features, zero) = Preprocessor::fit(&seqs, 2, 2).unwrap();
        assert!(zero.is_empty());
        assert_eq!(features.dim(), (4, 2));
        assert!(features.iter().all(|&v| (ANGLE_LO..=ANGLE_HI).contains(&v)));
        // transform of the training data reproduces the fitted features
        let (again, _) = prep.transform(&seqs).unwrap();
        assert_abs_diff_eq!(
            (features - again).iter().map(|v| v.abs()).fold(0.0, f64::max),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn split_is_stratified_disjoint_and_deterministic() {
        let labels: Vec<u8> = (0..40).map(|i| (i % 4 == 0) as u8).collect(); // 10 ones, 30 zeros
        let (train, test) = stratified_split(&labels, 0.25, 13).unwrap();
        assert_eq!(train.len() + test.len(), 40);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        let ones_test = test.iter().filter(|&&i| labels[i] == 1).count();
        let zeros_test = test.len() - ones_test;
        assert_eq!(ones_test, 3); // round(0.25 * 10)
        assert_eq!(zeros_test, 8); // round(0.25 * 30)
        let again = stratified_split(&labels, 0.25, 13).unwrap();
        assert_eq!(again, (train.clone(), test.clone()));
        let other = stratified_split(&labels, 0.25, 14).unwrap();
        assert_ne!(other.1, test);
    }

    #[test]
    fn split_keeps_every_class_on_both_sides() {
        let labels = [0u8, 0, 1, 1];
        let (train, test) = stratified_split(&labels, 0.1, 0).unwrap();
        for side in [&train, &test] {
            assert!(side.iter().any(|&i| labels[i] == 0));
            assert!(side.iter().any(|&i| labels[i] == 1));
        }
        assert!(matches!(stratified_split(&[0, 0, 1], 0.5, 0), Err(Error::Data(_))));
        assert!(matches!(stratified_split(&labels, 0.0, 0), Err(Error::Config(_))));
        assert!(matches!(stratified_split(&labels, 1.0, 0), Err(Error::Config(_))));
    }
}
